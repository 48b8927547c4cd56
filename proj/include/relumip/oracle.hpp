#pragma once

#include <Eigen/Dense>
#include <functional>
#include <vector>

#include "relumip/interval.hpp"
#include "relumip/lp.hpp"
#include "relumip/milp_model.hpp"
#include "relumip/network.hpp"

namespace relumip {

/// Adds task rows and the objective given the input and output variables.
using TaskHook = std::function<void(MilpModel&, const std::vector<int>& inputs, const std::vector<int>& outputs)>;

struct OracleOptions
{
    int max_unstable = 20;
    /// Fix nodes the bounds table proves stable instead of enumerating both phases.
    bool prune_stable = true;
    LpLimits lp;
};

struct OracleResult
{
    bool feasible = false;
    double value = 0.0;
    Eigen::VectorXd input;
    std::vector<std::vector<bool>> pattern;  // per hidden layer, true = active
    long patterns = 0;
    long infeasible_patterns = 0;
    int enumerated_nodes = 0;
};

/// Exhaustive activation-pattern search: one LP per phase assignment of the
/// enumerated nodes. Throws Refused above max_unstable nodes.
OracleResult enumerate_optimum(const NeuralNet& net, const BoundsTable& bounds, const TaskHook& task,
                               const OracleOptions& options = {});

/// Optimal value of the LP relaxation (binaries relaxed). Throws unless optimal.
double relaxation_value(const MilpModel& model, const LpLimits& limits = {});

}  // namespace relumip
