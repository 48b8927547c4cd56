#pragma once

#include <optional>
#include <string>

#include "relumip/encoding.hpp"
#include "relumip/interval.hpp"
#include "relumip/lp.hpp"

namespace relumip {

/// Interval: propagation only. Shared2N2: preactivation plus unconditioned
/// partition sums (2N + 2 LPs per node). Split4N: additionally bounds each
/// partition sum under the node's inactive and active side constraints.
enum class ObbtMode { Interval, Shared2N2, Split4N };

ObbtMode parse_obbt_mode(const std::string& name);
std::string to_string(ObbtMode m);

struct ObbtOptions
{
    ObbtMode mode = ObbtMode::Shared2N2;
    /// Formulation of the relaxed prefix models.
    Formulation formulation = Formulation::Partitioned;
    bool stabilize = true;
    long lp_iteration_limit = 50000;
    double lp_time_limit = kInf;  // seconds per LP
    int jobs = 1;
    std::optional<L1Ball> ball;
};

struct ObbtStats
{
    long lps = 0;
    long fallbacks = 0;
    long infeasible_sides = 0;  // activity-conditioned LPs proving a node stable
    double seconds = 0.0;
};

/// Relaxation of the layers before `layer`, ready for bounding its nodes.
struct PrefixRelaxation
{
    NetworkEncoding encoding;
    std::vector<int> layer_inputs;
    LpSolver solver;
};

PrefixRelaxation build_prefix(const NeuralNet& net, const BoundsTable& table, std::size_t layer,
                              const ObbtOptions& options);

/// Tightens one node of the prefix's layer starting from `current`; never loosens it.
NodeBounds tighten_node(const PrefixRelaxation& prefix, const Eigen::Ref<const Eigen::VectorXd>& w, double b,
                        const NodeBounds& current, bool hidden, const ObbtOptions& options,
                        ObbtStats* stats = nullptr);

/// Layer-by-layer tightening of an existing table (intersected with it).
BoundsTable tighten_table(const NeuralNet& net, const BoundsTable& table, const ObbtOptions& options,
                          ObbtStats* stats = nullptr);

BoundsTable run_obbt(const NeuralNet& net, const InputBox& box, const PartitionPlan& plan, const ObbtOptions& options,
                     ObbtStats* stats = nullptr);

}  // namespace relumip
