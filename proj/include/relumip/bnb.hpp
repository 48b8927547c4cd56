#pragma once

#include <Eigen/Dense>
#include <functional>
#include <iosfwd>
#include <limits>
#include <string>
#include <vector>

#include "relumip/lp.hpp"
#include "relumip/milp_model.hpp"

namespace relumip {

enum class NodeSelection { BestBound, DepthFirst };
/// Strong: solve both children of every candidate. Reliability: strong
/// branching until a candidate has `reliability` pseudocost samples per side.
enum class BranchRule { MostFractional, PseudoCost, Strong, Reliability };

BranchRule parse_branch_rule(const std::string& name);
std::string to_string(BranchRule r);
enum class CutPolicy { Off, RootOnly, Frequency };

CutPolicy parse_cut_policy(const std::string& name);
std::string to_string(CutPolicy p);

inline constexpr double kSignTolerance = 1e-6;

struct BnbConfig
{
    NodeSelection node_selection = NodeSelection::BestBound;
    BranchRule branch_rule = BranchRule::Reliability;
    int reliability = 4;
    long strong_iterations = 200;  // simplex budget per strong-branching child
    double rel_gap = 1e-6;
    double abs_gap = 1e-9;
    double time_limit = kInf;  // seconds
    long node_limit = std::numeric_limits<long>::max();
    CutPolicy cuts = CutPolicy::Off;
    int cut_frequency_k = 1;  // separate at every k-th node under CutPolicy::Frequency
    bool stop_on_sign = false;
    double integrality_tol = 1e-6;
    LpLimits lp;
    std::ostream* log = nullptr;
    long log_every = 1000;  // nodes between progress lines
};

enum class MilpStatus { Optimal, SignDetermined, TimeLimit, NodeLimit, Infeasible };

const char* to_string(MilpStatus s);

struct MilpResult
{
    MilpStatus status = MilpStatus::Infeasible;
    bool has_incumbent = false;
    /// In the model's sense; -inf (max) or +inf (min) without an incumbent.
    double incumbent_value = 0.0;
    double best_bound = 0.0;
    double root_bound = 0.0;  // after root cuts
    Eigen::VectorXd incumbent_point;
    long nodes_explored = 0;
    int cuts_added = 0;
    long lp_iterations = 0;
    int heuristic_solutions = 0;  // incumbents found by the primal heuristic
    double wall_time = 0.0;
    std::vector<Constraint> cuts;
};

/// Returns candidate cuts at an LP point; each is checked for violation and duplicates before use.
using CutCallback = std::function<std::vector<Constraint>(const Eigen::VectorXd& point)>;

/// Proposes values for (some of) the binaries at an LP point. The engine solves
/// the LP with those binaries fixed and keeps the result if it is integral.
using PrimalHeuristic = std::function<std::vector<std::pair<int, double>>(const Eigen::VectorXd& point)>;

MilpResult solve_milp(const MilpModel& model, const BnbConfig& config = {}, const CutCallback& cuts = {},
                      const PrimalHeuristic& heuristic = {});

}  // namespace relumip
