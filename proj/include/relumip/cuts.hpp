#pragma once

#include <Eigen/Dense>
#include <functional>
#include <optional>
#include <vector>

#include "relumip/encoding.hpp"
#include "relumip/lp.hpp"

namespace relumip {

inline constexpr double kCutTolerance = 1e-6;

/// Member of a node's hull family, indexed by the subset I of inputs kept:
/// y <= sum_I w x + sigma (b + sum_{not I} UB + sum_I LB) - sum_I LB,
/// with [LB_i, UB_i] the range of w_i x_i.
struct HullInequality
{
    std::vector<int> subset;  // positions into the node's inputs, ascending
    double violation = 0.0;   // lhs - rhs at the separated point
};

/// Value of lhs - rhs of the family member for `subset` at (x, sigma, y).
double hull_violation(const Eigen::Ref<const Eigen::VectorXd>& w, double b, const std::vector<Interval>& terms,
                      const std::vector<int>& subset, const Eigen::Ref<const Eigen::VectorXd>& x, double sigma,
                      double y);

/// Most violated family member at (x, sigma, y), found in linear time. Returns
/// nothing unless its violation exceeds tol, in which case no member is violated by more than tol.
std::optional<HullInequality> separate_most_violated(const Eigen::Ref<const Eigen::VectorXd>& w, double b,
                                                     const std::vector<Interval>& terms,
                                                     const Eigen::Ref<const Eigen::VectorXd>& x, double sigma,
                                                     double y, double tol = kCutTolerance);

/// Family member as a model row over the node's variables.
Constraint hull_constraint(const NodeEncoding& node, const std::vector<int>& subset);

/// One separation round over every binary node of the encoding at an LP point.
std::vector<Constraint> separate_round(const std::vector<NodeEncoding>& nodes,
                                       const Eigen::Ref<const Eigen::VectorXd>& point, double tol = kCutTolerance);

/// Solves the root relaxation, separates once per node and appends every violated
/// cut to the model. Returns the number of cuts added (0 if the LP fails).
int add_root_cuts(MilpModel& model, const std::vector<NodeEncoding>& nodes, const LpLimits& limits = {});

}  // namespace relumip
