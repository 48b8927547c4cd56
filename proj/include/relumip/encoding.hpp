#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "relumip/interval.hpp"
#include "relumip/milp_model.hpp"
#include "relumip/network.hpp"
#include "relumip/partition.hpp"

namespace relumip {

enum class Formulation { BigM, Partitioned, NonLifted, ConvexHull };

Formulation parse_formulation(const std::string& name);
std::string to_string(Formulation f);

/// Variables and rows emitted for one ReLU node. For unstable nodes the data
/// needed by the cut separator (inputs, weights, per-input bounds) is kept too.
struct NodeEncoding
{
    std::size_t layer = 0;
    std::size_t node = 0;
    int sigma = -1;  // -1 when the node was linearized as stable
    int output = -1;
    std::vector<int> partition_slacks;
    std::vector<int> rows;

    std::vector<int> inputs;
    Eigen::VectorXd weights;
    double bias = 0.0;
    std::vector<Interval> input_terms;  // range of w_i x_i per input
};

/// Range of w_i x_i for every input of a node over the given box.
std::vector<Interval> weighted_input_ranges(const Eigen::Ref<const Eigen::VectorXd>& w, const InputBox& box);

NodeEncoding encode_bigm(MilpModel& model, const std::vector<int>& inputs, const Eigen::Ref<const Eigen::VectorXd>& w,
                         double b, const NodeBounds& bounds, const std::string& prefix);

/// Lifted partitioned encoding. The partition and its intervals come from `bounds`;
/// empty subsets are dropped.
NodeEncoding encode_partitioned(MilpModel& model, const std::vector<int>& inputs,
                                const Eigen::Ref<const Eigen::VectorXd>& w, double b, const NodeBounds& bounds,
                                const std::string& prefix);

/// Projected form of the partitioned encoding: one inequality per union of
/// subsets (2^N of them), no auxiliary variables.
NodeEncoding encode_nonlifted(MilpModel& model, const std::vector<int>& inputs,
                              const Eigen::Ref<const Eigen::VectorXd>& w, double b, const Partition& partition,
                              const std::vector<Interval>& input_terms, const Interval& preact,
                              const std::string& prefix, int max_partitions = 12);

/// Partitioned encoding with one subset per input.
NodeEncoding encode_convex_hull(MilpModel& model, const std::vector<int>& inputs,
                                const Eigen::Ref<const Eigen::VectorXd>& w, double b,
                                const std::vector<Interval>& input_terms, const Interval& preact,
                                const std::string& prefix);

/// Optional l1 ball ||x - center||_1 <= radius on the network input, on top of the box.
struct L1Ball
{
    Eigen::VectorXd center;
    double radius = 0.0;
};

/// Adds d_i >= |x_i - center_i| and sum d_i <= radius (radius_var, if given,
/// replaces the constant radius). Returns the ids of d.
std::vector<int> add_l1_ball(MilpModel& model, const std::vector<int>& x, const Eigen::Ref<const Eigen::VectorXd>& center,
                             double radius, int radius_var = -1);

struct EncodingOptions
{
    Formulation formulation = Formulation::BigM;
    /// Replace nodes with fixed phase by y = 0 or y = w^T x + b.
    bool stabilize = true;
    int nonlifted_cap = 12;
    /// Number of layers to encode; 0 means the whole network. Encoding k < L
    /// layers yields the prefix feeding layer k (no output variables).
    std::size_t num_layers = 0;
};

struct NetworkEncoding
{
    MilpModel model;
    std::vector<int> inputs;
    /// Variables holding each encoded layer's values; the output layer's are affine.
    std::vector<std::vector<int>> layer_vars;
    std::vector<NodeEncoding> nodes;

    const std::vector<int>& outputs() const { return layer_vars.back(); }
    std::vector<int> binaries() const;
};

NetworkEncoding encode_network(const NeuralNet& net, const BoundsTable& bounds, const EncodingOptions& options,
                               const std::optional<L1Ball>& ball = std::nullopt);

/// w^T v + b for the node's inputs as a linear expression.
LinearExpr affine_expr(const std::vector<int>& vars, const Eigen::Ref<const Eigen::VectorXd>& w, double b);

}  // namespace relumip
