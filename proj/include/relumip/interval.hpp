#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "relumip/network.hpp"
#include "relumip/partition.hpp"

namespace relumip {

template <typename Scalar>
struct BasicInterval
{
    Scalar lo{};
    Scalar hi{};

    Scalar width() const { return hi - lo; }
    bool contains(Scalar v, Scalar tol = Scalar(0)) const { return v >= lo - tol && v <= hi + tol; }
    bool contains(const BasicInterval& o, Scalar tol = Scalar(0)) const { return o.lo >= lo - tol && o.hi <= hi + tol; }
    BasicInterval intersect(const BasicInterval& o) const { return {std::max(lo, o.lo), std::min(hi, o.hi)}; }

    friend bool operator==(const BasicInterval&, const BasicInterval&) = default;
};

using Interval = BasicInterval<double>;

/// Range of w_i * x_i for x_i in [lo, hi].
inline Interval weighted_range(double w, double lo, double hi)
{
    const double a = w * lo, b = w * hi;
    return {std::min(a, b), std::max(a, b)};
}

/// Range of sum_{i in S} w_i x_i over the box (empty S gives [0, 0]).
template <typename Derived>
Interval partition_interval(const Eigen::MatrixBase<Derived>& w, const std::vector<int>& subset, const InputBox& box)
{
    Interval r{0.0, 0.0};
    for (int i : subset) {
        const double wi = w[i];
        r.lo += box.lower[i] * std::max(0.0, wi) + box.upper[i] * std::min(0.0, wi);
        r.hi += box.upper[i] * std::max(0.0, wi) + box.lower[i] * std::min(0.0, wi);
    }
    return r;
}

/// Interval-arithmetic range of w^T x + b over the box.
template <typename Derived>
Interval node_interval(const Eigen::MatrixBase<Derived>& w, double b, const InputBox& box)
{
    const auto wp = w.cwiseMax(0.0);
    const auto wn = w.cwiseMin(0.0);
    return {box.lower.dot(wp) + box.upper.dot(wn) + b, box.upper.dot(wp) + box.lower.dot(wn) + b};
}

enum class BoundSource { Interval, Obbt, ObbtFallback };

std::string to_string(BoundSource s);

/// Bounds attached to one node. For partitioned encodings, `inactive[n]` bounds
/// sum_{i in S_n} w_i x_i whenever the node is off (preactivation <= 0) and
/// `active[n]` bounds it whenever the node is on.
struct NodeBounds
{
    Interval preact;
    BoundSource preact_source = BoundSource::Interval;
    Partition partition;
    std::vector<Interval> inactive;
    std::vector<Interval> active;
    std::vector<BoundSource> partition_source;

    bool stable_inactive() const { return preact.hi <= 0.0; }
    bool stable_active() const { return preact.lo >= 0.0; }
    bool stable() const { return stable_inactive() || stable_active(); }

    /// Box of the node's output y = max(0, preact).
    Interval output_range() const { return {std::max(0.0, preact.lo), std::max(0.0, preact.hi)}; }
};

/// Bounds for every node of the network: layers[l][j]. The last entry is the
/// (linear) output layer, whose nodes carry preactivation bounds only.
struct BoundsTable
{
    InputBox input_box;
    std::vector<std::vector<NodeBounds>> layers;

    /// Box of the inputs feeding layer l (the network input box for l = 0).
    InputBox layer_input_box(std::size_t l) const;

    /// Number of ReLU nodes that are not fixed by their preactivation bounds.
    int unstable_count() const;
};

/// Interval propagation through the network. `plan` may be empty, in which case
/// every node gets the single-subset partition.
BoundsTable propagate(const NeuralNet& net, const InputBox& box, const PartitionPlan& plan = {});

/// Replaces partitions and recomputes their intervals by interval arithmetic,
/// keeping the preactivation bounds already in the table.
BoundsTable with_partitions(const BoundsTable& table, const NeuralNet& net, const PartitionPlan& plan);

nlohmann::json bounds_to_json(const BoundsTable& table);
BoundsTable bounds_from_json(const nlohmann::json& doc);

}  // namespace relumip
