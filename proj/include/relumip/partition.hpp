#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

namespace relumip {

class NeuralNet;

/// Ordered disjoint cover S_1..S_N of a node's input indices (0-based).
struct Partition
{
    std::vector<std::vector<int>> subsets;

    std::size_t size() const { return subsets.size(); }

    /// Disjoint and covers {0..eta-1} exactly. Empty subsets are allowed.
    bool is_valid_for(int eta) const;

    /// Same partition with empty subsets removed.
    Partition without_empty() const;

    static Partition single(int eta);
    static Partition singletons(int eta);

    friend bool operator==(const Partition&, const Partition&) = default;
};

enum class Strategy { EqualSize, EqualRange, Random, UnevenMagnitudes };

struct StrategyConfig
{
    Strategy strategy = Strategy::EqualSize;
    int num_partitions = 1;
    std::uint64_t seed = 0;
    double quantile_lo = 0.05;
    double quantile_hi = 0.95;
    /// Snake-deal the uneven strategy from the largest weight (true) or the smallest.
    bool uneven_descending = true;
};

Strategy parse_strategy(const std::string& name);
std::string to_string(Strategy s);

Partition equal_size(const Eigen::Ref<const Eigen::VectorXd>& w, int num_partitions);
Partition equal_range(const Eigen::Ref<const Eigen::VectorXd>& w, int num_partitions, double quantile_lo = 0.05,
                      double quantile_hi = 0.95);
Partition random_partition(int eta, int num_partitions, std::uint64_t seed);
Partition uneven_magnitudes(const Eigen::Ref<const Eigen::VectorXd>& w, int num_partitions, bool descending = true);

/// Linear-interpolation quantile between order statistics.
double quantile(const Eigen::Ref<const Eigen::VectorXd>& values, double q);

/// Applies the configured strategy to one node. `node_key` decorrelates random partitions between nodes.
Partition make_partition(const Eigen::Ref<const Eigen::VectorXd>& w, const StrategyConfig& config,
                         std::uint64_t node_key = 0);

/// One partition per ReLU node: plan[layer][node]. Output layer excluded.
using PartitionPlan = std::vector<std::vector<Partition>>;

PartitionPlan make_partition_plan(const NeuralNet& net, const StrategyConfig& config);

/// Replaces subsets a and b with their union, placed at the position of the smaller index.
Partition merge_subsets(const Partition& p, std::size_t a, std::size_t b);

}  // namespace relumip
