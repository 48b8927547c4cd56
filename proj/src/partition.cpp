#include "relumip/partition.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "relumip/error.hpp"
#include "relumip/network.hpp"

namespace relumip {

namespace {

void require_positive(int num_partitions, const char* who)
{
    if (num_partitions <= 0)
        throw Error(std::string(who) + ": number of partitions must be >= 1, got " + std::to_string(num_partitions));
}

std::vector<int> stable_argsort(const Eigen::Ref<const Eigen::VectorXd>& w, bool descending)
{
    std::vector<int> order(static_cast<std::size_t>(w.size()));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return descending ? w[a] > w[b] : w[a] < w[b]; });
    return order;
}

std::uint64_t splitmix64(std::uint64_t x)
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

}  // namespace

bool Partition::is_valid_for(int eta) const
{
    std::vector<int> seen(static_cast<std::size_t>(std::max(eta, 0)), 0);
    for (const auto& s : subsets)
        for (int i : s) {
            if (i < 0 || i >= eta || seen[static_cast<std::size_t>(i)]++)
                return false;
        }
    return std::all_of(seen.begin(), seen.end(), [](int c) { return c == 1; });
}

Partition Partition::without_empty() const
{
    Partition out;
    for (const auto& s : subsets)
        if (!s.empty())
            out.subsets.push_back(s);
    return out;
}

Partition Partition::single(int eta)
{
    Partition p;
    p.subsets.emplace_back(static_cast<std::size_t>(eta));
    std::iota(p.subsets[0].begin(), p.subsets[0].end(), 0);
    return p;
}

Partition Partition::singletons(int eta)
{
    Partition p;
    for (int i = 0; i < eta; ++i)
        p.subsets.push_back({i});
    return p;
}

Strategy parse_strategy(const std::string& name)
{
    if (name == "equal-size")
        return Strategy::EqualSize;
    if (name == "equal-range")
        return Strategy::EqualRange;
    if (name == "random")
        return Strategy::Random;
    if (name == "uneven")
        return Strategy::UnevenMagnitudes;
    throw Error("unknown partition strategy \"" + name + "\" (expected equal-size, equal-range, random, uneven)");
}

std::string to_string(Strategy s)
{
    switch (s) {
    case Strategy::EqualSize: return "equal-size";
    case Strategy::EqualRange: return "equal-range";
    case Strategy::Random: return "random";
    case Strategy::UnevenMagnitudes: return "uneven";
    }
    return "?";
}

Partition equal_size(const Eigen::Ref<const Eigen::VectorXd>& w, int num_partitions)
{
    require_positive(num_partitions, "equal_size");
    const std::vector<int> order = stable_argsort(w, false);
    const auto eta = order.size();
    const auto n = static_cast<std::size_t>(num_partitions);
    // array_split: the first (eta mod n) chunks get one extra element.
    const std::size_t base = eta / n, extra = eta % n;
    Partition p;
    p.subsets.resize(n);
    std::size_t pos = 0;
    for (std::size_t k = 0; k < n; ++k) {
        const std::size_t len = base + (k < extra ? 1 : 0);
        p.subsets[k].assign(order.begin() + static_cast<std::ptrdiff_t>(pos),
                            order.begin() + static_cast<std::ptrdiff_t>(pos + len));
        pos += len;
    }
    return p;
}

double quantile(const Eigen::Ref<const Eigen::VectorXd>& values, double q)
{
    if (values.size() == 0)
        throw Error("quantile of an empty vector");
    std::vector<double> sorted(values.data(), values.data() + values.size());
    std::sort(sorted.begin(), sorted.end());
    const double pos = q * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

Partition equal_range(const Eigen::Ref<const Eigen::VectorXd>& w, int num_partitions, double quantile_lo,
                      double quantile_hi)
{
    if (num_partitions < 3)
        throw Error("equal_range requires N >= 3, got " + std::to_string(num_partitions));
    const auto n = static_cast<std::size_t>(num_partitions);
    Partition p;
    p.subsets.resize(n);
    if (w.size() == 0)
        return p;

    // thresholds v_0..v_N; v_1..v_{N-1} evenly spaced between the clip quantiles
    std::vector<double> v(n + 1);
    v[0] = w.minCoeff();
    v[n] = w.maxCoeff();
    const double q_lo = quantile(w, quantile_lo), q_hi = quantile(w, quantile_hi);
    for (std::size_t k = 1; k < n; ++k)
        v[k] = q_lo + (q_hi - q_lo) * static_cast<double>(k - 1) / static_cast<double>(n - 2);

    for (int i = 0; i < static_cast<int>(w.size()); ++i) {
        std::size_t bin = n - 1;
        for (std::size_t k = 0; k + 1 < n; ++k)
            if (w[i] >= v[k] && w[i] < v[k + 1]) {
                bin = k;
                break;
            }
        p.subsets[bin].push_back(i);
    }
    return p;
}

Partition random_partition(int eta, int num_partitions, std::uint64_t seed)
{
    require_positive(num_partitions, "random_partition");
    std::mt19937_64 rng(seed);
    Partition p;
    p.subsets.resize(static_cast<std::size_t>(num_partitions));
    for (int i = 0; i < eta; ++i)
        p.subsets[rng() % static_cast<std::uint64_t>(num_partitions)].push_back(i);
    return p;
}

Partition uneven_magnitudes(const Eigen::Ref<const Eigen::VectorXd>& w, int num_partitions, bool descending)
{
    require_positive(num_partitions, "uneven_magnitudes");
    const std::vector<int> order = stable_argsort(w, descending);
    const auto n = static_cast<std::size_t>(num_partitions);
    Partition p;
    p.subsets.resize(n);
    for (std::size_t r = 0; r < order.size(); ++r) {
        const std::size_t round = r / n, slot = r % n;
        const std::size_t target = (round % 2 == 0) ? slot : n - 1 - slot;
        p.subsets[target].push_back(order[r]);
    }
    return p;
}

Partition make_partition(const Eigen::Ref<const Eigen::VectorXd>& w, const StrategyConfig& config,
                         std::uint64_t node_key)
{
    switch (config.strategy) {
    case Strategy::EqualSize: return equal_size(w, config.num_partitions);
    case Strategy::EqualRange:
        return equal_range(w, config.num_partitions, config.quantile_lo, config.quantile_hi);
    case Strategy::Random:
        return random_partition(static_cast<int>(w.size()), config.num_partitions,
                                splitmix64(config.seed ^ splitmix64(node_key)));
    case Strategy::UnevenMagnitudes:
        return uneven_magnitudes(w, config.num_partitions, config.uneven_descending);
    }
    throw Error("make_partition: unknown strategy");
}

PartitionPlan make_partition_plan(const NeuralNet& net, const StrategyConfig& config)
{
    PartitionPlan plan;
    for (std::size_t l = 0; l + 1 < net.num_layers(); ++l) {
        const DenseLayer& layer = net.layer(l);
        std::vector<Partition> nodes;
        for (Eigen::Index j = 0; j < layer.size(); ++j) {
            const std::uint64_t key = (static_cast<std::uint64_t>(l) << 32) | static_cast<std::uint64_t>(j);
            nodes.push_back(make_partition(layer.weights.row(j).transpose(), config, key));
        }
        plan.push_back(std::move(nodes));
    }
    return plan;
}

Partition merge_subsets(const Partition& p, std::size_t a, std::size_t b)
{
    if (a == b || a >= p.size() || b >= p.size())
        throw Error("merge_subsets: invalid subset indices");
    if (a > b)
        std::swap(a, b);
    Partition out = p;
    auto& target = out.subsets[a];
    target.insert(target.end(), p.subsets[b].begin(), p.subsets[b].end());
    std::sort(target.begin(), target.end());
    out.subsets.erase(out.subsets.begin() + static_cast<std::ptrdiff_t>(b));
    return out;
}

}  // namespace relumip
