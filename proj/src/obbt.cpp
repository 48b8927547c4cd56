#include "relumip/obbt.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <mutex>
#include <thread>

#include "relumip/error.hpp"

namespace relumip {

ObbtMode parse_obbt_mode(const std::string& name)
{
    if (name == "interval")
        return ObbtMode::Interval;
    if (name == "2n2")
        return ObbtMode::Shared2N2;
    if (name == "4n")
        return ObbtMode::Split4N;
    throw Error("unknown OBBT mode \"" + name + "\" (expected interval, 2n2 or 4n)");
}

std::string to_string(ObbtMode m)
{
    switch (m) {
    case ObbtMode::Interval: return "interval";
    case ObbtMode::Shared2N2: return "2n2";
    case ObbtMode::Split4N: return "4n";
    }
    return "?";
}

namespace {

// LP optima carry feasibility/optimality error; widen before intersecting so
// the result stays sound.
double widen_lo(double v) { return v - 1e-6 * (1.0 + std::abs(v)); }
double widen_hi(double v) { return v + 1e-6 * (1.0 + std::abs(v)); }

struct Range
{
    Interval value{-kInf, kInf};
    bool ok_lo = false, ok_hi = false;
    bool infeasible = false;
};

Range lp_range(LpSolver& lp, const std::vector<Term>& obj, const LpLimits& limits, ObbtStats& stats)
{
    Range r;
    for (ObjSense sense : {ObjSense::Minimize, ObjSense::Maximize}) {
        lp.set_objective(sense, obj);
        const LpResult res = lp.solve(limits);
        ++stats.lps;
        if (res.status == LpStatus::Infeasible) {
            r.infeasible = true;
            return r;
        }
        if (res.status != LpStatus::Optimal) {
            ++stats.fallbacks;
            lp.reset_basis();
            continue;
        }
        if (sense == ObjSense::Minimize) {
            r.value.lo = widen_lo(res.objective);
            r.ok_lo = true;
        } else {
            r.value.hi = widen_hi(res.objective);
            r.ok_hi = true;
        }
    }
    return r;
}

std::vector<Term> sum_terms(const std::vector<int>& vars, const Eigen::Ref<const Eigen::VectorXd>& w,
                            const std::vector<int>& subset)
{
    std::vector<Term> t;
    for (int i : subset)
        if (w[i] != 0.0)
            t.emplace_back(vars[static_cast<std::size_t>(i)], w[i]);
    return t;
}

Interval tightened(const Interval& current, const Range& r)
{
    const Interval out = current.intersect(r.value);
    return out.lo <= out.hi ? out : current;  // crossed only through round-off
}

BoundSource source_of(const Range& r) { return r.ok_lo && r.ok_hi ? BoundSource::Obbt : BoundSource::ObbtFallback; }

}  // namespace

PrefixRelaxation build_prefix(const NeuralNet& net, const BoundsTable& table, std::size_t layer,
                              const ObbtOptions& options)
{
    EncodingOptions enc;
    enc.formulation = options.formulation;
    enc.stabilize = options.stabilize;
    enc.num_layers = layer;
    NetworkEncoding prefix = encode_network(net, table, enc, options.ball);
    std::vector<int> inputs = layer == 0 ? prefix.inputs : prefix.layer_vars[layer - 1];
    LpSolver solver(prefix.model, true);
    solver.set_objective(ObjSense::Minimize, {});
    LpLimits limits;
    limits.max_iterations = options.lp_iteration_limit;
    solver.solve(limits);  // feasible starting basis shared by all node LPs
    return {std::move(prefix), std::move(inputs), std::move(solver)};
}

NodeBounds tighten_node(const PrefixRelaxation& prefix, const Eigen::Ref<const Eigen::VectorXd>& w, double b,
                        const NodeBounds& current, bool hidden, const ObbtOptions& options, ObbtStats* stats)
{
    ObbtStats local;
    ObbtStats& st = stats ? *stats : local;
    LpLimits limits;
    limits.max_iterations = options.lp_iteration_limit;
    limits.time_limit = options.lp_time_limit;

    NodeBounds out = current;
    LpSolver lp = prefix.solver;
    const std::vector<int>& vars = prefix.layer_inputs;
    std::vector<int> all(vars.size());
    for (std::size_t i = 0; i < all.size(); ++i)
        all[i] = static_cast<int>(i);
    const std::vector<Term> wx = sum_terms(vars, w, all);

    Range pre = lp_range(lp, wx, limits, st);
    if (pre.infeasible) {
        ++st.fallbacks;
        out.preact_source = BoundSource::ObbtFallback;
        return out;
    }
    pre.value = {pre.value.lo + b, pre.value.hi + b};
    out.preact = tightened(current.preact, pre);
    out.preact_source = source_of(pre);
    if (!hidden || options.mode == ObbtMode::Interval)
        return out;

    const auto& subsets = out.partition.subsets;
    std::size_t nonempty = 0;
    for (const auto& s : subsets)
        nonempty += s.empty() ? 0 : 1;
    for (std::size_t n = 0; n < subsets.size(); ++n) {
        if (subsets[n].empty())
            continue;
        Range r;
        if (nonempty == 1) {
            // the single subset is the whole preactivation
            r = pre;
            r.value = {pre.value.lo - b, pre.value.hi - b};
        } else {
            r = lp_range(lp, sum_terms(vars, w, subsets[n]), limits, st);
        }
        out.inactive[n] = tightened(current.inactive[n], r);
        out.active[n] = tightened(current.active[n], r);
        out.partition_source[n] = source_of(r);
    }
    if (options.mode != ObbtMode::Split4N)
        return out;

    const int row = lp.add_row(wx, -kInf, kInf);
    for (int side = 0; side < 2; ++side) {
        const bool inactive = side == 0;
        if (inactive)
            lp.set_row_bounds(row, -kInf, -b);
        else
            lp.set_row_bounds(row, -b, kInf);
        for (std::size_t n = 0; n < subsets.size(); ++n) {
            if (subsets[n].empty())
                continue;
            const Range r = lp_range(lp, sum_terms(vars, w, subsets[n]), limits, st);
            if (r.infeasible) {
                // this side cannot occur: the node is stable on the other one
                ++st.infeasible_sides;
                if (inactive)
                    out.preact.lo = std::max(out.preact.lo, 0.0);
                else
                    out.preact.hi = std::min(out.preact.hi, 0.0);
                break;
            }
            Interval& target = inactive ? out.inactive[n] : out.active[n];
            target = tightened(target, r);
            if (source_of(r) == BoundSource::ObbtFallback)
                out.partition_source[n] = BoundSource::ObbtFallback;
        }
    }
    return out;
}

namespace {

/// Interval bounds of layer l from the (already final) previous layers,
/// intersected with what the table holds.
void refresh_layer(const NeuralNet& net, BoundsTable& table, std::size_t l)
{
    const InputBox in = table.layer_input_box(l);
    const DenseLayer& layer = net.layer(l);
    for (Eigen::Index j = 0; j < layer.size(); ++j) {
        NodeBounds& nb = table.layers[l][static_cast<std::size_t>(j)];
        const auto w = layer.weights.row(j).transpose();
        nb.preact = nb.preact.intersect(node_interval(w, layer.biases[j], in));
        for (std::size_t n = 0; n < nb.partition.size(); ++n) {
            const Interval r = partition_interval(w, nb.partition.subsets[n], in);
            nb.inactive[n] = nb.inactive[n].intersect(r);
            nb.active[n] = nb.active[n].intersect(r);
        }
    }
}

}  // namespace

BoundsTable tighten_table(const NeuralNet& net, const BoundsTable& table, const ObbtOptions& options,
                          ObbtStats* stats)
{
    const auto start = std::chrono::steady_clock::now();
    ObbtStats total;
    BoundsTable out = table;
    for (std::size_t l = 0; l < net.num_layers(); ++l) {
        refresh_layer(net, out, l);
        if (options.mode == ObbtMode::Interval)
            continue;
        const PrefixRelaxation prefix = build_prefix(net, out, l, options);
        const DenseLayer& layer = net.layer(l);
        const bool hidden = l + 1 < net.num_layers();
        const auto count = static_cast<std::size_t>(layer.size());
        std::vector<NodeBounds> result(count);
        std::vector<ObbtStats> node_stats(count);
        std::atomic<std::size_t> next{0};
        auto worker = [&] {
            for (std::size_t j = next++; j < count; j = next++) {
                const auto jj = static_cast<Eigen::Index>(j);
                result[j] = tighten_node(prefix, layer.weights.row(jj).transpose(), layer.biases[jj], out.layers[l][j],
                                         hidden, options, &node_stats[j]);
            }
        };
        const int threads = std::max(1, std::min<int>(options.jobs, static_cast<int>(count)));
        if (threads == 1) {
            worker();
        } else {
            std::vector<std::thread> pool;
            for (int t = 0; t < threads; ++t)
                pool.emplace_back(worker);
            for (auto& t : pool)
                t.join();
        }
        // layer barrier: the whole layer is committed at once
        out.layers[l] = std::move(result);
        for (const auto& s : node_stats) {
            total.lps += s.lps;
            total.fallbacks += s.fallbacks;
            total.infeasible_sides += s.infeasible_sides;
        }
    }
    total.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (stats)
        *stats = total;
    return out;
}

BoundsTable run_obbt(const NeuralNet& net, const InputBox& box, const PartitionPlan& plan, const ObbtOptions& options,
                     ObbtStats* stats)
{
    return tighten_table(net, propagate(net, box, plan), options, stats);
}

}  // namespace relumip
