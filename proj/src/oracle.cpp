#include "relumip/oracle.hpp"

#include <bit>

#include "relumip/error.hpp"

namespace relumip {

namespace {

struct PatternNode
{
    std::size_t layer, node;
    int y, def_row, pre_row;
    double b;
};

void set_phase(LpSolver& lp, const PatternNode& n, bool active)
{
    if (active) {
        lp.set_bounds(n.y, 0.0, kInf);
        lp.set_row_bounds(n.def_row, n.b, n.b);
        lp.set_row_bounds(n.pre_row, -n.b, kInf);
    } else {
        lp.set_bounds(n.y, 0.0, 0.0);
        lp.set_row_bounds(n.def_row, -kInf, kInf);
        lp.set_row_bounds(n.pre_row, -kInf, -n.b);
    }
}

}  // namespace

OracleResult enumerate_optimum(const NeuralNet& net, const BoundsTable& bounds, const TaskHook& task,
                               const OracleOptions& options)
{
    MilpModel m;
    std::vector<int> inputs;
    for (Eigen::Index i = 0; i < net.input_dim(); ++i)
        inputs.push_back(m.add_variable("x" + std::to_string(i), bounds.input_box.lower[i], bounds.input_box.upper[i]));

    std::vector<PatternNode> nodes;
    std::vector<int> prev = inputs;
    std::vector<int> outputs;
    for (std::size_t l = 0; l < net.num_layers(); ++l) {
        const DenseLayer& layer = net.layer(l);
        std::vector<int> vars;
        for (Eigen::Index j = 0; j < layer.size(); ++j) {
            LinearExpr wx;
            for (std::size_t i = 0; i < prev.size(); ++i)
                wx.add(prev[i], layer.weights(j, static_cast<Eigen::Index>(i)));
            if (layer.activation == Activation::Linear) {
                const int f = m.add_variable("f" + std::to_string(j), -kInf, kInf);
                m.add_constraint(LinearExpr().add(f, 1.0).add(wx, -1.0), RowSense::Equal, layer.biases[j], "");
                vars.push_back(f);
                continue;
            }
            PatternNode n{l, static_cast<std::size_t>(j), 0, 0, 0, layer.biases[j]};
            n.y = m.add_variable("y", 0.0, kInf);
            n.def_row = m.add_constraint(LinearExpr().add(n.y, 1.0).add(wx, -1.0), RowSense::GreaterEqual, 0.0, "");
            n.pre_row = m.add_constraint(wx, RowSense::GreaterEqual, 0.0, "");
            nodes.push_back(n);
            vars.push_back(n.y);
        }
        prev = vars;
        if (layer.activation == Activation::Linear)
            outputs = vars;
    }
    task(m, inputs, outputs);

    LpSolver lp(m, false);
    OracleResult result;
    result.pattern.resize(net.num_layers() - 1);
    for (std::size_t l = 0; l + 1 < net.num_layers(); ++l)
        result.pattern[l].assign(static_cast<std::size_t>(net.layer(l).size()), false);

    std::vector<std::size_t> free_nodes;
    std::vector<bool> phase(nodes.size(), false);
    for (std::size_t k = 0; k < nodes.size(); ++k) {
        const NodeBounds& nb = bounds.layers[nodes[k].layer][nodes[k].node];
        if (options.prune_stable && nb.stable()) {
            phase[k] = !nb.stable_inactive();
        } else {
            free_nodes.push_back(k);
        }
        set_phase(lp, nodes[k], phase[k]);
    }
    if (static_cast<int>(free_nodes.size()) > options.max_unstable)
        throw Refused("oracle: " + std::to_string(free_nodes.size()) + " unstable nodes exceed the limit of " +
                      std::to_string(options.max_unstable));
    result.enumerated_nodes = static_cast<int>(free_nodes.size());

    const bool maximize = m.objective().sense == ObjSense::Maximize;
    const long total = 1L << free_nodes.size();
    for (long i = 0; i < total; ++i) {
        if (i > 0) {
            const auto k = free_nodes[static_cast<std::size_t>(std::countr_zero(static_cast<unsigned long>(i)))];
            phase[k] = !phase[k];
            set_phase(lp, nodes[k], phase[k]);
        }
        ++result.patterns;
        LpResult r = lp.solve(options.lp);
        if (r.status == LpStatus::IterationLimit) {
            lp.reset_basis();
            r = lp.solve(options.lp);
        }
        if (r.status == LpStatus::Infeasible) {
            ++result.infeasible_patterns;
            continue;
        }
        if (r.status == LpStatus::Unbounded)
            throw Error("oracle: pattern LP is unbounded; the task objective needs bounded inputs");
        if (r.status != LpStatus::Optimal)
            throw Error("oracle: pattern LP hit the iteration limit");
        const bool better = !result.feasible || (maximize ? r.objective > result.value : r.objective < result.value);
        if (better) {
            result.feasible = true;
            result.value = r.objective;
            result.input.resize(net.input_dim());
            for (std::size_t q = 0; q < inputs.size(); ++q)
                result.input[static_cast<Eigen::Index>(q)] = r.point[inputs[q]];
            for (std::size_t k = 0; k < nodes.size(); ++k)
                result.pattern[nodes[k].layer][nodes[k].node] = phase[k];
        }
    }
    return result;
}

double relaxation_value(const MilpModel& model, const LpLimits& limits)
{
    const LpResult r = solve_lp(model, true, nullptr, limits);
    if (r.status != LpStatus::Optimal)
        throw Error(std::string("relaxation: LP ended with status ") + to_string(r.status));
    return r.objective;
}

}  // namespace relumip
