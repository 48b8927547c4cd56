#include "relumip/encoding.hpp"

#include <cmath>

#include "relumip/error.hpp"

namespace relumip {

Formulation parse_formulation(const std::string& name)
{
    if (name == "bigm")
        return Formulation::BigM;
    if (name == "partition" || name == "partitioned")
        return Formulation::Partitioned;
    if (name == "nonlifted")
        return Formulation::NonLifted;
    if (name == "hull")
        return Formulation::ConvexHull;
    throw Error("unknown formulation \"" + name + "\" (expected bigm, partition, nonlifted or hull)");
}

std::string to_string(Formulation f)
{
    switch (f) {
    case Formulation::BigM: return "bigm";
    case Formulation::Partitioned: return "partition";
    case Formulation::NonLifted: return "nonlifted";
    case Formulation::ConvexHull: return "hull";
    }
    return "?";
}

namespace {

void require_finite(const Interval& r, const std::string& what)
{
    if (!std::isfinite(r.lo) || !std::isfinite(r.hi))
        throw Error(what + ": bounds must be finite");
}

NodeEncoding start_node(MilpModel& model, const std::vector<int>& inputs, const Eigen::Ref<const Eigen::VectorXd>& w,
                        double b, const Interval& preact, const std::string& prefix)
{
    if (static_cast<Eigen::Index>(inputs.size()) != w.size())
        throw Error(prefix + ": " + std::to_string(inputs.size()) + " inputs for " + std::to_string(w.size()) +
                    " weights");
    require_finite(preact, prefix + " preactivation");
    NodeEncoding enc;
    enc.inputs = inputs;
    enc.weights = w;
    enc.bias = b;
    enc.output = model.add_variable(prefix + "y", 0.0, std::max(0.0, preact.hi));
    enc.sigma = model.add_binary(prefix + "sigma");
    return enc;
}

LinearExpr subset_sum(const std::vector<int>& inputs, const Eigen::Ref<const Eigen::VectorXd>& w,
                      const std::vector<int>& subset)
{
    LinearExpr e;
    for (int i : subset)
        e.add(inputs[static_cast<std::size_t>(i)], w[i]);
    return e;
}

}  // namespace

std::vector<Interval> weighted_input_ranges(const Eigen::Ref<const Eigen::VectorXd>& w, const InputBox& box)
{
    std::vector<Interval> out;
    out.reserve(static_cast<std::size_t>(w.size()));
    for (Eigen::Index i = 0; i < w.size(); ++i)
        out.push_back(weighted_range(w[i], box.lower[i], box.upper[i]));
    return out;
}

LinearExpr affine_expr(const std::vector<int>& vars, const Eigen::Ref<const Eigen::VectorXd>& w, double b)
{
    LinearExpr e(b);
    for (std::size_t i = 0; i < vars.size(); ++i)
        e.add(vars[i], w[static_cast<Eigen::Index>(i)]);
    return e;
}

NodeEncoding encode_bigm(MilpModel& model, const std::vector<int>& inputs, const Eigen::Ref<const Eigen::VectorXd>& w,
                         double b, const NodeBounds& bounds, const std::string& prefix)
{
    NodeEncoding enc = start_node(model, inputs, w, b, bounds.preact, prefix);
    const double lb = bounds.preact.lo, ub = bounds.preact.hi;
    const LinearExpr wx = affine_expr(inputs, w, 0.0);

    // y >= w^T x + b
    enc.rows.push_back(model.add_constraint(LinearExpr().add(enc.output, 1.0).add(wx, -1.0), RowSense::GreaterEqual, b,
                                            prefix + "lin"));
    // y <= w^T x + b - (1 - sigma) LB
    enc.rows.push_back(model.add_constraint(LinearExpr().add(enc.output, 1.0).add(wx, -1.0).add(enc.sigma, -lb),
                                            RowSense::LessEqual, b - lb, prefix + "bigm_lo"));
    // y <= sigma UB
    enc.rows.push_back(model.add_constraint(LinearExpr().add(enc.output, 1.0).add(enc.sigma, -ub), RowSense::LessEqual,
                                            0.0, prefix + "bigm_up"));
    return enc;
}

NodeEncoding encode_partitioned(MilpModel& model, const std::vector<int>& inputs,
                                const Eigen::Ref<const Eigen::VectorXd>& w, double b, const NodeBounds& bounds,
                                const std::string& prefix)
{
    if (!bounds.partition.is_valid_for(static_cast<int>(w.size())))
        throw Error(prefix + ": partition does not cover the node inputs");
    if (bounds.inactive.size() != bounds.partition.size() || bounds.active.size() != bounds.partition.size())
        throw Error(prefix + ": partition bounds missing");

    NodeEncoding enc = start_node(model, inputs, w, b, bounds.preact, prefix);
    const int s = enc.sigma;

    // With sigma = 1 (active) z_n equals the n-th partial sum; with sigma = 0
    // every z_n vanishes and the full sum is pushed below -b.
    LinearExpr sum_z;
    for (std::size_t n = 0; n < bounds.partition.size(); ++n) {
        const auto& subset = bounds.partition.subsets[n];
        if (subset.empty())
            continue;
        const Interval off = bounds.inactive[n], on = bounds.active[n];
        require_finite(off, prefix + " partition");
        require_finite(on, prefix + " partition");
        const std::string tag = prefix + "p" + std::to_string(enc.partition_slacks.size());
        const int z = model.add_variable(tag + "_z", std::min(0.0, on.lo), std::max(0.0, on.hi));
        enc.partition_slacks.push_back(z);
        sum_z.add(z, 1.0);

        const LinearExpr part = subset_sum(inputs, w, subset);
        // (1 - sigma) LB_off <= sum_{S_n} w x - z_n <= (1 - sigma) UB_off
        enc.rows.push_back(model.add_constraint(LinearExpr().add(part).add(z, -1.0).add(s, off.lo),
                                                RowSense::GreaterEqual, off.lo, tag + "_off_lo"));
        enc.rows.push_back(model.add_constraint(LinearExpr().add(part).add(z, -1.0).add(s, off.hi),
                                                RowSense::LessEqual, off.hi, tag + "_off_up"));
        // sigma LB_on <= z_n <= sigma UB_on
        enc.rows.push_back(model.add_constraint(LinearExpr().add(z, 1.0).add(s, -on.lo), RowSense::GreaterEqual, 0.0,
                                                tag + "_on_lo"));
        enc.rows.push_back(model.add_constraint(LinearExpr().add(z, 1.0).add(s, -on.hi), RowSense::LessEqual, 0.0,
                                                tag + "_on_up"));
    }

    const LinearExpr wx = affine_expr(inputs, w, 0.0);
    // sum_n (sum_{S_n} w x - z_n) + (1 - sigma) b <= 0
    enc.rows.push_back(model.add_constraint(LinearExpr().add(wx).add(sum_z, -1.0).add(s, -b), RowSense::LessEqual, -b,
                                            prefix + "off"));
    // sum_n z_n + sigma b >= 0
    enc.rows.push_back(
        model.add_constraint(LinearExpr().add(sum_z).add(s, b), RowSense::GreaterEqual, 0.0, prefix + "on"));
    // y = sum_n z_n + sigma b
    enc.rows.push_back(model.add_constraint(LinearExpr().add(enc.output, 1.0).add(sum_z, -1.0).add(s, -b),
                                            RowSense::Equal, 0.0, prefix + "out"));
    return enc;
}

NodeEncoding encode_nonlifted(MilpModel& model, const std::vector<int>& inputs,
                              const Eigen::Ref<const Eigen::VectorXd>& w, double b, const Partition& partition,
                              const std::vector<Interval>& input_terms, const Interval& preact,
                              const std::string& prefix, int max_partitions)
{
    const Partition parts = partition.without_empty();
    if (!parts.is_valid_for(static_cast<int>(w.size())))
        throw Error(prefix + ": partition does not cover the node inputs");
    if (static_cast<int>(parts.size()) > max_partitions)
        throw Error(prefix + ": " + std::to_string(parts.size()) + " partitions exceed the non-lifted limit of " +
                    std::to_string(max_partitions) + "; use the lifted partition formulation");
    if (static_cast<Eigen::Index>(input_terms.size()) != w.size())
        throw Error(prefix + ": per-input bounds missing");
    for (const auto& r : input_terms)
        require_finite(r, prefix + " input");

    NodeEncoding enc = start_node(model, inputs, w, b, preact, prefix);
    enc.input_terms = input_terms;
    const int s = enc.sigma;
    const LinearExpr wx = affine_expr(inputs, w, 0.0);

    enc.rows.push_back(model.add_constraint(LinearExpr().add(enc.output, 1.0).add(wx, -1.0), RowSense::GreaterEqual, b,
                                            prefix + "lin"));
    enc.rows.push_back(model.add_constraint(LinearExpr().add(enc.output, 1.0).add(s, -preact.hi), RowSense::LessEqual,
                                            0.0, prefix + "up"));

    const std::size_t count = std::size_t{1} << parts.size();
    for (std::size_t mask = 0; mask < count; ++mask) {
        // y <= sum_{I} w x + sigma (b + sum_{not I} UB + sum_{I} LB) - sum_{I} LB
        LinearExpr row;
        row.add(enc.output, 1.0);
        double coef = b, lb_in = 0.0;
        for (std::size_t n = 0; n < parts.size(); ++n) {
            const bool in = (mask >> n) & 1U;
            for (int i : parts.subsets[n]) {
                const Interval r = input_terms[static_cast<std::size_t>(i)];
                if (in) {
                    row.add(inputs[static_cast<std::size_t>(i)], -w[i]);
                    coef += r.lo;
                    lb_in += r.lo;
                } else {
                    coef += r.hi;
                }
            }
        }
        row.add(s, -coef);
        enc.rows.push_back(model.add_constraint(row, RowSense::LessEqual, -lb_in, prefix + "I" + std::to_string(mask)));
    }
    return enc;
}

NodeEncoding encode_convex_hull(MilpModel& model, const std::vector<int>& inputs,
                                const Eigen::Ref<const Eigen::VectorXd>& w, double b,
                                const std::vector<Interval>& input_terms, const Interval& preact,
                                const std::string& prefix)
{
    if (static_cast<Eigen::Index>(input_terms.size()) != w.size())
        throw Error(prefix + ": per-input bounds missing");
    NodeBounds nb;
    nb.preact = preact;
    nb.partition = Partition::singletons(static_cast<int>(w.size()));
    nb.inactive = input_terms;
    nb.active = input_terms;
    NodeEncoding enc = encode_partitioned(model, inputs, w, b, nb, prefix);
    enc.input_terms = input_terms;
    return enc;
}

std::vector<int> add_l1_ball(MilpModel& model, const std::vector<int>& x, const Eigen::Ref<const Eigen::VectorXd>& center,
                             double radius, int radius_var)
{
    if (static_cast<Eigen::Index>(x.size()) != center.size())
        throw Error("l1 ball: center has the wrong dimension");
    std::vector<int> d;
    LinearExpr total;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const Variable& xi = model.variable(x[i]);
        const double c = center[static_cast<Eigen::Index>(i)];
        const double reach = std::max(std::abs(xi.upper - c), std::abs(xi.lower - c));
        const int di = model.add_variable("d" + std::to_string(i), 0.0, reach);
        d.push_back(di);
        model.add_constraint(LinearExpr().add(di, 1.0).add(x[i], -1.0), RowSense::GreaterEqual, -c,
                             "abs" + std::to_string(i) + "_up");
        model.add_constraint(LinearExpr().add(di, 1.0).add(x[i], 1.0), RowSense::GreaterEqual, c,
                             "abs" + std::to_string(i) + "_lo");
        total.add(di, 1.0);
    }
    if (radius_var >= 0)
        model.add_constraint(LinearExpr().add(total).add(radius_var, -1.0), RowSense::LessEqual, 0.0, "l1_ball");
    else
        model.add_constraint(total, RowSense::LessEqual, radius, "l1_ball");
    return d;
}

std::vector<int> NetworkEncoding::binaries() const
{
    std::vector<int> out;
    for (const auto& n : nodes)
        if (n.sigma >= 0)
            out.push_back(n.sigma);
    return out;
}

NetworkEncoding encode_network(const NeuralNet& net, const BoundsTable& bounds, const EncodingOptions& options,
                               const std::optional<L1Ball>& ball)
{
    const std::size_t depth = options.num_layers == 0 ? net.num_layers() : options.num_layers;
    if (depth > net.num_layers())
        throw Error("encode: asked for " + std::to_string(depth) + " layers of a " +
                    std::to_string(net.num_layers()) + "-layer network");
    if (bounds.layers.size() < std::min(depth, net.num_layers() - 1))
        throw Error("encode: bounds table is missing layers");

    NetworkEncoding out;
    MilpModel& m = out.model;
    const InputBox& box = bounds.input_box;
    for (Eigen::Index i = 0; i < net.input_dim(); ++i)
        out.inputs.push_back(m.add_variable("x" + std::to_string(i), box.lower[i], box.upper[i]));
    if (ball)
        add_l1_ball(m, out.inputs, ball->center, ball->radius);

    std::vector<int> prev = out.inputs;
    for (std::size_t l = 0; l < depth; ++l) {
        const DenseLayer& layer = net.layer(l);
        std::vector<int> vars;
        if (layer.activation == Activation::Linear) {
            for (Eigen::Index k = 0; k < layer.size(); ++k) {
                const int f = m.add_variable("f" + std::to_string(k), -kInf, kInf);
                m.add_constraint(LinearExpr().add(f, 1.0).add(affine_expr(prev, layer.weights.row(k).transpose(), 0.0),
                                                              -1.0),
                                 RowSense::Equal, layer.biases[k], "f" + std::to_string(k) + "_def");
                vars.push_back(f);
            }
            out.layer_vars.push_back(std::move(vars));
            prev = out.layer_vars.back();
            continue;
        }

        const InputBox in_box = bounds.layer_input_box(l);
        for (Eigen::Index j = 0; j < layer.size(); ++j) {
            const NodeBounds& nb = bounds.layers[l][static_cast<std::size_t>(j)];
            const Eigen::VectorXd w = layer.weights.row(j).transpose();
            const double b = layer.biases[j];
            const std::string prefix = "h" + std::to_string(l) + "_" + std::to_string(j) + "_";

            if (options.stabilize && nb.stable()) {
                NodeEncoding enc;
                if (nb.stable_inactive()) {
                    enc.output = m.add_variable(prefix + "y", 0.0, 0.0);
                } else {
                    enc.output = m.add_variable(prefix + "y", nb.preact.lo, nb.preact.hi);
                    enc.rows.push_back(m.add_constraint(
                        LinearExpr().add(enc.output, 1.0).add(affine_expr(prev, w, 0.0), -1.0), RowSense::Equal, b,
                        prefix + "lin"));
                }
                enc.layer = l;
                enc.node = static_cast<std::size_t>(j);
                vars.push_back(enc.output);
                out.nodes.push_back(std::move(enc));
                continue;
            }

            const std::vector<Interval> terms = weighted_input_ranges(w, in_box);
            NodeEncoding enc;
            switch (options.formulation) {
            case Formulation::BigM: enc = encode_bigm(m, prev, w, b, nb, prefix); break;
            case Formulation::Partitioned: enc = encode_partitioned(m, prev, w, b, nb, prefix); break;
            case Formulation::NonLifted:
                enc = encode_nonlifted(m, prev, w, b, nb.partition, terms, nb.preact, prefix, options.nonlifted_cap);
                break;
            case Formulation::ConvexHull: enc = encode_convex_hull(m, prev, w, b, terms, nb.preact, prefix); break;
            }
            enc.input_terms = terms;
            enc.layer = l;
            enc.node = static_cast<std::size_t>(j);
            vars.push_back(enc.output);
            out.nodes.push_back(std::move(enc));
        }
        out.layer_vars.push_back(std::move(vars));
        prev = out.layer_vars.back();
    }
    return out;
}

}  // namespace relumip
