#include "relumip/cuts.hpp"

#include <iostream>

namespace relumip {

double hull_violation(const Eigen::Ref<const Eigen::VectorXd>& w, double b, const std::vector<Interval>& terms,
                      const std::vector<int>& subset, const Eigen::Ref<const Eigen::VectorXd>& x, double sigma,
                      double y)
{
    std::vector<bool> in(terms.size(), false);
    for (int i : subset)
        in[static_cast<std::size_t>(i)] = true;
    double rhs = sigma * b;
    for (std::size_t i = 0; i < terms.size(); ++i) {
        const auto k = static_cast<Eigen::Index>(i);
        rhs += in[i] ? w[k] * x[k] - (1.0 - sigma) * terms[i].lo : sigma * terms[i].hi;
    }
    return y - rhs;
}

std::optional<HullInequality> separate_most_violated(const Eigen::Ref<const Eigen::VectorXd>& w, double b,
                                                     const std::vector<Interval>& terms,
                                                     const Eigen::Ref<const Eigen::VectorXd>& x, double sigma,
                                                     double y, double tol)
{
    // Each input contributes independently to the right-hand side, so keeping
    // exactly the inputs whose kept contribution is smaller minimizes it.
    HullInequality cut;
    double rhs = sigma * b;
    for (std::size_t i = 0; i < terms.size(); ++i) {
        const auto k = static_cast<Eigen::Index>(i);
        const double kept = w[k] * x[k] - (1.0 - sigma) * terms[i].lo;
        const double dropped = sigma * terms[i].hi;
        if (kept < dropped) {
            cut.subset.push_back(static_cast<int>(i));
            rhs += kept;
        } else {
            rhs += dropped;
        }
    }
    cut.violation = y - rhs;
    if (cut.violation <= tol)
        return std::nullopt;
    return cut;
}

Constraint hull_constraint(const NodeEncoding& node, const std::vector<int>& subset)
{
    std::vector<bool> in(node.input_terms.size(), false);
    for (int i : subset)
        in[static_cast<std::size_t>(i)] = true;
    LinearExpr row;
    row.add(node.output, 1.0);
    double coef = node.bias, lb_in = 0.0;
    for (std::size_t i = 0; i < node.input_terms.size(); ++i) {
        if (in[i]) {
            row.add(node.inputs[i], -node.weights[static_cast<Eigen::Index>(i)]);
            coef += node.input_terms[i].lo;
            lb_in += node.input_terms[i].lo;
        } else {
            coef += node.input_terms[i].hi;
        }
    }
    row.add(node.sigma, -coef);
    Constraint c;
    c.terms = row.canonical_terms();
    c.sense = RowSense::LessEqual;
    c.rhs = -lb_in;
    c.name = "cut_h" + std::to_string(node.layer) + "_" + std::to_string(node.node);
    return c;
}

std::vector<Constraint> separate_round(const std::vector<NodeEncoding>& nodes,
                                       const Eigen::Ref<const Eigen::VectorXd>& point, double tol)
{
    std::vector<Constraint> cuts;
    for (const NodeEncoding& n : nodes) {
        if (n.sigma < 0 || n.input_terms.empty())
            continue;
        Eigen::VectorXd x(static_cast<Eigen::Index>(n.inputs.size()));
        for (std::size_t i = 0; i < n.inputs.size(); ++i)
            x[static_cast<Eigen::Index>(i)] = point[n.inputs[i]];
        const auto cut = separate_most_violated(n.weights, n.bias, n.input_terms, x, point[n.sigma], point[n.output], tol);
        if (cut)
            cuts.push_back(hull_constraint(n, cut->subset));
    }
    return cuts;
}

int add_root_cuts(MilpModel& model, const std::vector<NodeEncoding>& nodes, const LpLimits& limits)
{
    const LpResult root = solve_lp(model, true, nullptr, limits);
    if (root.status != LpStatus::Optimal) {
        std::cerr << "warning: root LP ended with status " << to_string(root.status) << "; no cuts added\n";
        return 0;
    }
    const auto cuts = separate_round(nodes, root.point);
    for (const auto& c : cuts)
        model.add_constraint(c);
    return static_cast<int>(cuts.size());
}

}  // namespace relumip
