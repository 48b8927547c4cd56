#include "relumip/bnb.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <memory>
#include <ostream>
#include <queue>
#include <set>
#include <unordered_set>

#include "relumip/error.hpp"

namespace relumip {

BranchRule parse_branch_rule(const std::string& name)
{
    if (name == "most-fractional")
        return BranchRule::MostFractional;
    if (name == "pseudocost")
        return BranchRule::PseudoCost;
    if (name == "strong")
        return BranchRule::Strong;
    if (name == "reliability")
        return BranchRule::Reliability;
    throw Error("unknown branching rule \"" + name + "\" (expected most-fractional, pseudocost, strong or reliability)");
}

std::string to_string(BranchRule r)
{
    switch (r) {
    case BranchRule::MostFractional: return "most-fractional";
    case BranchRule::PseudoCost: return "pseudocost";
    case BranchRule::Strong: return "strong";
    case BranchRule::Reliability: return "reliability";
    }
    return "?";
}

CutPolicy parse_cut_policy(const std::string& name)
{
    if (name == "off")
        return CutPolicy::Off;
    if (name == "root")
        return CutPolicy::RootOnly;
    if (name == "freq")
        return CutPolicy::Frequency;
    throw Error("unknown cut policy \"" + name + "\" (expected off, root or freq)");
}

std::string to_string(CutPolicy p)
{
    switch (p) {
    case CutPolicy::Off: return "off";
    case CutPolicy::RootOnly: return "root";
    case CutPolicy::Frequency: return "freq";
    }
    return "?";
}

const char* to_string(MilpStatus s)
{
    switch (s) {
    case MilpStatus::Optimal: return "optimal";
    case MilpStatus::SignDetermined: return "sign_determined";
    case MilpStatus::TimeLimit: return "time_limit";
    case MilpStatus::NodeLimit: return "node_limit";
    case MilpStatus::Infeasible: return "infeasible";
    }
    return "?";
}

namespace {

constexpr double kCutViolation = 1e-6;

struct TreeNode
{
    double bound = kInf;  // maximization form
    long seq = 0;
    std::vector<std::pair<int, double>> fixings;
    // branching that created the node, for pseudocosts
    int branch_var = -1;
    bool up = false;
    double frac = 0.0;
};

struct LowerPriority
{
    bool operator()(const TreeNode& a, const TreeNode& b) const
    {
        if (a.bound != b.bound)
            return a.bound < b.bound;
        return a.seq < b.seq;  // newest first among ties
    }
};

class Frontier
{
public:
    explicit Frontier(NodeSelection sel) : sel_(sel) {}

    bool empty() const { return sel_ == NodeSelection::BestBound ? heap_.empty() : stack_.empty(); }
    std::size_t size() const { return bounds_.size(); }
    double max_bound() const { return bounds_.empty() ? -kInf : *bounds_.rbegin(); }

    void push(TreeNode n)
    {
        bounds_.insert(n.bound);
        if (sel_ == NodeSelection::BestBound)
            heap_.push(std::move(n));
        else
            stack_.push_back(std::move(n));
    }

    TreeNode pop()
    {
        TreeNode n;
        if (sel_ == NodeSelection::BestBound) {
            n = heap_.top();
            heap_.pop();
        } else {
            n = std::move(stack_.back());
            stack_.pop_back();
        }
        bounds_.erase(bounds_.find(n.bound));
        return n;
    }

private:
    NodeSelection sel_;
    std::priority_queue<TreeNode, std::vector<TreeNode>, LowerPriority> heap_;
    std::vector<TreeNode> stack_;
    std::multiset<double> bounds_;
};

std::string cut_key(const Constraint& c)
{
    std::string key;
    char buf[64];
    for (const auto& [v, a] : c.terms) {
        std::snprintf(buf, sizeof buf, "%d:%.12g;", v, a);
        key += buf;
    }
    std::snprintf(buf, sizeof buf, "%d|%.12g", static_cast<int>(c.sense), c.rhs);
    return key + buf;
}

struct PseudoCosts
{
    std::vector<double> sum[2];
    std::vector<int> count[2];

    explicit PseudoCosts(std::size_t n)
    {
        for (int d = 0; d < 2; ++d) {
            sum[d].assign(n, 0.0);
            count[d].assign(n, 0);
        }
    }

    double estimate(std::size_t k, int d) const
    {
        if (count[d][k] > 0)
            return sum[d][k] / count[d][k];
        double s = 0.0;
        int c = 0;
        for (std::size_t q = 0; q < sum[d].size(); ++q)
            if (count[d][q] > 0) {
                s += sum[d][q] / count[d][q];
                ++c;
            }
        return c > 0 ? s / c : 1.0;
    }
};

}  // namespace

MilpResult solve_milp(const MilpModel& model, const BnbConfig& config, const CutCallback& cut_callback,
                      const PrimalHeuristic& heuristic)
{
    using clock = std::chrono::steady_clock;
    const auto start = clock::now();
    auto elapsed = [&] { return std::chrono::duration<double>(clock::now() - start).count(); };

    model.validate();
    const double sign = model.objective().sense == ObjSense::Maximize ? 1.0 : -1.0;
    std::vector<int> binaries;
    for (int v = 0; v < model.num_variables(); ++v)
        if (model.variable(v).kind == VarKind::Binary)
            binaries.push_back(v);
    std::vector<int> binary_slot(static_cast<std::size_t>(model.num_variables()), -1);
    for (std::size_t k = 0; k < binaries.size(); ++k)
        binary_slot[static_cast<std::size_t>(binaries[k])] = static_cast<int>(k);

    LpSolver lp(model, true);
    MilpResult result;
    double incumbent = -kInf;
    double pruned_by_gap = -kInf;
    std::unordered_set<std::string> seen_cuts;
    PseudoCosts pseudo(binaries.size());

    auto prune_level = [&] {
        if (!std::isfinite(incumbent))
            return -kInf;
        return incumbent + std::max(config.abs_gap, config.rel_gap * std::abs(incumbent));
    };

    Frontier open(config.node_selection);
    long seq = 0;
    {
        TreeNode root;
        root.seq = seq++;
        open.push(std::move(root));
    }

    auto log_progress = [&](const char* event) {
        if (!config.log)
            return;
        const double bound = std::max({open.max_bound(), incumbent, pruned_by_gap});
        char buf[256];
        std::snprintf(buf, sizeof buf, "event=%s nodes=%ld open=%zu incumbent=%.10g bound=%.10g cuts=%d time=%.3f\n",
                      event, result.nodes_explored, open.size(), sign * incumbent, sign * bound, result.cuts_added,
                      elapsed());
        *config.log << buf;
    };

    std::unique_ptr<LpSolver> probe;
    std::unordered_set<std::string> tried;
    auto try_fixing = [&](const std::vector<std::pair<int, double>>& fixings) {
        std::string key;
        for (const auto& [v, val] : fixings)
            key += std::to_string(v) + (val > 0.5 ? "+" : "-");
        if (fixings.empty() || !tried.insert(key).second)
            return;
        if (!probe)
            probe = std::make_unique<LpSolver>(model, true);
        for (int v : binaries)
            probe->set_bounds(v, 0.0, 1.0);
        for (const auto& [v, val] : fixings)
            probe->set_bounds(v, val, val);
        const LpResult h = probe->solve(config.lp);
        result.lp_iterations += h.iterations;
        if (h.status != LpStatus::Optimal || sign * h.objective <= incumbent)
            return;
        for (int v : binaries) {
            const double x = h.point[v];
            if (std::min(x - std::floor(x), std::ceil(x) - x) > config.integrality_tol)
                return;
        }
        incumbent = sign * h.objective;
        result.has_incumbent = true;
        result.incumbent_point = h.point;
        ++result.heuristic_solutions;
        log_progress("heuristic");
    };

    bool stopped = false;
    while (!open.empty()) {
        if (elapsed() > config.time_limit) {
            result.status = MilpStatus::TimeLimit;
            stopped = true;
            break;
        }
        if (result.nodes_explored >= config.node_limit) {
            result.status = MilpStatus::NodeLimit;
            stopped = true;
            break;
        }
        TreeNode node = open.pop();
        if (node.bound <= prune_level()) {
            pruned_by_gap = std::max(pruned_by_gap, node.bound);
            continue;
        }

        for (int v : binaries)
            lp.set_bounds(v, 0.0, 1.0);
        for (const auto& [v, val] : node.fixings)
            lp.set_bounds(v, val, val);
        // warm start from whatever basis the last solve left: refactoring the
        // dense tableau costs far more than the extra pivots
        LpResult r = lp.solve(config.lp);
        if (r.status == LpStatus::IterationLimit) {
            lp.reset_basis();
            r = lp.solve(config.lp);
        }
        result.lp_iterations += r.iterations;
        const bool is_root = result.nodes_explored == 0;
        ++result.nodes_explored;
        if (r.status == LpStatus::IterationLimit)
            throw Error("branch-and-bound: node LP hit the iteration limit twice");
        if (r.status == LpStatus::Unbounded)
            throw Error("branch-and-bound: LP relaxation is unbounded");
        if (r.status == LpStatus::Infeasible) {
            if (is_root)
                result.root_bound = -sign * kInf;
            continue;
        }
        double value = std::min(sign * r.objective, node.bound);

        const bool separate = cut_callback && (config.cuts == CutPolicy::RootOnly ? is_root
                                               : config.cuts == CutPolicy::Frequency
                                                   ? (result.nodes_explored - 1) % std::max(1, config.cut_frequency_k) == 0
                                                   : false);
        if (separate) {
            int added = 0;
            for (Constraint& c : cut_callback(r.point)) {
                if (c.violation(r.point) < kCutViolation)
                    continue;
                if (!seen_cuts.insert(cut_key(c)).second)
                    continue;
                lp.add_row(c);
                result.cuts.push_back(std::move(c));
                ++added;
            }
            if (added > 0) {
                result.cuts_added += added;
                r = lp.solve(config.lp);
                result.lp_iterations += r.iterations;
                if (r.status == LpStatus::Infeasible)
                    continue;
                if (r.status != LpStatus::Optimal)
                    throw Error(std::string("branch-and-bound: LP after cuts ended with status ") + to_string(r.status));
                value = std::min(value, sign * r.objective);
            }
        }
        if (is_root)
            result.root_bound = sign * value;

        if (node.branch_var >= 0 && std::isfinite(node.bound)) {
            const auto k = static_cast<std::size_t>(binary_slot[static_cast<std::size_t>(node.branch_var)]);
            const int d = node.up ? 1 : 0;
            pseudo.sum[d][k] += std::max(0.0, node.bound - value) / std::max(node.frac, 1e-6);
            ++pseudo.count[d][k];
        }

        if (heuristic)
            try_fixing(heuristic(r.point));

        if (value <= prune_level()) {
            pruned_by_gap = std::max(pruned_by_gap, value);
            continue;
        }

        int branch = -1;
        double best_score = -1.0;
        double child_bound[2] = {value, value};
        for (std::size_t k = 0; k < binaries.size(); ++k) {
            const int v = binaries[k];
            const double x = r.point[v];
            const double f = std::min(x - std::floor(x), std::ceil(x) - x);
            if (f <= config.integrality_tol)
                continue;
            const double frac[2] = {x - std::floor(x), std::ceil(x) - x};
            double score = f;
            double sb[2] = {value, value};
            const bool unreliable = std::min(pseudo.count[0][k], pseudo.count[1][k]) < config.reliability;
            if (config.branch_rule == BranchRule::Strong ||
                (config.branch_rule == BranchRule::Reliability && unreliable)) {
                LpLimits limits = config.lp;
                limits.max_iterations = std::min(limits.max_iterations, config.strong_iterations);
                for (int d = 0; d < 2; ++d) {
                    lp.set_bounds(v, d, d);
                    const LpResult c = lp.solve(limits);
                    result.lp_iterations += c.iterations;
                    if (c.status == LpStatus::Infeasible)
                        sb[d] = -kInf;
                    else if (c.status == LpStatus::Optimal)
                        sb[d] = std::min(value, sign * c.objective);
                    if (std::isfinite(sb[d])) {
                        pseudo.sum[d][k] += (value - sb[d]) / std::max(frac[d], 1e-6);
                        ++pseudo.count[d][k];
                    }
                }
                lp.set_bounds(v, 0.0, 1.0);
                const double down = std::min(value - sb[0], 1e12), up = std::min(value - sb[1], 1e12);
                score = std::max(down, 1e-6) * std::max(up, 1e-6);
            } else if (config.branch_rule != BranchRule::MostFractional) {
                const double down = pseudo.estimate(k, 0) * frac[0];
                const double up = pseudo.estimate(k, 1) * frac[1];
                score = std::max(down, 1e-6) * std::max(up, 1e-6);
            }
            if (score > best_score) {
                best_score = score;
                branch = v;
                child_bound[0] = sb[0];
                child_bound[1] = sb[1];
            }
        }

        if (branch < 0) {
            if (value > incumbent) {
                incumbent = value;
                result.has_incumbent = true;
                result.incumbent_point = r.point;
                log_progress("incumbent");
            }
        } else {
            const double x = r.point[branch];
            const bool prefer_up = x >= 0.5;
            for (int pass = 0; pass < 2; ++pass) {
                const bool up = (pass == 1) == prefer_up;  // preferred child pushed last
                TreeNode child;
                child.bound = child_bound[up ? 1 : 0];
                child.seq = seq++;
                child.fixings = node.fixings;
                child.fixings.emplace_back(branch, up ? 1.0 : 0.0);
                child.branch_var = branch;
                child.up = up;
                child.frac = up ? std::ceil(x) - x : x - std::floor(x);
                open.push(std::move(child));
            }
        }

        if (config.stop_on_sign) {
            const double ub = std::max({open.max_bound(), incumbent, pruned_by_gap});
            // the same test covers minimization, where both bounds flip sign
            if (ub < -kSignTolerance || incumbent > kSignTolerance) {
                result.status = MilpStatus::SignDetermined;
                stopped = true;
                break;
            }
        }
        if (config.log && config.log_every > 0 && result.nodes_explored % config.log_every == 0)
            log_progress("progress");
    }

    const double bound = std::max({open.max_bound(), incumbent, pruned_by_gap});
    if (!stopped)
        result.status = result.has_incumbent ? MilpStatus::Optimal : MilpStatus::Infeasible;
    result.incumbent_value = result.has_incumbent ? sign * incumbent : -sign * kInf;
    result.best_bound = result.status == MilpStatus::Infeasible ? -sign * kInf : sign * bound;
    if (result.nodes_explored == 0)
        result.root_bound = result.best_bound;
    result.wall_time = elapsed();
    log_progress("done");
    return result;
}

}  // namespace relumip
