// Acceptance suite: one PASS/FAIL line per criterion. Pass criterion numbers to run a subset.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "pipeline.hpp"
#include "relumip/cuts.hpp"
#include "relumip/oracle.hpp"

using namespace relumip;
namespace fs = std::filesystem;

namespace {

const std::string kFixtures = RELUMIP_FIXTURES;

struct Outcome
{
    bool pass = true;
    std::string detail;
};

void fail(Outcome& o, const std::string& why)
{
    if (o.pass)
        o.detail = why;
    o.pass = false;
}

std::string fmt(const char* f, double a, double b = 0, double c = 0, double d = 0)
{
    char buf[256];
    std::snprintf(buf, sizeof buf, f, a, b, c, d);
    return buf;
}

NeuralNet random_net(std::mt19937_64& rng, Eigen::Index input_dim, const std::vector<Eigen::Index>& hidden,
                     Eigen::Index outputs)
{
    std::normal_distribution<double> g(0.0, 1.0);
    std::vector<DenseLayer> layers;
    Eigen::Index cols = input_dim;
    auto add = [&](Eigen::Index rows, Activation act) {
        DenseLayer layer;
        layer.weights.resize(rows, cols);
        layer.biases.resize(rows);
        for (Eigen::Index i = 0; i < layer.weights.size(); ++i)
            layer.weights.data()[i] = g(rng);
        for (Eigen::Index i = 0; i < rows; ++i)
            layer.biases[i] = 0.5 * g(rng);
        layer.activation = act;
        layers.push_back(std::move(layer));
        cols = rows;
    };
    for (Eigen::Index h : hidden)
        add(h, Activation::ReLU);
    add(outputs, Activation::Linear);
    return NeuralNet(input_dim, std::move(layers));
}

Eigen::VectorXd uniform(std::mt19937_64& rng, Eigen::Index dim, double lo = 0.0, double hi = 1.0)
{
    std::uniform_real_distribution<double> u(lo, hi);
    Eigen::VectorXd x(dim);
    for (auto& v : x)
        v = u(rng);
    return x;
}

AdversaryInstance make_instance(const NeuralNet& net, const Eigen::VectorXd& target, double eps, Norm norm)
{
    AdversaryInstance inst;
    inst.target = target;
    inst.true_label = predicted_class(net, target);
    inst.adv_label = second_likeliest(net, target, inst.true_label);
    inst.epsilon = eps;
    inst.norm = norm;
    return inst;
}

std::vector<AdversaryInstance> load_dir(const std::string& dir, const NeuralNet& net)
{
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(kFixtures + "/" + dir))
        files.push_back(e.path());
    std::sort(files.begin(), files.end());
    std::vector<AdversaryInstance> out;
    for (const auto& f : files)
        out.push_back(load_instance_file(f.string(), net, 0));
    return out;
}

OracleResult oracle(const NeuralNet& net, const AdversaryInstance& inst, TaskKind kind)
{
    return enumerate_optimum(net, propagate(net, task_box(inst, kind)), task_hook(inst, kind));
}

PartitionPlan plan_of(const NeuralNet& net, int n)
{
    StrategyConfig sc;
    sc.num_partitions = n;
    return make_partition_plan(net, sc);
}

MilpResult solve_task(const NeuralNet& net, const AdversaryInstance& inst, TaskKind kind, Formulation f, int n)
{
    const bool plain = f == Formulation::BigM || f == Formulation::ConvexHull;
    const BoundsTable bounds = propagate(net, task_box(inst, kind), plan_of(net, plain ? 1 : n));
    EncodingOptions enc;
    enc.formulation = f;
    const TaskModel task = build_task(net, inst, kind, bounds, enc);
    BnbConfig cfg;
    cfg.stop_on_sign = task.stop_on_sign;
    return solve_milp(task.encoding.model, cfg, {}, pattern_heuristic(net, task.encoding));
}

// 1
Outcome exactness()
{
    Outcome o;
    struct Case
    {
        const char* name;
        Formulation f;
        int n;
    };
    const Case cases[] = {{"bigm", Formulation::BigM, 1},
                          {"part2", Formulation::Partitioned, 2},
                          {"part4", Formulation::Partitioned, 4},
                          {"hull", Formulation::ConvexHull, 0},
                          {"nonlifted2", Formulation::NonLifted, 2}};
    int runs = 0;
    double worst = 0.0;
    for (int s = 0; s < 50; ++s) {
        std::mt19937_64 rng(1000 + s);
        std::uniform_int_distribution<int> width(2, 6);
        const int d = width(rng);
        const NeuralNet net = random_net(rng, d, {width(rng), width(rng)}, 3);
        const AdversaryInstance inst =
            make_instance(net, uniform(rng, d), std::uniform_real_distribution<double>(0.2, 1.2)(rng), Norm::L1);
        const OracleResult truth = oracle(net, inst, TaskKind::OptimalAdversary);
        for (const Case& c : cases) {
            const MilpResult r = solve_task(net, inst, TaskKind::OptimalAdversary, c.f, c.n);
            ++runs;
            if (r.status != MilpStatus::Optimal) {
                fail(o, std::string("net ") + std::to_string(s) + " " + c.name + " status " + to_string(r.status));
                continue;
            }
            const double err = std::abs(r.incumbent_value - truth.value);
            worst = std::max(worst, err);
            if (err > 1e-6)
                fail(o, fmt("net %g: value off by %.3g", s, err) + " under " + c.name);
        }
    }
    o.detail += (o.detail.empty() ? "" : "; ") + fmt("%g runs, worst |milp - oracle| %.2e", runs, worst);
    return o;
}

// 2
Outcome hierarchy()
{
    Outcome o;
    int strict = 0;
    double worst_order = 0.0, worst_eq = 0.0, worst_nl = 0.0;
    for (int s = 0; s < 20; ++s) {
        std::mt19937_64 rng(2000 + s);
        const int eta = 5;
        const NeuralNet net = random_net(rng, eta, {eta, eta}, 3);
        const InputBox box = InputBox::uniform(eta, 0, 1);
        const BoundsTable base = propagate(net, box);
        const Eigen::Index j = static_cast<Eigen::Index>(rng() % 3), k = (j + 1) % 3;

        auto relax = [&](Formulation f, const PartitionPlan& plan) {
            EncodingOptions opt;
            opt.formulation = f;
            NetworkEncoding enc = encode_network(net, with_partitions(base, net, plan), opt);
            enc.model.set_objective(ObjSense::Maximize, LinearExpr().add(enc.outputs()[static_cast<std::size_t>(j)], 1.0).add(enc.outputs()[static_cast<std::size_t>(k)], -1.0));
            return relaxation_value(enc.model);
        };
        auto merged = [&](const PartitionPlan& plan) {
            PartitionPlan out = plan;
            for (auto& layer : out)
                for (auto& p : layer)
                    p = merge_subsets(p, p.size() - 2, p.size() - 1);
            return out;
        };
        const double bigm = relax(Formulation::BigM, plan_of(net, 1));
        const double hull = relax(Formulation::ConvexHull, plan_of(net, 1));
        const double one = relax(Formulation::Partitioned, plan_of(net, 1));
        worst_eq = std::max(worst_eq, std::abs(one - bigm));
        if (std::abs(one - bigm) > 1e-9)
            fail(o, fmt("fixture %g: N=1 differs from big-M by %.3g", s, one - bigm));

        for (int n = 2; n <= eta; ++n) {
            const PartitionPlan plan = plan_of(net, n);
            const double part = relax(Formulation::Partitioned, plan);
            const double coarse = relax(Formulation::Partitioned, merged(plan));
            for (auto [lo, hi] : {std::pair{hull, part}, std::pair{part, coarse}, std::pair{coarse, bigm}}) {
                worst_order = std::max(worst_order, lo - hi);
                if (lo > hi + 1e-9)
                    fail(o, fmt("fixture %g N=%g: chain broken by %.3g", s, n, lo - hi));
            }
            strict += hull < part - 1e-6 || part < coarse - 1e-6 || coarse < bigm - 1e-6;
            if (n == eta) {
                worst_eq = std::max(worst_eq, std::abs(part - hull));
                if (std::abs(part - hull) > 1e-9)
                    fail(o, fmt("fixture %g: N=eta differs from the hull by %.3g", s, part - hull));
            }
            if (n <= 4) {
                const double nl = relax(Formulation::NonLifted, plan);
                worst_nl = std::max(worst_nl, std::abs(nl - part));
                if (std::abs(nl - part) > 1e-7)
                    fail(o, fmt("fixture %g N=%g: non-lifted differs by %.3g", s, n, nl - part));
            }
        }
    }
    if (strict == 0)
        fail(o, "no strict inequality on any fixture");
    o.detail += (o.detail.empty() ? "" : "; ") +
                fmt("%g strict chains, worst order slack %.2e, worst equality %.2e, worst lifted/non-lifted %.2e",
                    strict, worst_order, worst_eq, worst_nl);
    return o;
}

struct SingleNode
{
    MilpModel model;
    std::vector<int> x;
    NodeEncoding node;
};

template <typename Encode>
SingleNode single_node(const InputBox& box, Encode encode)
{
    SingleNode out;
    for (Eigen::Index i = 0; i < box.dim(); ++i)
        out.x.push_back(out.model.add_variable("x" + std::to_string(i), box.lower[i], box.upper[i]));
    out.node = encode(out.model, out.x);
    return out;
}

/// y - sum coef_i x_i - c sigma <= 0 present verbatim.
bool has_row(const SingleNode& n, const std::vector<double>& coef, double sigma_coef)
{
    std::vector<Term> want;
    for (std::size_t i = 0; i < coef.size(); ++i)
        if (coef[i] != 0.0)
            want.emplace_back(n.node.inputs[i], -coef[i]);
    want.emplace_back(n.node.output, 1.0);
    want.emplace_back(n.node.sigma, -sigma_coef);
    std::sort(want.begin(), want.end());
    for (const auto& c : n.model.constraints())
        if (c.sense == RowSense::LessEqual && c.terms == want && c.rhs == 0.0)
            return true;
    return false;
}

/// max of y - sum coef x - c sigma over the lifted relaxation is exactly 0.
bool implied_tight(const SingleNode& n, const std::vector<double>& coef, double sigma_coef)
{
    MilpModel m = n.model;
    LinearExpr obj;
    obj.add(n.node.output, 1.0).add(n.node.sigma, -sigma_coef);
    for (std::size_t i = 0; i < coef.size(); ++i)
        obj.add(n.x[i], -coef[i]);
    m.set_objective(ObjSense::Maximize, obj);
    return std::abs(relaxation_value(m)) <= 1e-9;
}

// 3
Outcome worked_example()
{
    Outcome o;
    const Eigen::Vector4d w(1, 1, 100, 100);
    const double b = 0.0;
    const InputBox box = InputBox::uniform(4, 0, 1);
    auto nonlifted = [&](const Partition& p) {
        return single_node(box, [&](MilpModel& m, const std::vector<int>& x) {
            return encode_nonlifted(m, x, w, b, p, weighted_input_ranges(w, box), node_interval(w, b, box), "n_");
        });
    };
    auto lifted = [&](const Partition& p) {
        return single_node(box, [&](MilpModel& m, const std::vector<int>& x) {
            NodeBounds nb;
            nb.preact = node_interval(w, b, box);
            nb.partition = p;
            for (const auto& s : p.subsets) {
                nb.inactive.push_back(partition_interval(w, s, box));
                nb.active.push_back(nb.inactive.back());
            }
            return encode_partitioned(m, x, w, b, nb, "n_");
        });
    };
    struct Row
    {
        std::vector<double> coef;
        double sigma;
    };
    auto check = [&](const Partition& p, const std::vector<Row>& rows, const char* name) {
        const SingleNode nl = nonlifted(p), li = lifted(p);
        for (const Row& r : rows) {
            if (!has_row(nl, r.coef, b + r.sigma))
                fail(o, std::string(name) + ": projected inequality missing");
            if (p.size() == 2 && !implied_tight(li, r.coef, b + r.sigma))
                fail(o, std::string(name) + ": lifted relaxation does not imply the inequality tightly");
        }
    };
    check(Partition{{{0, 2}, {1, 3}}}, {{{1, 0, 100, 0}, 101}, {{0, 1, 0, 100}, 101}}, "S1={1,3}");
    check(Partition{{{0, 1}, {2, 3}}}, {{{1, 1, 0, 0}, 200}, {{0, 0, 100, 100}, 2}}, "S1={1,2}");
    check(Partition::singletons(4),
          {{{1, 0, 0, 0}, 201}, {{0, 1, 0, 0}, 201}, {{0, 0, 100, 0}, 102}, {{0, 0, 0, 100}, 102}}, "N=4");
    if (o.pass)
        o.detail = "both two-subset bracket pairs and the four singleton members match exactly";
    return o;
}

std::vector<int> subset_of(unsigned mask, int eta)
{
    std::vector<int> s;
    for (int i = 0; i < eta; ++i)
        if ((mask >> i) & 1U)
            s.push_back(i);
    return s;
}

// 4
Outcome cut_suite()
{
    Outcome o;
    std::mt19937_64 rng(4000);
    int violated = 0, checked_vertices = 0, pairs = 0;
    for (int t = 0; pairs < 200; ++t) {
        const int eta = 1 + static_cast<int>(rng() % 10);
        const Eigen::VectorXd w = uniform(rng, eta, -2, 2);
        const double b = uniform(rng, 1, -1, 1)[0];
        const InputBox box(uniform(rng, eta, -1, 0), uniform(rng, eta, 0, 1));
        SingleNode n = single_node(box, [&](MilpModel& m, const std::vector<int>& x) {
            NodeBounds nb;
            nb.preact = node_interval(w, b, box);
            nb.partition = Partition::single(eta);
            nb.inactive = nb.active = {partition_interval(w, nb.partition.subsets[0], box)};
            return encode_bigm(m, x, w, b, nb, "n_");
        });
        if (n.node.sigma < 0)
            continue;  // stable node, nothing to separate
        ++pairs;
        // a vertex of the big-M relaxation under a random objective
        LinearExpr obj;
        obj.add(n.node.output, 1.0 + uniform(rng, 1)[0]).add(n.node.sigma, uniform(rng, 1, -1, 1)[0]);
        for (int i = 0; i < eta; ++i)
            obj.add(n.x[static_cast<std::size_t>(i)], uniform(rng, 1, -1, 1)[0]);
        n.model.set_objective(ObjSense::Maximize, obj);
        const LpResult lp = solve_lp(n.model, true);
        Eigen::VectorXd x(eta);
        for (int i = 0; i < eta; ++i)
            x[i] = lp.point[n.x[static_cast<std::size_t>(i)]];
        const double sigma = lp.point[n.node.sigma], y = lp.point[n.node.output];

        const auto terms = weighted_input_ranges(w, box);
        double best = -kInf;
        for (unsigned mask = 0; mask < (1U << eta); ++mask)
            best = std::max(best, hull_violation(w, b, terms, subset_of(mask, eta), x, sigma, y));
        const auto cut = separate_most_violated(w, b, terms, x, sigma, y);
        if (static_cast<bool>(cut) != (best > kCutTolerance))
            fail(o, fmt("pair %g: separator and exhaustive search disagree on violation (best %.3g)", t, best));
        if (!cut)
            continue;
        ++violated;
        if (std::abs(cut->violation - best) > 1e-9)
            fail(o, fmt("pair %g: violation %.12g vs exhaustive %.12g", t, cut->violation, best));

        // vertices of the node's graph: box corners, plus both phases where an edge crosses w x + b = 0
        for (unsigned mask = 0; mask < (1U << eta); ++mask) {
            Eigen::VectorXd v(eta);
            for (int i = 0; i < eta; ++i)
                v[i] = (mask >> i) & 1U ? box.upper[i] : box.lower[i];
            std::vector<std::pair<Eigen::VectorXd, double>> points{{v, w.dot(v) + b >= 0 ? 1.0 : 0.0}};
            for (int i = 0; i < eta; ++i) {
                if ((mask >> i) & 1U || w[i] == 0.0)
                    continue;
                Eigen::VectorXd u = v;
                u[i] = box.upper[i];
                const double p0 = w.dot(v) + b, p1 = w.dot(u) + b;
                if ((p0 < 0) == (p1 < 0))
                    continue;
                Eigen::VectorXd c = v;
                c[i] = v[i] - p0 / w[i];
                points.emplace_back(c, 0.0);
                points.emplace_back(c, 1.0);
            }
            for (const auto& [p, s] : points) {
                ++checked_vertices;
                const double yv = std::max(0.0, w.dot(p) + b);
                if (hull_violation(w, b, terms, cut->subset, p, s, yv) > 1e-9)
                    fail(o, fmt("pair %g: cut removes a vertex of the ReLU graph", t));
            }
        }
    }
    o.detail += (o.detail.empty() ? "" : "; ") +
                fmt("200 pairs, %g violated, %g graph vertices checked", violated, checked_vertices);
    return o;
}

bool contained(const BoundsTable& inner, const BoundsTable& outer, double tol)
{
    for (std::size_t l = 0; l < outer.layers.size(); ++l)
        for (std::size_t j = 0; j < outer.layers[l].size(); ++j) {
            const NodeBounds& a = inner.layers[l][j];
            const NodeBounds& b = outer.layers[l][j];
            if (!b.preact.contains(a.preact, tol))
                return false;
            for (std::size_t n = 0; n < b.inactive.size(); ++n)
                if (!b.inactive[n].contains(a.inactive[n], tol) || !b.active[n].contains(a.active[n], tol))
                    return false;
        }
    return true;
}

/// Samples the box (and ball) and reports whether every quantity stays inside its bounds.
int escapes(const NeuralNet& net, const BoundsTable& t, const std::optional<L1Ball>& ball, std::mt19937_64& rng,
            int samples)
{
    int bad = 0;
    const InputBox& box = t.input_box;
    for (int s = 0; s < samples; ++s) {
        Eigen::VectorXd x = box.lower + (box.upper - box.lower).cwiseProduct(uniform(rng, box.dim()));
        if (ball) {
            // shrink toward the center until inside the ball; the box is convex and holds the center
            const double r = (x - ball->center).lpNorm<1>();
            if (r > ball->radius)
                x = ball->center + (x - ball->center) * (ball->radius / r) * uniform(rng, 1)[0];
        }
        const auto pre = preactivations(net, x);
        Eigen::VectorXd in = x;
        for (std::size_t l = 0; l < net.num_layers(); ++l) {
            for (std::size_t j = 0; j < t.layers[l].size(); ++j) {
                const auto jj = static_cast<Eigen::Index>(j);
                const NodeBounds& nb = t.layers[l][j];
                bad += !nb.preact.contains(pre[l][jj], 1e-9);
                const auto w = net.layer(l).weights.row(jj);
                for (std::size_t n = 0; n < nb.partition.size(); ++n) {
                    double sum = 0;
                    for (int i : nb.partition.subsets[n])
                        sum += w[i] * in[i];
                    if (pre[l][jj] <= 0)
                        bad += !nb.inactive[n].contains(sum, 1e-9);
                    if (pre[l][jj] >= 0)
                        bad += !nb.active[n].contains(sum, 1e-9);
                }
            }
            in = pre[l].cwiseMax(0.0);
        }
    }
    return bad;
}

// 5
Outcome obbt_suite()
{
    Outcome o;
    std::mt19937_64 rng(5000);
    int escaped = 0, tables = 0;
    std::vector<std::pair<NeuralNet, InputBox>> nets;
    for (int t = 0; t < 4; ++t)
        nets.emplace_back(random_net(rng, 3, {4, 4, 3}, 2), InputBox::uniform(3, 0, 1));
    nets.emplace_back(load_network_file(kFixtures + "/net_toy.json"), InputBox::uniform(4, 0, 1));
    for (const auto& [net, box] : nets) {
        const PartitionPlan plan = plan_of(net, 2);
        ObbtOptions opt;
        opt.mode = ObbtMode::Shared2N2;
        const BoundsTable iv = propagate(net, box, plan);
        const BoundsTable shared = run_obbt(net, box, plan, opt);
        opt.mode = ObbtMode::Split4N;
        const BoundsTable split = run_obbt(net, box, plan, opt);
        if (!contained(shared, iv, 1e-12) || !contained(split, iv, 1e-12))
            fail(o, "OBBT bounds not inside interval bounds");
        if (!contained(split, shared, 1e-9))
            fail(o, "Split4N bounds not inside Shared2N2 bounds");
        escaped += escapes(net, split, std::nullopt, rng, 1000) + escapes(net, shared, std::nullopt, rng, 1000);
        tables += 2;
    }
    if (escaped > 0)
        fail(o, fmt("%g sampled values escaped their bounds", escaped));

    // root gap on the toy adversary suite
    const NeuralNet net = load_network_file(kFixtures + "/net_toy.json");
    const auto suite = load_dir("inst_toy", net);
    cli::RunSpec with = cli::parse_run_label("part2"), without = with;
    with.obbt = ObbtMode::Shared2N2;
    double sum_with = 0, sum_without = 0;
    int strictly = 0;
    for (const auto& inst : suite) {
        const double truth = oracle(net, inst, TaskKind::OptimalAdversary).value;
        const auto a = cli::build_model(net, inst, TaskKind::OptimalAdversary, with, {}, 0);
        const auto b = cli::build_model(net, inst, TaskKind::OptimalAdversary, without, {}, 0);
        const int ball_escapes = escapes(net, a.bounds, task_ball(inst, TaskKind::OptimalAdversary), rng, 100);
        if (ball_escapes > 0)
            fail(o, "sampled value escaped OBBT bounds over the l1 ball");
        const double gap_with = (relaxation_value(a.task.encoding.model) - truth) / std::abs(truth);
        const double gap_without = (relaxation_value(b.task.encoding.model) - truth) / std::abs(truth);
        sum_with += gap_with;
        sum_without += gap_without;
        strictly += gap_with < gap_without - 1e-9;
    }
    const double n = static_cast<double>(suite.size());
    if (suite.size() != 10)
        fail(o, "toy suite does not have 10 instances");
    if (sum_with / n > sum_without / n)
        fail(o, "mean root gap larger with OBBT");
    if (strictly < 7)
        fail(o, fmt("OBBT strictly tighter on only %g/10 instances", strictly));
    o.detail += (o.detail.empty() ? "" : "; ") +
                fmt("%g tables sampled 1000x, mean root gap %.4f with OBBT vs %.4f without, strictly smaller on %g/10",
                    tables, sum_with / n, sum_without / n, strictly);
    return o;
}

int sign_of(double v)
{
    return v > kSignTolerance ? 1 : v < -kSignTolerance ? -1 : 0;
}

// 6
Outcome verification()
{
    Outcome o;
    const NeuralNet net = load_network_file(kFixtures + "/net_toy.json");
    auto suite = load_dir("inst_toy_linf", net);
    const std::size_t base = suite.size();
    for (std::size_t i = 0; i < base; ++i) {
        AdversaryInstance tight = suite[i];
        tight.epsilon = 0.02;
        suite.push_back(tight);
    }
    int determined = 0, positive = 0;
    for (std::size_t i = 0; i < suite.size(); ++i) {
        const double truth = oracle(net, suite[i], TaskKind::Verification).value;
        const MilpResult r = solve_task(net, suite[i], TaskKind::Verification, Formulation::BigM, 1);
        int got = 0;
        if (r.status == MilpStatus::SignDetermined) {
            ++determined;
            got = r.has_incumbent && r.incumbent_value > kSignTolerance ? 1 : -1;
            if (std::abs(truth) < 1e-6)
                fail(o, fmt("instance %g reports SignDetermined with oracle value %.3g", i, truth));
        } else if (r.status == MilpStatus::Optimal) {
            got = sign_of(r.incumbent_value);
        } else {
            fail(o, fmt("instance %g ended without a sign", i));
            continue;
        }
        positive += sign_of(truth) > 0;
        if (got != sign_of(truth))
            fail(o, fmt("instance %g: sign %g vs oracle %.6g", i, got, truth));
    }
    o.detail += (o.detail.empty() ? "" : "; ") +
                fmt("%g instances, %g decided early, %g with an adversarial example", suite.size(), determined, positive);
    return o;
}

// 7
Outcome min_distortion()
{
    Outcome o;
    const NeuralNet net = load_network_file(kFixtures + "/net_toy.json");
    const auto suite = load_dir("inst_toy", net);
    double smallest_margin = kInf;
    int found = 0;
    for (std::size_t i = 0; i < suite.size(); ++i) {
        const MilpResult r = solve_task(net, suite[i], TaskKind::MinDistortion, Formulation::Partitioned, 2);
        AdversaryInstance probe = suite[i];
        if (r.status == MilpStatus::Infeasible) {
            probe.epsilon = distortion_cap(suite[i]);
            if (oracle(net, probe, TaskKind::OptimalAdversary).value >= 0)
                fail(o, fmt("instance %g: reported infeasible but the cap admits a flip", i));
            continue;
        }
        if (r.status != MilpStatus::Optimal) {
            fail(o, fmt("instance %g: status not optimal", i));
            continue;
        }
        ++found;
        const double eps = r.incumbent_value;
        probe.epsilon = eps + 1e-4;
        const double above = oracle(net, probe, TaskKind::OptimalAdversary).value;
        probe.epsilon = std::max(0.0, eps - 1e-4);
        const double below = oracle(net, probe, TaskKind::OptimalAdversary).value;
        smallest_margin = std::min({smallest_margin, above, -below});
        if (!(above >= 0.0))
            fail(o, fmt("instance %g: eps* %.6g, adversary at eps*+1e-4 is %.3g", i, eps, above));
        if (!(below < 0.0))
            fail(o, fmt("instance %g: eps* %.6g, adversary at eps*-1e-4 is %.3g", i, eps, below));
    }
    o.detail += (o.detail.empty() ? "" : "; ") +
                fmt("%g of %g instances have a flip within the cap, tightest bracket margin %.3g", found,
                    suite.size(), smallest_margin);
    return o;
}

// 8
Outcome formulation_benefit()
{
    Outcome o;
    const NeuralNet net = load_network_file(kFixtures + "/net_2x10.json");
    const auto suite = load_dir("inst_2x10", net);
    const cli::RunSpec bigm = cli::parse_run_label("bigm"), part2 = cli::parse_run_label("part2");
    const cli::SolverSettings settings;
    int root_ok = 0, fewer_nodes = 0;
    long nodes_bigm = 0, nodes_part = 0;
    double time_bigm = 0, time_part = 0;
    for (const auto& inst : suite) {
        const auto a = cli::execute(net, inst, TaskKind::OptimalAdversary, bigm, settings, 0);
        const auto b = cli::execute(net, inst, TaskKind::OptimalAdversary, part2, settings, 0);
        if (a.milp.status != MilpStatus::Optimal || b.milp.status != MilpStatus::Optimal)
            fail(o, "run did not reach optimality");
        if (std::abs(a.milp.incumbent_value - b.milp.incumbent_value) > 1e-6)
            fail(o, "formulations disagree on the optimum");
        root_ok += b.milp.root_bound <= a.milp.root_bound + 1e-9 * (1.0 + std::abs(a.milp.root_bound));
        fewer_nodes += b.milp.nodes_explored <= a.milp.nodes_explored;
        nodes_bigm += a.milp.nodes_explored;
        nodes_part += b.milp.nodes_explored;
        time_bigm += a.total_seconds;
        time_part += b.total_seconds;
    }
    const auto n = static_cast<double>(suite.size());
    if (suite.size() != 30)
        fail(o, "suite does not have 30 instances");
    if (root_ok != static_cast<int>(suite.size()))
        fail(o, fmt("2-partition root bound above big-M on %g instances", n - root_ok));
    if (fewer_nodes < 0.6 * n)
        fail(o, fmt("2-partition explored no more nodes on only %g/%g instances", fewer_nodes, n));
    o.detail += (o.detail.empty() ? "" : "; ") +
                fmt("root bound <= big-M on %g/%g, nodes <= big-M on %g/%g", root_ok, n, fewer_nodes, n) +
                fmt(", total nodes %g vs %g, time %.1fs vs %.1fs (big-M vs part2)", nodes_bigm, nodes_part, time_bigm,
                    time_part);
    return o;
}

// 9
Outcome strategies()
{
    Outcome o;
    std::mt19937_64 rng(9000);
    const Strategy all[] = {Strategy::EqualSize, Strategy::EqualRange, Strategy::Random, Strategy::UnevenMagnitudes};
    for (int t = 0; t < 1000; ++t) {
        const int eta = 1 + static_cast<int>(rng() % 40);
        const int n = 3 + static_cast<int>(rng() % 8);
        Eigen::VectorXd w = uniform(rng, eta, -3, 3);
        if (t % 5 == 0)
            w = w.array().round().matrix();  // ties
        for (Strategy s : all) {
            StrategyConfig sc;
            sc.strategy = s;
            sc.num_partitions = n;
            sc.seed = rng();
            const Partition p = make_partition(w, sc, 7);
            if (!p.is_valid_for(eta) || p.size() != static_cast<std::size_t>(n))
                fail(o, "invalid partition from " + to_string(s));
            if (!(make_partition(w, sc, 7) == p))
                fail(o, to_string(s) + " is not deterministic");
        }
        const Partition p = equal_size(w, n);
        std::size_t lo = p.subsets[0].size(), hi = lo;
        for (std::size_t k = 0; k < p.size(); ++k) {
            lo = std::min(lo, p.subsets[k].size());
            hi = std::max(hi, p.subsets[k].size());
            if (k + 1 < p.size() && !p.subsets[k].empty() && !p.subsets[k + 1].empty()) {
                double top = -kInf, bottom = kInf;
                for (int i : p.subsets[k])
                    top = std::max(top, w[i]);
                for (int i : p.subsets[k + 1])
                    bottom = std::min(bottom, w[i]);
                if (top > bottom)
                    fail(o, "equal-size groups not contiguous in weight order");
            }
        }
        if (hi - lo > 1)
            fail(o, "equal-size group sizes differ by more than one");
    }
    if (o.pass)
        o.detail = "1000 weight vectors x 4 strategies valid and reproducible; equal-size contiguous and balanced";
    return o;
}

}  // namespace

int main(int argc, char** argv)
{
    struct Criterion
    {
        int id;
        const char* name;
        double budget;  // seconds
        std::function<Outcome()> run;
    };
    const std::vector<Criterion> criteria = {
        {1, "exactness", 180, exactness},
        {2, "hierarchy", 60, hierarchy},
        {3, "worked example", 1, worked_example},
        {4, "cut separation", 60, cut_suite},
        {5, "obbt", 120, obbt_suite},
        {6, "verification", 60, verification},
        {7, "min-distortion", 120, min_distortion},
        {8, "formulation benefit", 600, formulation_benefit},
        {9, "partition strategies", 10, strategies},
    };
    std::set<int> only;
    for (int i = 1; i < argc; ++i)
        only.insert(std::atoi(argv[i]));

    bool all = true;
    for (const auto& c : criteria) {
        if (!only.empty() && !only.count(c.id))
            continue;
        const auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o.pass = false;
            o.detail = std::string("exception: ") + e.what();
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (secs > c.budget)
            fail(o, fmt("took %.1fs, budget %.0fs", secs, c.budget));
        all = all && o.pass;
        std::printf("criterion %d (%s): %s  %s  [%.1fs / %.0fs]\n", c.id, c.name, o.pass ? "PASS" : "FAIL",
                    o.detail.c_str(), secs, c.budget);
        std::fflush(stdout);
    }
    return all ? 0 : 1;
}
