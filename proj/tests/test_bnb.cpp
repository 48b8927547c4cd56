#include "doctest.h"

#include <random>
#include <sstream>

#include "relumip/bnb.hpp"
#include "relumip/cuts.hpp"
#include "relumip/oracle.hpp"
#include "relumip/tasks.hpp"
#include "relumip/error.hpp"
#include "test_nets.hpp"

using namespace relumip;

namespace {

NetworkEncoding margin_model(const NeuralNet& net, const BoundsTable& t, Formulation f)
{
    EncodingOptions opt;
    opt.formulation = f;
    NetworkEncoding enc = encode_network(net, t, opt);
    enc.model.set_objective(ObjSense::Maximize, LinearExpr().add(enc.outputs()[0], 1.0).add(enc.outputs()[1], -1.0));
    return enc;
}

double margin_truth(const NeuralNet& net, const BoundsTable& t)
{
    return enumerate_optimum(net, t, [](MilpModel& m, const std::vector<int>&, const std::vector<int>& out) {
               m.set_objective(ObjSense::Maximize, LinearExpr().add(out[0], 1.0).add(out[1], -1.0));
           }).value;
}

}  // namespace

TEST_CASE("single node max y")
{
    const NeuralNet net(2, {{(Eigen::MatrixXd(1, 2) << 1, -1).finished(), Eigen::VectorXd::Zero(1)},
                            {Eigen::MatrixXd::Identity(1, 1), Eigen::VectorXd::Zero(1), Activation::Linear}});
    NetworkEncoding enc = encode_network(net, propagate(net, InputBox::uniform(2, 0, 1)), {});
    enc.model.set_objective(ObjSense::Maximize, LinearExpr().add(enc.outputs()[0], 1.0));
    const MilpResult r = solve_milp(enc.model);
    CHECK(r.status == MilpStatus::Optimal);
    CHECK(r.incumbent_value == doctest::Approx(1.0));
    CHECK(r.nodes_explored <= 3);
    CHECK(enc.model.max_violation(r.incumbent_point) <= 1e-6);
}

TEST_CASE("sign is decided at the root when the bound is negative")
{
    // f1 - f0 = -1 - relu(...) everywhere
    const NeuralNet net(2, {{(Eigen::MatrixXd(1, 2) << 1, -1).finished(), Eigen::VectorXd::Zero(1)},
                            {(Eigen::MatrixXd(2, 1) << 1, 0).finished(), Eigen::Vector2d(1, 0), Activation::Linear}});
    NetworkEncoding enc = encode_network(net, propagate(net, InputBox::uniform(2, 0, 1)), {});
    enc.model.set_objective(ObjSense::Maximize, LinearExpr().add(enc.outputs()[1], 1.0).add(enc.outputs()[0], -1.0));
    BnbConfig cfg;
    cfg.stop_on_sign = true;
    const MilpResult r = solve_milp(enc.model, cfg);
    CHECK(r.status == MilpStatus::SignDetermined);
    CHECK(r.nodes_explored == 1);
    CHECK(r.best_bound < 0);
}

TEST_CASE("formulations agree and partitions tighten the root")
{
    std::mt19937_64 rng(77);
    for (int t = 0; t < 8; ++t) {
        const NeuralNet net = test::random_net(rng, 3, {4, 4}, 2);
        StrategyConfig cfg;
        cfg.num_partitions = 2;
        const BoundsTable table = propagate(net, InputBox::uniform(3, 0, 1), make_partition_plan(net, cfg));
        const double truth = margin_truth(net, table);
        const MilpResult bigm = solve_milp(margin_model(net, table, Formulation::BigM).model);
        const MilpResult part = solve_milp(margin_model(net, table, Formulation::Partitioned).model);
        CHECK(bigm.incumbent_value == doctest::Approx(truth).epsilon(1e-6));
        CHECK(part.incumbent_value == doctest::Approx(truth).epsilon(1e-6));
        CHECK(part.root_bound <= bigm.root_bound + 1e-9);
        CHECK(bigm.best_bound >= bigm.incumbent_value - 1e-9);
    }
}

TEST_CASE("node selection, branching rules and cuts keep the optimum")
{
    std::mt19937_64 rng(31);
    for (int t = 0; t < 5; ++t) {
        const NeuralNet net = test::random_net(rng, 3, {5, 5}, 2);
        const BoundsTable table = propagate(net, InputBox::uniform(3, 0, 1));
        const double truth = margin_truth(net, table);
        const NetworkEncoding enc = margin_model(net, table, Formulation::BigM);
        const CutCallback cb = [&](const Eigen::VectorXd& p) { return separate_round(enc.nodes, p); };
        std::vector<BnbConfig> configs(8);
        configs[0].branch_rule = BranchRule::MostFractional;
        configs[1].node_selection = NodeSelection::DepthFirst;
        configs[2].branch_rule = BranchRule::PseudoCost;
        configs[5].branch_rule = BranchRule::Strong;
        configs[6].branch_rule = BranchRule::Strong;
        configs[6].strong_iterations = 1;  // truncated strong branching still exact
        configs[7].node_selection = NodeSelection::DepthFirst;
        configs[3].cuts = CutPolicy::RootOnly;
        configs[4].cuts = CutPolicy::Frequency;
        configs[4].cut_frequency_k = 2;
        for (const auto& c : configs) {
            const MilpResult r = solve_milp(enc.model, c, cb);
            CHECK(r.status == MilpStatus::Optimal);
            CHECK(r.incumbent_value == doctest::Approx(truth).epsilon(1e-6));
            // cuts never remove the optimal pattern's point
            for (const auto& cut : r.cuts)
                CHECK(cut.violation(r.incumbent_point) <= 1e-6);
        }
    }
}

TEST_CASE("pattern heuristic finds incumbents without changing the optimum")
{
    std::mt19937_64 rng(8);
    for (int t = 0; t < 5; ++t) {
        const NeuralNet net = test::random_net(rng, 3, {6, 6}, 2);
        const BoundsTable table = propagate(net, InputBox::uniform(3, 0, 1));
        const double truth = margin_truth(net, table);
        const NetworkEncoding enc = margin_model(net, table, Formulation::Partitioned);
        BnbConfig cfg;
        cfg.branch_rule = BranchRule::MostFractional;
        const MilpResult plain = solve_milp(enc.model, cfg);
        const MilpResult with = solve_milp(enc.model, cfg, {}, pattern_heuristic(net, enc));
        CHECK(with.status == MilpStatus::Optimal);
        CHECK(with.incumbent_value == doctest::Approx(truth).epsilon(1e-6));
        CHECK(with.nodes_explored <= plain.nodes_explored);
        if (table.unstable_count() > 0)
            CHECK(with.heuristic_solutions >= 1);
        // the incumbent is a full model point
        CHECK(enc.model.max_violation(with.incumbent_point) <= 1e-6);
    }
}

TEST_CASE("branching rule names")
{
    for (const char* name : {"most-fractional", "pseudocost", "strong", "reliability"})
        CHECK(to_string(parse_branch_rule(name)) == name);
    CHECK_THROWS_AS(parse_branch_rule("random"), Error);
}

TEST_CASE("minimization, infeasibility and limits")
{
    MilpModel m;
    const int x = m.add_variable("x", 0, 10);
    const int s = m.add_binary("s");
    const int t = m.add_binary("t");
    m.add_constraint(LinearExpr().add(x, 1).add(s, -2.5).add(t, -2.5), RowSense::GreaterEqual, 0.5, "c");
    m.set_objective(ObjSense::Minimize, LinearExpr(1.0).add(x, 1).add(s, 3).add(t, 3.5));
    MilpResult r = solve_milp(m);
    CHECK(r.status == MilpStatus::Optimal);
    CHECK(r.incumbent_value == doctest::Approx(1.5));
    CHECK(r.best_bound <= r.incumbent_value + 1e-9);

    m.add_constraint(LinearExpr().add(x, 1), RowSense::LessEqual, 0.2, "tight");
    m.add_constraint(LinearExpr().add(s, 1).add(t, 1), RowSense::LessEqual, 0.0, "off");
    r = solve_milp(m);
    CHECK(r.status == MilpStatus::Infeasible);
    CHECK(!r.has_incumbent);

    std::mt19937_64 rng(1);
    const NeuralNet net = test::random_net(rng, 3, {6, 6}, 2);
    const BoundsTable table = propagate(net, InputBox::uniform(3, 0, 1));
    BnbConfig cfg;
    cfg.node_limit = 1;
    std::ostringstream log;
    cfg.log = &log;
    const MilpResult limited = solve_milp(margin_model(net, table, Formulation::BigM).model, cfg);
    if (table.unstable_count() > 0 && limited.status != MilpStatus::Optimal)
        CHECK(limited.status == MilpStatus::NodeLimit);
    CHECK(log.str().find("event=done nodes=") != std::string::npos);
}
