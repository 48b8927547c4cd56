#include "pipeline.hpp"

#include <chrono>

#include "relumip/cuts.hpp"
#include "relumip/error.hpp"

namespace relumip::cli {

RunSpec parse_run_label(const std::string& label)
{
    RunSpec spec;
    spec.label = label;
    auto number_after = [&](std::size_t prefix) {
        const std::string digits = label.substr(prefix);
        if (digits.empty() || digits.find_first_not_of("0123456789") != std::string::npos)
            throw Error("formulation \"" + label + "\": expected a partition count after the name");
        return std::stoi(digits);
    };
    if (label == "bigm") {
        spec.formulation = Formulation::BigM;
    } else if (label == "hull") {
        spec.formulation = Formulation::ConvexHull;
    } else if (label.rfind("partition", 0) == 0) {
        spec.formulation = Formulation::Partitioned;
        spec.num_partitions = number_after(9);
    } else if (label.rfind("part", 0) == 0) {
        spec.formulation = Formulation::Partitioned;
        spec.num_partitions = number_after(4);
    } else if (label.rfind("nonlifted", 0) == 0) {
        spec.formulation = Formulation::NonLifted;
        spec.num_partitions = number_after(9);
    } else {
        throw Error("unknown formulation \"" + label + "\" (expected bigm, hull, partN or nonliftedN)");
    }
    if (spec.num_partitions < 1)
        throw Error("formulation \"" + label + "\": partition count must be positive");
    return spec;
}

std::string partitions_label(const RunSpec& spec)
{
    switch (spec.formulation) {
    case Formulation::BigM: return "1";
    case Formulation::ConvexHull: return "eta";
    default: return std::to_string(spec.num_partitions);
    }
}

BuiltModel build_model(const NeuralNet& net, const AdversaryInstance& inst, TaskKind kind, const RunSpec& spec,
                       const SolverSettings& settings, std::uint64_t seed)
{
    // big-M and the hull do not read the plan; one subset keeps OBBT to the preactivation LPs
    const bool plain = spec.formulation == Formulation::BigM || spec.formulation == Formulation::ConvexHull;
    StrategyConfig strategy;
    strategy.strategy = plain ? Strategy::EqualSize : spec.strategy;
    strategy.num_partitions = plain ? 1 : spec.num_partitions;
    strategy.seed = seed;
    const PartitionPlan plan = make_partition_plan(net, strategy);
    const InputBox box = task_box(inst, kind);

    BuiltModel out{net, {}, {}, {}};
    if (spec.obbt == ObbtMode::Interval) {
        out.bounds = propagate(net, box, plan);
    } else {
        ObbtOptions opt;
        opt.mode = spec.obbt;
        opt.formulation = spec.formulation;
        opt.stabilize = spec.stabilize;
        opt.lp_iteration_limit = settings.lp_iteration_limit;
        opt.lp_time_limit = settings.obbt_lp_seconds;
        opt.jobs = settings.obbt_jobs;
        opt.ball = task_ball(inst, kind);
        out.bounds = run_obbt(net, box, plan, opt, &out.obbt);
    }
    EncodingOptions enc;
    enc.formulation = spec.formulation;
    enc.stabilize = spec.stabilize;
    out.task = build_task(net, inst, kind, out.bounds, enc);
    return out;
}

RunOutcome execute(const BuiltModel& built, const RunSpec& spec, const SolverSettings& settings,
                   double bounds_seconds)
{
    using clock = std::chrono::steady_clock;
    const auto start = clock::now();
    RunOutcome out;
    out.obbt = built.obbt;
    out.bounds_seconds = bounds_seconds;

    BnbConfig cfg = settings.bnb;
    cfg.cuts = spec.cuts;
    cfg.cut_frequency_k = spec.cut_frequency_k;
    cfg.stop_on_sign = cfg.stop_on_sign || built.task.stop_on_sign;
    cfg.lp.max_iterations = settings.lp_iteration_limit;
    const auto& nodes = built.task.encoding.nodes;
    CutCallback callback;
    if (spec.cuts != CutPolicy::Off)
        callback = [&nodes](const Eigen::VectorXd& point) { return separate_round(nodes, point); };
    PrimalHeuristic heuristic;
    if (settings.heuristic)
        heuristic = pattern_heuristic(built.net, built.task.encoding);
    out.milp = solve_milp(built.task.encoding.model, cfg, callback, heuristic);
    out.total_seconds = bounds_seconds + std::chrono::duration<double>(clock::now() - start).count();
    return out;
}

RunOutcome execute(const NeuralNet& net, const AdversaryInstance& inst, TaskKind kind, const RunSpec& spec,
                   const SolverSettings& settings, std::uint64_t seed)
{
    const auto start = std::chrono::steady_clock::now();
    const BuiltModel built = build_model(net, inst, kind, spec, settings, seed);
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return execute(built, spec, settings, seconds);
}

}  // namespace relumip::cli
