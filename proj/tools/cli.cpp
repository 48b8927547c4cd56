#include "cli.hpp"

#include <CLI11.hpp>
#include <chrono>
#include <fstream>
#include <iomanip>
#include <memory>
#include <nlohmann/json.hpp>
#include <optional>
#include <ostream>
#include <spdlog/sinks/ostream_sink.h>
#include <spdlog/spdlog.h>

#include "experiment.hpp"
#include "pipeline.hpp"
#include "relumip/error.hpp"
#include "relumip/oracle.hpp"

namespace relumip::cli {

namespace {

using nlohmann::json;

struct Globals
{
    std::uint64_t seed = 0;
    int jobs = 1;
    std::string log_level = "warn";
};

/// Flags shared by the commands that build a task model.
struct ModelFlags
{
    std::string net;
    std::string instance;
    std::string task = "adversary";
    std::string formulation = "bigm";
    int num_partitions = 2;
    std::string strategy = "equal-size";
    std::string obbt = "interval";
    std::string cuts = "off";
    int cut_freq_k = 1;
    bool no_stabilize = false;
    std::optional<double> epsilon;
    std::optional<double> eps_cap;
    long lp_iter_limit = 50000;
    double obbt_lp_seconds = kInf;

    void add_network(CLI::App* cmd) { cmd->add_option("--net", net, "network JSON")->required()->check(CLI::ExistingFile); }

    void add_instance(CLI::App* cmd, bool required)
    {
        auto* opt = cmd->add_option("--instance", instance, "instance JSON")->check(CLI::ExistingFile);
        if (required)
            opt->required();
        cmd->add_option("--task", task, "adversary, verify or min-distortion")->capture_default_str();
        cmd->add_option("--epsilon", epsilon, "override the instance radius");
        cmd->add_option("--eps-cap", eps_cap, "cap on the min-distortion radius");
    }

    void add_formulation(CLI::App* cmd)
    {
        cmd->add_option("--formulation", formulation, "bigm, partition, nonlifted or hull")->capture_default_str();
        cmd->add_option("--num-partitions", num_partitions, "N for partition and nonlifted")->capture_default_str();
        cmd->add_option("--partition", strategy, "equal-size, equal-range, random or uneven")->capture_default_str();
        cmd->add_flag("--no-stabilize", no_stabilize, "encode stable nodes with binaries too");
    }

    void add_obbt(CLI::App* cmd, const char* name)
    {
        cmd->add_option(name, obbt, "interval, 2n2 or 4n")->capture_default_str();
        cmd->add_option("--lp-iter-limit", lp_iter_limit, "simplex iterations per LP")->capture_default_str();
        cmd->add_option("--obbt-lp-seconds", obbt_lp_seconds, "time limit per bounding LP");
    }

    void add_cuts(CLI::App* cmd)
    {
        cmd->add_option("--cuts", cuts, "off, root or freq")->capture_default_str();
        cmd->add_option("--cut-freq-k", cut_freq_k, "separate every k-th node with --cuts freq")
            ->check(CLI::PositiveNumber);
    }

    RunSpec spec() const
    {
        const Formulation f = parse_formulation(formulation);
        RunSpec s;
        switch (f) {
        case Formulation::BigM: s = parse_run_label("bigm"); break;
        case Formulation::ConvexHull: s = parse_run_label("hull"); break;
        case Formulation::Partitioned: s = parse_run_label("part" + std::to_string(num_partitions)); break;
        case Formulation::NonLifted: s = parse_run_label("nonlifted" + std::to_string(num_partitions)); break;
        }
        s.strategy = parse_strategy(strategy);
        s.obbt = parse_obbt_mode(obbt);
        s.cuts = parse_cut_policy(cuts);
        s.cut_frequency_k = cut_freq_k;
        s.stabilize = !no_stabilize;
        return s;
    }

    AdversaryInstance load(const NeuralNet& network, std::uint64_t seed) const
    {
        std::ifstream in(instance);
        if (!in)
            throw ParseError("cannot open instance file " + instance);
        json doc;
        try {
            doc = json::parse(in);
        } catch (const json::exception& e) {
            throw ParseError(instance + ": " + e.what());
        }
        if (epsilon)
            doc["epsilon"] = *epsilon;
        if (eps_cap)
            doc["eps_cap"] = *eps_cap;
        return load_instance(doc, network, seed);
    }
};

std::vector<double> to_vector(const Eigen::VectorXd& v)
{
    return std::vector<double>(v.data(), v.data() + v.size());
}

/// Writes to the -o file when given, otherwise to `out`.
template <typename F>
void emit(const std::string& path, std::ostream& out, F&& write)
{
    if (path.empty()) {
        write(out);
        return;
    }
    std::ofstream file(path);
    if (!file)
        throw ParseError("cannot write " + path);
    write(file);
}

json number(double v)
{
    return std::isfinite(v) ? json(v) : json(csv_number(v));
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err)
{
    CLI::App app{"ReLU network verification by partition-based MILP formulations", "relumip"};
    app.require_subcommand(1);
    app.fallthrough();  // global flags may follow the subcommand
    Globals g;
    app.add_option("--seed", g.seed, "seed for every random choice")->capture_default_str();
    app.add_option("--jobs", g.jobs, "parallel runs / OBBT threads")->check(CLI::PositiveNumber)->capture_default_str();
    app.add_option("--log-level", g.log_level, "trace, debug, info, warn, error or off")
        ->check(CLI::IsMember({"trace", "debug", "info", "warn", "error", "off"}))
        ->capture_default_str();

    ModelFlags m;
    std::string output;
    double time_limit = kInf;
    long node_limit = std::numeric_limits<long>::max();
    std::string node_selection = "best-bound", branching = "reliability";
    int max_unstable = 20;
    std::optional<double> lower, upper;
    std::string config;

    CLI::App* encode = app.add_subcommand("encode", "write the task MILP in LP format");
    m.add_network(encode);
    m.add_instance(encode, true);
    m.add_formulation(encode);
    m.add_obbt(encode, "--obbt");
    encode->add_option("-o,--output", output, "LP file (default stdout)");

    CLI::App* obbt = app.add_subcommand("obbt", "compute the bounds table as JSON");
    m.add_network(obbt);
    m.add_instance(obbt, false);
    m.add_formulation(obbt);
    m.add_obbt(obbt, "--mode");
    obbt->add_option("--lower", lower, "uniform input lower bound (without --instance)");
    obbt->add_option("--upper", upper, "uniform input upper bound (without --instance)");
    obbt->add_option("-o,--output", output, "bounds JSON (default stdout)");

    CLI::App* solve = app.add_subcommand("solve", "solve one task instance by branch-and-bound");
    m.add_network(solve);
    m.add_instance(solve, true);
    m.add_formulation(solve);
    m.add_obbt(solve, "--obbt");
    m.add_cuts(solve);
    solve->add_option("--time-limit", time_limit, "seconds");
    solve->add_option("--node-limit", node_limit, "branch-and-bound nodes");
    solve->add_option("--node-selection", node_selection, "best-bound or depth-first")
        ->check(CLI::IsMember({"best-bound", "depth-first"}))
        ->capture_default_str();
    solve->add_option("--branching", branching, "most-fractional, pseudocost, strong or reliability")
        ->check(CLI::IsMember({"most-fractional", "pseudocost", "strong", "reliability"}))
        ->capture_default_str();
    solve->add_option("-o,--output", output, "result JSON (default stdout)");

    CLI::App* oracle = app.add_subcommand("oracle", "brute-force optimum over activation patterns");
    m.add_network(oracle);
    m.add_instance(oracle, true);
    oracle->add_option("--max-unstable", max_unstable, "refuse above this many unstable nodes")->capture_default_str();
    oracle->add_option("-o,--output", output, "result JSON (default stdout)");

    CLI::App* experiment = app.add_subcommand("experiment", "run a TOML experiment manifest, write CSV");
    experiment->add_option("config", config, "experiment TOML")->required()->check(CLI::ExistingFile);
    experiment->add_option("-o,--output", output, "CSV file (default stdout)");

    CLI::App* info = app.add_subcommand("partition-info", "print the partition of every ReLU node");
    m.add_network(info);
    info->add_option("--partition", m.strategy, "equal-size, equal-range, random or uneven")->capture_default_str();
    info->add_option("--num-partitions", m.num_partitions, "N")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e, out, err) == 0 ? kSuccess : kUsage;
    }

    auto sink = std::make_shared<spdlog::sinks::ostream_sink_mt>(err);
    auto logger = std::make_shared<spdlog::logger>("relumip", sink);
    logger->set_level(spdlog::level::from_str(g.log_level));
    logger->set_pattern("[%l] %v");
    auto previous = spdlog::default_logger();
    spdlog::set_default_logger(logger);
    struct Restore
    {
        std::shared_ptr<spdlog::logger> logger;
        ~Restore() { spdlog::set_default_logger(logger); }
    } restore{previous};

    SolverSettings settings;
    settings.lp_iteration_limit = m.lp_iter_limit;
    settings.obbt_lp_seconds = m.obbt_lp_seconds;
    settings.obbt_jobs = g.jobs;

    try {
        if (*encode) {
            const NeuralNet net = load_network_file(m.net);
            const AdversaryInstance inst = m.load(net, g.seed);
            const BuiltModel built = build_model(net, inst, parse_task(m.task), m.spec(), settings, g.seed);
            emit(output, out, [&](std::ostream& o) { built.task.encoding.model.write_lp(o); });
            return kSuccess;
        }

        if (*obbt) {
            const NeuralNet net = load_network_file(m.net);
            const RunSpec spec = m.spec();
            BoundsTable table;
            ObbtStats stats;
            if (!m.instance.empty()) {
                if (lower || upper)
                    throw ParseError("obbt: give either --instance or --lower/--upper, not both");
                const AdversaryInstance inst = m.load(net, g.seed);
                table = build_model(net, inst, parse_task(m.task), spec, settings, g.seed).bounds;
            } else {
                if (!lower || !upper)
                    throw ParseError("obbt: needs --instance or both --lower and --upper");
                StrategyConfig sc;
                sc.strategy = spec.strategy;
                sc.num_partitions = spec.formulation == Formulation::BigM ? 1 : spec.num_partitions;
                sc.seed = g.seed;
                const InputBox box = InputBox::uniform(net.input_dim(), *lower, *upper);
                const PartitionPlan plan = make_partition_plan(net, sc);
                if (spec.obbt == ObbtMode::Interval) {
                    table = propagate(net, box, plan);
                } else {
                    ObbtOptions opt;
                    opt.mode = spec.obbt;
                    opt.formulation = spec.formulation;
                    opt.stabilize = spec.stabilize;
                    opt.lp_iteration_limit = settings.lp_iteration_limit;
                    opt.lp_time_limit = settings.obbt_lp_seconds;
                    opt.jobs = g.jobs;
                    table = run_obbt(net, box, plan, opt, &stats);
                }
            }
            json doc = bounds_to_json(table);
            doc["mode"] = to_string(spec.obbt);
            doc["seed"] = g.seed;
            emit(output, out, [&](std::ostream& o) { o << std::setw(1) << doc << '\n'; });
            return kSuccess;
        }

        if (*solve) {
            const NeuralNet net = load_network_file(m.net);
            const AdversaryInstance inst = m.load(net, g.seed);
            const TaskKind kind = parse_task(m.task);
            settings.bnb.time_limit = time_limit;
            settings.bnb.node_limit = node_limit;
            settings.bnb.node_selection =
                node_selection == "depth-first" ? NodeSelection::DepthFirst : NodeSelection::BestBound;
            settings.bnb.branch_rule = parse_branch_rule(branching);
            if (logger->should_log(spdlog::level::debug))
                settings.bnb.log = &err;

            const RunSpec spec = m.spec();
            const auto start = std::chrono::steady_clock::now();
            const BuiltModel built = build_model(net, inst, kind, spec, settings, g.seed);
            const RunOutcome run = execute(
                built, spec, settings, std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
            const MilpResult& r = run.milp;
            json doc = {{"instance", inst.id},
                        {"task", to_string(kind)},
                        {"formulation", spec.label},
                        {"N", partitions_label(spec)},
                        {"strategy", to_string(spec.strategy)},
                        {"obbt", to_string(spec.obbt)},
                        {"cuts", to_string(spec.cuts)},
                        {"seed", g.seed},
                        {"status", to_string(r.status)},
                        {"value", number(r.incumbent_value)},
                        {"bound", number(r.best_bound)},
                        {"root_bound", number(r.root_bound)},
                        {"nodes", r.nodes_explored},
                        {"cuts_added", r.cuts_added},
                        {"lp_iterations", r.lp_iterations},
                        {"unstable_nodes", built.bounds.unstable_count()},
                        {"bounds_time", run.bounds_seconds},
                        {"wall_time", run.total_seconds}};
            if (r.has_incumbent) {
                Eigen::VectorXd x(net.input_dim());
                const auto& ids = built.task.encoding.inputs;
                for (Eigen::Index i = 0; i < x.size(); ++i)
                    x[i] = r.incumbent_point[ids[static_cast<std::size_t>(i)]];
                doc["input"] = to_vector(x);
                doc["output"] = to_vector(forward(net, x));
            }
            emit(output, out, [&](std::ostream& o) { o << std::setw(1) << doc << '\n'; });
            return r.status == MilpStatus::Infeasible ? kInfeasible : kSuccess;
        }

        if (*oracle) {
            const NeuralNet net = load_network_file(m.net);
            const AdversaryInstance inst = m.load(net, g.seed);
            const TaskKind kind = parse_task(m.task);
            const BoundsTable bounds = propagate(net, task_box(inst, kind));
            OracleOptions opt;
            opt.max_unstable = max_unstable;
            const OracleResult r = enumerate_optimum(net, bounds, task_hook(inst, kind), opt);
            json doc = {{"instance", inst.id},
                        {"task", to_string(kind)},
                        {"feasible", r.feasible},
                        {"patterns", r.patterns},
                        {"infeasible_patterns", r.infeasible_patterns},
                        {"enumerated_nodes", r.enumerated_nodes}};
            if (r.feasible) {
                doc["value"] = r.value;
                doc["input"] = to_vector(r.input);
                doc["pattern"] = r.pattern;
            }
            emit(output, out, [&](std::ostream& o) { o << std::setw(1) << doc << '\n'; });
            return r.feasible ? kSuccess : kInfeasible;
        }

        if (*experiment) {
            const ExperimentConfig cfg = load_experiment(config);
            const auto rows = run_experiment(cfg, g.seed, g.jobs);
            emit(output, out, [&](std::ostream& o) { write_csv(o, rows, cfg.runs); });
            return kSuccess;
        }

        if (*info) {
            const NeuralNet net = load_network_file(m.net);
            StrategyConfig sc;
            sc.strategy = parse_strategy(m.strategy);
            sc.num_partitions = m.num_partitions;
            sc.seed = g.seed;
            const PartitionPlan plan = make_partition_plan(net, sc);
            json layers = json::array();
            for (const auto& layer : plan) {
                json nodes = json::array();
                for (const auto& p : layer)
                    nodes.push_back(p.subsets);
                layers.push_back(std::move(nodes));
            }
            const json doc = {{"strategy", to_string(sc.strategy)},
                              {"num_partitions", sc.num_partitions},
                              {"seed", g.seed},
                              {"layers", std::move(layers)}};
            out << std::setw(1) << doc << '\n';
            return kSuccess;
        }
    } catch (const Refused& e) {
        err << "refused: " << e.what() << '\n';
        return kInfeasible;
    } catch (const ParseError& e) {
        err << "error: " << e.what() << '\n';
        return kUsage;
    } catch (const std::exception& e) {
        err << "internal error: " << e.what() << '\n';
        return kInternal;
    }
    return kUsage;
}

}  // namespace relumip::cli
