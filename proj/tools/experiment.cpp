#include "experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <nlohmann/json.hpp>
#include <ostream>
#include <spdlog/spdlog.h>
#include <thread>

#include <toml.hpp>

#include "relumip/error.hpp"

namespace relumip::cli {

namespace {

namespace fs = std::filesystem;

template <typename T>
T get_or(const toml::table& t, const char* key, T fallback)
{
    if (const auto* node = t.get(key)) {
        if (auto v = node->value<T>())
            return *v;
        throw ParseError(std::string("config: key \"") + key + "\" has the wrong type");
    }
    return fallback;
}

const toml::table& section(const toml::table& root, const char* name, bool required)
{
    static const toml::table empty;
    const auto* node = root.get(name);
    if (!node) {
        if (required)
            throw ParseError(std::string("config: missing [") + name + "] section");
        return empty;
    }
    if (!node->is_table())
        throw ParseError(std::string("config: [") + name + "] must be a table");
    return *node->as_table();
}

void apply_run_options(RunSpec& spec, const toml::table& t, const RunSpec& defaults)
{
    spec.strategy = parse_strategy(get_or<std::string>(t, "strategy", to_string(defaults.strategy)));
    spec.obbt = parse_obbt_mode(get_or<std::string>(t, "obbt", to_string(defaults.obbt)));
    spec.cuts = parse_cut_policy(get_or<std::string>(t, "cuts", to_string(defaults.cuts)));
    spec.cut_frequency_k = static_cast<int>(get_or<std::int64_t>(t, "cut_freq_k", defaults.cut_frequency_k));
    spec.stabilize = get_or<bool>(t, "stabilize", defaults.stabilize);
    if (spec.cut_frequency_k < 1)
        throw ParseError("config: cut_freq_k must be at least 1");
}

nlohmann::json toml_to_json(const toml::node& node)
{
    if (auto v = node.value<std::int64_t>(); v && node.is_integer())
        return *v;
    if (auto v = node.value<double>())
        return *v;
    if (auto v = node.value<bool>())
        return *v;
    if (auto v = node.value<std::string>())
        return *v;
    if (const auto* arr = node.as_array()) {
        nlohmann::json out = nlohmann::json::array();
        for (const auto& e : *arr)
            out.push_back(toml_to_json(e));
        return out;
    }
    throw ParseError("config: unsupported value in [instances] overrides");
}

}  // namespace

ExperimentConfig load_experiment(const fs::path& path)
{
    toml::table root;
    try {
        root = toml::parse_file(path.string());
    } catch (const toml::parse_error& e) {
        throw ParseError(path.string() + ": " + std::string(e.description()));
    }
    const fs::path base = path.parent_path();
    auto resolve = [&](const std::string& p) { return fs::path(p).is_absolute() ? fs::path(p) : base / p; };

    ExperimentConfig cfg;
    const toml::table& network = section(root, "network", true);
    cfg.network = resolve(get_or<std::string>(network, "path", ""));
    if (cfg.network.empty())
        throw ParseError("config: [network] needs a path");

    const toml::table& inst = section(root, "instances", true);
    cfg.task = parse_task(get_or<std::string>(inst, "task", "adversary"));
    if (const auto* paths = inst.get_as<toml::array>("paths")) {
        for (const auto& p : *paths) {
            const auto s = p.value<std::string>();
            if (!s)
                throw ParseError("config: [instances] paths must be strings");
            cfg.instances.push_back(resolve(*s));
        }
    }
    if (const auto dir = inst.get_as<std::string>("dir")) {
        const fs::path d = resolve(dir->get());
        if (!fs::is_directory(d))
            throw ParseError("config: instance directory " + d.string() + " does not exist");
        std::vector<fs::path> found;
        for (const auto& e : fs::directory_iterator(d))
            if (e.path().extension() == ".json")
                found.push_back(e.path());
        std::sort(found.begin(), found.end());
        cfg.instances.insert(cfg.instances.end(), found.begin(), found.end());
    }
    const auto limit = get_or<std::int64_t>(inst, "limit", 0);
    if (limit > 0 && static_cast<std::size_t>(limit) < cfg.instances.size())
        cfg.instances.resize(static_cast<std::size_t>(limit));
    if (cfg.instances.empty())
        throw ParseError("config: no instances (set [instances] paths or dir)");
    nlohmann::json overrides = nlohmann::json::object();
    for (const char* key : {"epsilon", "norm", "adv_label", "clip", "eps_cap"})
        if (const auto* node = inst.get(key))
            overrides[key] = toml_to_json(*node);
    cfg.instance_overrides_json = overrides.dump();

    const toml::table& forms = section(root, "formulations", true);
    RunSpec defaults;
    apply_run_options(defaults, forms, RunSpec{});
    const auto* runs = forms.get_as<toml::array>("runs");
    if (!runs || runs->empty())
        throw ParseError("config: [formulations] needs a non-empty runs list");
    for (const auto& r : *runs) {
        RunSpec spec;
        if (const auto s = r.value<std::string>()) {
            spec = parse_run_label(*s);
            apply_run_options(spec, toml::table{}, defaults);
        } else if (const auto* t = r.as_table()) {
            spec = parse_run_label(get_or<std::string>(*t, "formulation", ""));
            apply_run_options(spec, *t, defaults);
            spec.label = get_or<std::string>(*t, "label", spec.label);
        } else {
            throw ParseError("config: runs entries must be strings or tables");
        }
        cfg.runs.push_back(spec);
    }

    const toml::table& solver = section(root, "solver", false);
    BnbConfig& bnb = cfg.solver.bnb;
    bnb.time_limit = get_or<double>(solver, "time_limit", kInf);
    bnb.node_limit = get_or<std::int64_t>(solver, "node_limit", bnb.node_limit);
    bnb.rel_gap = get_or<double>(solver, "rel_gap", bnb.rel_gap);
    bnb.abs_gap = get_or<double>(solver, "abs_gap", bnb.abs_gap);
    const std::string selection = get_or<std::string>(solver, "node_selection", "best-bound");
    if (selection == "best-bound")
        bnb.node_selection = NodeSelection::BestBound;
    else if (selection == "depth-first")
        bnb.node_selection = NodeSelection::DepthFirst;
    else
        throw ParseError("config: node_selection must be best-bound or depth-first");
    bnb.branch_rule = parse_branch_rule(get_or<std::string>(solver, "branching", to_string(bnb.branch_rule)));
    cfg.solver.lp_iteration_limit = get_or<std::int64_t>(solver, "lp_iter_limit", cfg.solver.lp_iteration_limit);
    cfg.solver.obbt_lp_seconds = get_or<double>(solver, "obbt_lp_seconds", kInf);
    return cfg;
}

std::vector<ExperimentRow> run_experiment(const ExperimentConfig& config, std::uint64_t seed, int jobs)
{
    const NeuralNet net = load_network_file(config.network);
    const nlohmann::json overrides = nlohmann::json::parse(config.instance_overrides_json);

    const std::size_t n_inst = config.instances.size(), n_runs = config.runs.size();
    std::vector<ExperimentRow> rows(n_inst * n_runs);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t k = next++; k < rows.size(); k = next++) {
            const std::size_t i = k / n_runs, r = k % n_runs;
            ExperimentRow& row = rows[k];
            row.instance = config.instances[i].stem().string();
            row.seed = seed + i;
            row.spec = config.runs[r];
            try {
                std::ifstream in(config.instances[i]);
                if (!in)
                    throw ParseError("cannot open instance file " + config.instances[i].string());
                nlohmann::json doc = nlohmann::json::parse(in);
                doc.update(overrides);
                const AdversaryInstance inst = load_instance(doc, net, row.seed);
                if (!inst.id.empty())
                    row.instance = inst.id;
                const RunOutcome out = execute(net, inst, config.task, row.spec, config.solver, row.seed);
                row.status = to_string(out.milp.status);
                row.value = out.milp.incumbent_value;
                row.bound = out.milp.best_bound;
                row.root_bound = out.milp.root_bound;
                row.nodes = out.milp.nodes_explored;
                row.cuts = out.milp.cuts_added;
                row.bounds_time = out.bounds_seconds;
                row.wall_time = out.total_seconds;
                spdlog::info("instance={} formulation={} status={} value={} nodes={} time={:.3f}", row.instance,
                             row.spec.label, row.status, row.value, row.nodes, row.wall_time);
            } catch (const std::exception& e) {
                row.status = "error";
                row.error = e.what();
                spdlog::warn("instance={} formulation={} failed: {}", row.instance, row.spec.label, e.what());
            }
        }
    };
    const int threads = std::max(1, std::min<int>(jobs, static_cast<int>(rows.size())));
    std::vector<std::thread> pool;
    for (int t = 1; t < threads; ++t)
        pool.emplace_back(worker);
    worker();
    for (auto& t : pool)
        t.join();
    return rows;
}

std::string csv_number(double v)
{
    if (std::isnan(v))
        return "nan";
    if (std::isinf(v))
        return v > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

namespace {

std::string csv_text(const std::string& s)
{
    if (s.find_first_of(",\"\n") == std::string::npos)
        return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"')
            out += '"';
        out += c == '\n' ? ' ' : c;
    }
    return out + "\"";
}

}  // namespace

void write_csv(std::ostream& out, const std::vector<ExperimentRow>& rows, const std::vector<RunSpec>& runs)
{
    out << "instance,seed,formulation,N,strategy,obbt,cuts,status,value,bound,root_bound,nodes,cuts_added,"
           "bounds_time,wall_time,error\n";
    for (const auto& r : rows) {
        out << csv_text(r.instance) << ',' << r.seed << ',' << csv_text(r.spec.label) << ','
            << partitions_label(r.spec) << ',' << to_string(r.spec.strategy) << ',' << to_string(r.spec.obbt) << ','
            << to_string(r.spec.cuts) << ',' << r.status << ',' << csv_number(r.value) << ','
            << csv_number(r.bound) << ',' << csv_number(r.root_bound) << ',' << r.nodes << ',' << r.cuts << ','
            << csv_number(r.bounds_time) << ',' << csv_number(r.wall_time) << ',' << csv_text(r.error) << '\n';
    }

    // instances solved under every formulation
    std::map<std::string, std::size_t> solved_by;
    std::vector<std::string> order;
    for (const auto& r : rows) {
        if (!solved_by.count(r.instance))
            order.push_back(r.instance);
        solved_by[r.instance] += r.solved() ? 1 : 0;
    }
    std::size_t common = 0;
    for (const auto& name : order)
        common += solved_by[name] == runs.size() ? 1 : 0;

    out << "\n# summary: means over the " << common << " instances solved by all formulations\n";
    out << "formulation,solved,instances,mean_wall_time,mean_nodes\n";
    for (const auto& spec : runs) {
        std::size_t solved = 0, total = 0;
        double time = 0.0, nodes = 0.0;
        for (const auto& r : rows) {
            if (r.spec.label != spec.label)
                continue;
            ++total;
            solved += r.solved() ? 1 : 0;
            if (solved_by[r.instance] == runs.size()) {
                time += r.wall_time;
                nodes += static_cast<double>(r.nodes);
            }
        }
        const double n = static_cast<double>(common);
        out << csv_text(spec.label) << ',' << solved << ',' << total << ','
            << csv_number(common ? time / n : std::nan("")) << ',' << csv_number(common ? nodes / n : std::nan(""))
            << '\n';
    }
}

}  // namespace relumip::cli
