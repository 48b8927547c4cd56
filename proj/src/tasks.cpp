#include "relumip/tasks.hpp"

#include <fstream>
#include <nlohmann/json.hpp>
#include <random>

#include "relumip/error.hpp"

namespace relumip {

TaskKind parse_task(const std::string& name)
{
    if (name == "adversary" || name == "optimal-adversary")
        return TaskKind::OptimalAdversary;
    if (name == "verify" || name == "verification")
        return TaskKind::Verification;
    if (name == "min-distortion")
        return TaskKind::MinDistortion;
    throw Error("unknown task \"" + name + "\" (expected adversary, verify or min-distortion)");
}

std::string to_string(TaskKind k)
{
    switch (k) {
    case TaskKind::OptimalAdversary: return "adversary";
    case TaskKind::Verification: return "verify";
    case TaskKind::MinDistortion: return "min-distortion";
    }
    return "?";
}

Eigen::Index random_label(Eigen::Index classes, Eigen::Index exclude, std::uint64_t seed)
{
    if (classes < 2)
        throw Error("random label: need at least two classes");
    std::mt19937_64 rng(seed);
    const auto pick = static_cast<Eigen::Index>(rng() % static_cast<std::uint64_t>(classes - 1));
    return pick >= exclude ? pick + 1 : pick;
}

AdversaryInstance load_instance(const nlohmann::json& doc, const NeuralNet& net, std::uint64_t seed)
{
    if (!doc.is_object())
        throw ParseError("instance: expected an object");
    AdversaryInstance inst;
    try {
        inst.id = doc.value("id", std::string());
        const auto& target = doc.at("target");
        inst.target.resize(static_cast<Eigen::Index>(target.size()));
        for (std::size_t i = 0; i < target.size(); ++i)
            inst.target[static_cast<Eigen::Index>(i)] = target[i].get<double>();
        if (inst.target.size() != net.input_dim())
            throw ParseError("instance: target has " + std::to_string(inst.target.size()) + " entries, network expects " +
                             std::to_string(net.input_dim()));
        inst.true_label = doc.contains("true_label") ? doc["true_label"].get<Eigen::Index>()
                                                     : predicted_class(net, inst.target);
        if (!doc.contains("adv_label") || doc["adv_label"].is_null())
            inst.adv_label = second_likeliest(net, inst.target, inst.true_label);
        else if (doc["adv_label"].is_string()) {
            if (doc["adv_label"].get<std::string>() != "random")
                throw ParseError("instance: adv_label must be an integer or \"random\"");
            inst.adv_label = random_label(net.output_dim(), inst.true_label, seed);
        } else {
            inst.adv_label = doc["adv_label"].get<Eigen::Index>();
        }
        inst.epsilon = doc.value("epsilon", 0.0);
        const std::string norm = doc.value("norm", std::string("l1"));
        if (norm == "l1")
            inst.norm = Norm::L1;
        else if (norm == "linf")
            inst.norm = Norm::LInf;
        else
            throw ParseError("instance: norm must be \"l1\" or \"linf\"");
        if (doc.contains("clip")) {
            inst.clip_lo = doc["clip"].at(0).get<double>();
            inst.clip_hi = doc["clip"].at(1).get<double>();
        }
        inst.eps_cap = doc.value("eps_cap", 0.0);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("instance: ") + e.what());
    }
    const Eigen::Index classes = net.output_dim();
    if (inst.true_label < 0 || inst.true_label >= classes || inst.adv_label < 0 || inst.adv_label >= classes)
        throw ParseError("instance: label out of range");
    if (inst.true_label == inst.adv_label)
        throw ParseError("instance: adv_label must differ from true_label");
    if (inst.epsilon < 0.0 || inst.clip_lo > inst.clip_hi)
        throw ParseError("instance: negative epsilon or empty clip range");
    if ((inst.target.array() < inst.clip_lo).any() || (inst.target.array() > inst.clip_hi).any())
        throw ParseError("instance: target lies outside the clip range");
    return inst;
}

AdversaryInstance load_instance_file(const std::string& path, const NeuralNet& net, std::uint64_t seed)
{
    std::ifstream in(path);
    if (!in)
        throw ParseError("cannot open instance file " + path);
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(path + ": " + e.what());
    }
    return load_instance(doc, net, seed);
}

double distortion_cap(const AdversaryInstance& inst)
{
    return inst.eps_cap > 0.0 ? inst.eps_cap : static_cast<double>(inst.target.size());
}

InputBox task_box(const AdversaryInstance& inst, TaskKind kind)
{
    const double r = kind == TaskKind::MinDistortion ? distortion_cap(inst) : inst.epsilon;
    const Eigen::VectorXd lo = (inst.target.array() - r).max(inst.clip_lo).matrix();
    const Eigen::VectorXd hi = (inst.target.array() + r).min(inst.clip_hi).matrix();
    return InputBox(lo, hi);
}

std::optional<L1Ball> task_ball(const AdversaryInstance& inst, TaskKind kind)
{
    switch (kind) {
    case TaskKind::OptimalAdversary: return L1Ball{inst.target, inst.epsilon};
    case TaskKind::MinDistortion: return L1Ball{inst.target, distortion_cap(inst)};
    case TaskKind::Verification: return std::nullopt;
    }
    return std::nullopt;
}

namespace {

void check_norm(const AdversaryInstance& inst, TaskKind kind)
{
    if (kind == TaskKind::OptimalAdversary && inst.norm != Norm::L1)
        throw Error("optimal adversary task needs an l1 instance");
    if (kind == TaskKind::Verification && inst.norm != Norm::LInf)
        throw Error("verification task needs an linf instance");
}

int add_task_parts(MilpModel& m, const std::vector<int>& inputs, const std::vector<int>& outputs,
                   const AdversaryInstance& inst, TaskKind kind)
{
    const int fk = outputs.at(static_cast<std::size_t>(inst.adv_label));
    const int fj = outputs.at(static_cast<std::size_t>(inst.true_label));
    const LinearExpr margin = LinearExpr().add(fk, 1.0).add(fj, -1.0);
    switch (kind) {
    case TaskKind::OptimalAdversary:
        add_l1_ball(m, inputs, inst.target, inst.epsilon);
        m.set_objective(ObjSense::Maximize, margin);
        return -1;
    case TaskKind::Verification:
        m.set_objective(ObjSense::Maximize, margin);
        return -1;
    case TaskKind::MinDistortion: {
        const int eps = m.add_variable("eps", 0.0, distortion_cap(inst));
        add_l1_ball(m, inputs, inst.target, 0.0, eps);
        m.add_constraint(margin, RowSense::GreaterEqual, 0.0, "flip");
        m.set_objective(ObjSense::Minimize, LinearExpr().add(eps, 1.0));
        return eps;
    }
    }
    return -1;
}

}  // namespace

TaskHook task_hook(const AdversaryInstance& inst, TaskKind kind)
{
    check_norm(inst, kind);
    return [inst, kind](MilpModel& m, const std::vector<int>& inputs, const std::vector<int>& outputs) {
        add_task_parts(m, inputs, outputs, inst, kind);
    };
}

TaskModel build_task(const NeuralNet& net, const AdversaryInstance& inst, TaskKind kind, const BoundsTable& bounds,
                     const EncodingOptions& options)
{
    check_norm(inst, kind);
    EncodingOptions opts = options;
    opts.num_layers = 0;
    TaskModel out;
    out.kind = kind;
    out.encoding = encode_network(net, bounds, opts);
    out.eps_var = add_task_parts(out.encoding.model, out.encoding.inputs, out.encoding.outputs(), inst, kind);
    out.stop_on_sign = kind == TaskKind::Verification;
    return out;
}

PrimalHeuristic pattern_heuristic(const NeuralNet& net, const NetworkEncoding& encoding)
{
    return [&net, &encoding](const Eigen::VectorXd& point) {
        Eigen::VectorXd x(net.input_dim());
        for (Eigen::Index i = 0; i < x.size(); ++i)
            x[i] = point[encoding.inputs[static_cast<std::size_t>(i)]];
        const auto pre = preactivations(net, x);
        std::vector<std::pair<int, double>> fixings;
        for (const auto& node : encoding.nodes)
            if (node.sigma >= 0)
                fixings.emplace_back(node.sigma, pre[node.layer][static_cast<Eigen::Index>(node.node)] >= 0.0 ? 1.0 : 0.0);
        return fixings;
    };
}

}  // namespace relumip
