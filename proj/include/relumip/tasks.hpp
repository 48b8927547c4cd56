#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>

#include <nlohmann/json_fwd.hpp>

#include "relumip/bnb.hpp"
#include "relumip/encoding.hpp"
#include "relumip/oracle.hpp"

namespace relumip {

enum class Norm { L1, LInf };
enum class TaskKind { OptimalAdversary, Verification, MinDistortion };

TaskKind parse_task(const std::string& name);
std::string to_string(TaskKind k);

struct AdversaryInstance
{
    std::string id;
    Eigen::VectorXd target;
    Eigen::Index true_label = 0;
    Eigen::Index adv_label = 1;
    double epsilon = 0.0;
    Norm norm = Norm::L1;
    double clip_lo = 0.0;
    double clip_hi = 1.0;
    /// Distortion budget for the min-distortion task; <= 0 means input_dim.
    double eps_cap = 0.0;
};

/// Parses an instance document. A missing true_label means the predicted class,
/// a missing adv_label the second-likeliest class, and "random" a seeded uniform
/// choice among the other classes.
AdversaryInstance load_instance(const nlohmann::json& doc, const NeuralNet& net, std::uint64_t seed);
AdversaryInstance load_instance_file(const std::string& path, const NeuralNet& net, std::uint64_t seed);

/// Uniform label different from `exclude`, drawn from a generator seeded with `seed`.
Eigen::Index random_label(Eigen::Index classes, Eigen::Index exclude, std::uint64_t seed);

double distortion_cap(const AdversaryInstance& inst);

/// Input box the task's MILP ranges over: the clip box intersected with the
/// perturbation box around the target.
InputBox task_box(const AdversaryInstance& inst, TaskKind kind);

/// l1 ball implied by the task (used to tighten bounds), if any.
std::optional<L1Ball> task_ball(const AdversaryInstance& inst, TaskKind kind);

/// Adds the task's rows, extra variables and objective to a model holding the network.
TaskHook task_hook(const AdversaryInstance& inst, TaskKind kind);

struct TaskModel
{
    NetworkEncoding encoding;
    TaskKind kind = TaskKind::OptimalAdversary;
    int eps_var = -1;
    bool stop_on_sign = false;
};

TaskModel build_task(const NeuralNet& net, const AdversaryInstance& inst, TaskKind kind, const BoundsTable& bounds,
                     const EncodingOptions& options);

inline TaskModel build_optimal_adversary(const NeuralNet& net, const AdversaryInstance& inst,
                                         const BoundsTable& bounds, const EncodingOptions& options)
{
    return build_task(net, inst, TaskKind::OptimalAdversary, bounds, options);
}

inline TaskModel build_verification(const NeuralNet& net, const AdversaryInstance& inst, const BoundsTable& bounds,
                                    const EncodingOptions& options)
{
    return build_task(net, inst, TaskKind::Verification, bounds, options);
}

inline TaskModel build_min_distortion(const NeuralNet& net, const AdversaryInstance& inst, const BoundsTable& bounds,
                                      const EncodingOptions& options)
{
    return build_task(net, inst, TaskKind::MinDistortion, bounds, options);
}

/// Evaluates the network at the LP point's input and proposes its activation
/// pattern for the encoded binaries.
PrimalHeuristic pattern_heuristic(const NeuralNet& net, const NetworkEncoding& encoding);

}  // namespace relumip
