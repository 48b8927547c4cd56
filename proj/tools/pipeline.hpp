#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>

#include "relumip/bnb.hpp"
#include "relumip/obbt.hpp"
#include "relumip/tasks.hpp"

namespace relumip::cli {

/// One formulation setting of an experiment or a single solve.
struct RunSpec
{
    std::string label;  // e.g. "part2"
    Formulation formulation = Formulation::BigM;
    int num_partitions = 1;
    Strategy strategy = Strategy::EqualSize;
    ObbtMode obbt = ObbtMode::Interval;
    CutPolicy cuts = CutPolicy::Off;
    int cut_frequency_k = 1;
    bool stabilize = true;
};

/// Parses "bigm", "hull", "partN" / "partitionN" and "nonliftedN".
RunSpec parse_run_label(const std::string& label);

/// Number of partitions as written to reports ("eta" for the hull).
std::string partitions_label(const RunSpec& spec);

struct SolverSettings
{
    BnbConfig bnb;
    long lp_iteration_limit = 50000;
    double obbt_lp_seconds = kInf;
    int obbt_jobs = 1;
    /// Fix binaries to the network's own activation pattern at LP points.
    bool heuristic = true;
};

struct BuiltModel
{
    const NeuralNet& net;
    BoundsTable bounds;
    ObbtStats obbt;
    TaskModel task;
};

BuiltModel build_model(const NeuralNet& net, const AdversaryInstance& inst, TaskKind kind, const RunSpec& spec,
                       const SolverSettings& settings, std::uint64_t seed);

struct RunOutcome
{
    MilpResult milp;
    ObbtStats obbt;
    double bounds_seconds = 0.0;
    double total_seconds = 0.0;
};

RunOutcome execute(const NeuralNet& net, const AdversaryInstance& inst, TaskKind kind, const RunSpec& spec,
                   const SolverSettings& settings, std::uint64_t seed);

/// Solves an already built model; `bounds_seconds` is the time spent building it.
RunOutcome execute(const BuiltModel& built, const RunSpec& spec, const SolverSettings& settings,
                   double bounds_seconds = 0.0);

}  // namespace relumip::cli
