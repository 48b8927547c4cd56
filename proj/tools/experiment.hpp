#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "pipeline.hpp"

namespace relumip::cli {

struct ExperimentConfig
{
    std::filesystem::path network;
    std::vector<std::filesystem::path> instances;
    TaskKind task = TaskKind::OptimalAdversary;
    /// Keys copied into every instance document before loading (epsilon, norm, adv_label, ...).
    std::string instance_overrides_json = "{}";
    std::vector<RunSpec> runs;
    SolverSettings solver;
};

/// Reads the TOML manifest; relative paths resolve against its directory.
ExperimentConfig load_experiment(const std::filesystem::path& path);

struct ExperimentRow
{
    std::string instance;
    std::uint64_t seed = 0;
    RunSpec spec;
    std::string status;
    double value = 0.0;
    double bound = 0.0;
    double root_bound = 0.0;
    long nodes = 0;
    int cuts = 0;
    double bounds_time = 0.0;
    double wall_time = 0.0;
    std::string error;

    bool solved() const { return status == "optimal" || status == "sign_determined"; }
};

/// Runs every instance under every formulation, up to `jobs` runs at a time.
std::vector<ExperimentRow> run_experiment(const ExperimentConfig& config, std::uint64_t seed, int jobs);

void write_csv(std::ostream& out, const std::vector<ExperimentRow>& rows, const std::vector<RunSpec>& runs);

/// Plain decimal with 17 significant digits; inf/-inf/nan spelled out.
std::string csv_number(double v);

}  // namespace relumip::cli
