#pragma once

#include "matchfield/agentsim.hpp"
#include "matchfield/markov.hpp"
#include "matchfield/meanfield.hpp"
#include "matchfield/scenario.hpp"
#include "matchfield/table.hpp"

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <vector>

namespace matchfield {

/// (1/2) sum |p - q| over the extended type space.
double total_variation(const Distribution &p, const Distribution &q);
double linf_distance(const Distribution &p, const Distribution &q);

enum ExitCode : int {
    kExitOk = 0,
    kExitValidation = 2,
    kExitRuntime = 3,
};

enum class OutputFormat { csv, json };

struct RunOptions {
    std::filesystem::path scenario;
    std::filesystem::path out = ".";
    std::optional<std::uint64_t> seed;
    std::optional<int> replications;
    std::optional<int> periods;
    OutputFormat format = OutputFormat::csv;
    /// simulate only: write population_r<rep>.bin after the last period.
    bool dump_population = false;
};

/// Worker count: min(MATCHFIELD_THREADS or hardware concurrency, jobs).
unsigned worker_count(std::size_t jobs);

/// Calls job(r) for r = 0..count-1 on a small worker pool. The first
/// exception by replication index is rethrown after all workers join.
void for_each_replication(int count, const std::function<void(int)> &job);

/// ||evolve(hat[n-1], z^n) - hat[n]||_inf for n = 1..horizon.
std::vector<double> gz_residuals(const MeanfieldTrajectory &traj);

struct ComparisonRow {
    int replication = 0;
    int period = 0;
    int env_state = 0;
    Stage stage = Stage::hat;
    double tv = 0.0;
    double linf = 0.0;
    double gz_residual = 0.0;
};

struct ComparisonSummary {
    int period = 0;
    Stage stage = Stage::hat;
    double tv_min = 0.0, tv_q25 = 0.0, tv_median = 0.0, tv_q75 = 0.0, tv_max = 0.0;
    double linf_max = 0.0;
};

struct ComparisonReport {
    std::vector<ComparisonRow> rows;
    std::vector<ComparisonSummary> summary;
};

/// Mean-field, transition-matrix and agent paths on one shared environment
/// path per replication.
ComparisonReport run_comparison(const ScenarioConfig &scenario);

/// Linear-interpolation quantile of unsorted values, q in [0,1].
double quantile(std::vector<double> values, double q);

Table trajectory_table(const ScenarioConfig &scenario, const MeanfieldTrajectory &traj);
Table transition_table(const std::vector<TransitionMatrix> &matrices);
Table residual_table(const ScenarioConfig &scenario, const MeanfieldTrajectory &traj);
Table snapshot_table(const ScenarioConfig &scenario, const std::vector<SimulationResult> &runs);
Table comparison_table(const ScenarioConfig &scenario, const ComparisonReport &report);
Table summary_table(const ComparisonReport &report);

/// Loads the scenario and applies command-line overrides.
ScenarioConfig prepare_scenario(const RunOptions &options);

int cmd_validate(const std::filesystem::path &scenario, std::ostream &out);
int cmd_meanfield(const RunOptions &options, std::ostream &log);
int cmd_transition(const RunOptions &options, std::ostream &log);
int cmd_simulate(const RunOptions &options, std::ostream &log);
int cmd_compare(const RunOptions &options, std::ostream &log);

} // namespace matchfield
