/*
 Copyright 2026 The msqlp Authors

 Licensed under the Apache License, Version 2.0 (the "License");
 you may not use this file except in compliance with the License.
 You may obtain a copy of the License at

      https://www.apache.org/licenses/LICENSE-2.0

 Unless required by applicable law or agreed to in writing, software
 distributed under the License is distributed on an "AS IS" BASIS,
 WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 See the License for the specific language governing permissions and
 limitations under the License.
*/
#ifndef MSQLP_HARNESS_HPP
#define MSQLP_HARNESS_HPP

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "msqlp/algorithms.hpp"

namespace msqlp {

enum class ExperimentKind { Compare, SweepK, Track, SingleRun };

/// One experiment description; serializes to/from a JSON config file whose
/// keys mirror these fields (see the README for the schema).
struct ExperimentConfig {
    ExperimentKind kind = ExperimentKind::Compare;
    bool constrained = true;
    std::string plant_id = "benchmark-v";
    std::uint64_t seed = 20260810;
    std::string out_dir = "out";

    double gamma = 0.95;
    double epsilon = 1e-6;
    int max_iterations = 500;
    double k_gain = 5.0;
    int max_horizon = 1;
    std::vector<double> k_values = {0, 1, 2, 3, 4, 5, 6};
    int tracking_steps = 200;
    double divergence_threshold = 1e6;

    double state_radius = 2.0;       // error-half sampling half-width
    double reference_radius = 2.0;   // reference-half sampling half-width
    double action_radius = 2.0;      // action sampling half-width
    int buffer_size = 2000;

    TerminalAnchor terminal_anchor = TerminalAnchor::CurrentIterate;
    RolloutMode rollout_mode = RolloutMode::Truncate;
    ObjectiveMode objective_mode = ObjectiveMode::RowAverage;
    std::optional<MomentConfig> moments;  // for ObjectiveMode::ExplicitMoments
    double trust_region_radius = 0.0;     // 0 -> derived from the sampling box
    double min_survival_fraction = 0.9;
    std::optional<double> action_curvature_floor;

    /// Replace the stock initializer with a sub-Bellman compliant matrix
    /// constructed on the buffer before running.
    bool compliant_initialization = false;

    std::vector<std::string> variants = {"msq-vi-lp-a", "msq-vi-lp-s", "q-pi-lp",
                                         "q-vi-lp-a", "q-vi-lp-s"};
    std::string algorithm = "msq-vi-lp-a";  // for single runs
    std::optional<std::string> initial_params_path;  // track: reuse a saved matrix

    /// Optional dump of each iteration's LP in plain text (slow; audit only).
    bool dump_lps = false;
};

ExperimentConfig load_experiment_config(const std::string& path);
std::string experiment_config_to_json_string(const ExperimentConfig& config);
/// FNV-1a hash of the canonical config serialization; embedded in every output.
std::uint64_t config_hash(const ExperimentConfig& config);

/// Plant with bounds stripped when the experiment is unconstrained.
PlantModel plant_for(const ExperimentConfig& config);
BufferConfig buffer_config_for(const ExperimentConfig& config, const PlantModel& plant);
/// Algorithm configuration for one named variant ("msq-vi-lp-a", "q-pi-lp", ...).
AlgorithmConfig algorithm_config_for(const ExperimentConfig& config,
                                     const std::string& variant,
                                     const PlantModel& plant,
                                     const SampleBuffer& buffer);
RunResult run_variant(const ExperimentConfig& config, const std::string& variant,
                      const PlantModel& plant, const SampleBuffer& buffer);

struct CompareResult {
    std::map<std::string, RunResult> runs;
    std::vector<std::string> files_written;
};

/// Runs every configured variant on a shared buffer and writes
/// convergence_<variant>.csv plus summary.json into out_dir.
CompareResult run_compare(const ExperimentConfig& config);

struct SweepRow {
    double k_gain = 0.0;
    std::string mode;  // "arbitrary" or "stabilizing"
    int iterations = 0;
    bool converged = false;
};

struct SweepResult {
    std::vector<SweepRow> rows;
    std::vector<std::string> files_written;
};

/// Iterations-to-converge for every K in k_values under both initial-policy
/// modes; writes sweep_k.csv.
SweepResult run_sweep_k(const ExperimentConfig& config, const std::vector<double>& k_values);

struct TrackingResult {
    ClosedLoopTrajectory trajectory;
    QParams params;
    std::vector<std::string> files_written;
    bool diverged = false;
};

/// Simulates the closed loop under the greedy controller of `params` (or of a
/// freshly trained run when absent) and writes tracking_<case>.csv.
TrackingResult run_tracking(const ExperimentConfig& config,
                            std::optional<QParams> params = std::nullopt,
                            std::optional<int> steps = std::nullopt);

struct SingleRunResult {
    RunResult run;
    std::vector<std::string> files_written;
};

/// One algorithm run; writes run_<algorithm>.json and a convergence CSV.
SingleRunResult run_single(const ExperimentConfig& config);

}  // namespace msqlp

#endif  // MSQLP_HARNESS_HPP
