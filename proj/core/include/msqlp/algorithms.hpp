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
#ifndef MSQLP_ALGORITHMS_HPP
#define MSQLP_ALGORITHMS_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "msqlp/lp.hpp"
#include "msqlp/plant.hpp"
#include "msqlp/qfunc.hpp"
#include "msqlp/sampling.hpp"

namespace msqlp {

enum class InitialPolicyMode { GreedyOfInitialParams, ExplicitLinearPolicy };

enum class ObjectiveMode {
    RowAverage,        // mean of the assembled constraint rows (bounded by construction)
    EmpiricalMoments,  // empirical second moments of the buffer features
    ExplicitMoments,   // assembled from MomentConfig
};

struct AlgorithmConfig {
    double gamma = 0.95;
    double epsilon = 1e-6;
    int max_iterations = 500;
    /// Horizon tuning gain; the schedule is H_i = 1 + round(gain * sqrt(i)).
    double horizon_gain = 5.0;
    /// Explicit schedule overriding the tuning law when set (values >= 1).
    std::optional<std::vector<int>> horizon_schedule;
    /// Upper bound on the per-iteration horizon (chaotic rollouts stop paying
    /// off once the trust tube dominates the tail).
    int max_horizon = 25;

    QParams initial_params;
    InitialPolicyMode initial_policy_mode = InitialPolicyMode::GreedyOfInitialParams;
    std::optional<Eigen::VectorXd> explicit_policy_coefficients;

    TerminalAnchor terminal_anchor = TerminalAnchor::CurrentIterate;
    RolloutMode rollout_mode = RolloutMode::Truncate;
    /// Rollouts stop at this state norm. Non-positive means "derive from the
    /// buffer": 3x the norm of the sampling box corner.
    double trust_region_radius = 0.0;
    /// Drop mode only: abort the iteration when fewer samples survive.
    double min_survival_fraction = 0.9;

    ObjectiveMode objective_mode = ObjectiveMode::RowAverage;
    MomentConfig moments;  // used by ObjectiveMode::ExplicitMoments

    /// Optional linear safeguard P_aa >= delta appended to every LP.
    std::optional<double> action_curvature_floor;

    /// Action domain for backup minimization and rollout policies. Unbounded
    /// reproduces the pure stationary-point policy; the default derives a box
    /// from the buffer's action sampling range.
    std::optional<ActionDomain> backup_domain;

    std::string plant_id = "benchmark-v";
    std::uint64_t seed = 0;
    BufferConfig buffer;  // provenance snapshot for reproducibility
};

struct IterationRecord {
    int index = 0;
    int horizon = 1;
    QParams params_after;
    double buffer_q_distance = 0.0;
    double matrix_inf_distance = 0.0;
    int dropped_constraints = 0;
    int truncated_rollouts = 0;
    double lp_objective = 0.0;
    double wall_seconds = 0.0;  // in-memory only; excluded from serialized artifacts
};

enum class RunStatus { Converged, MaxIterations, Aborted };

std::string to_string(RunStatus status);

struct RunResult {
    RunStatus status = RunStatus::Aborted;
    std::vector<IterationRecord> history;
    QParams final_params;
    std::string algorithm_id;
    AlgorithmConfig config;
    std::string abort_reason;

    int iterations() const { return static_cast<int>(history.size()); }
};

/// H_i = 1 + round(gain * sqrt(i)), rounding half away from zero.
int horizon(int iteration, double gain);

/// Multi-step Q-learning value iteration with per-iteration LP evaluation.
RunResult msq_vi_lp(const AlgorithmConfig& config, const PlantModel& plant,
                    const SampleBuffer& buffer);

/// The standard one-step special case (horizon == 1 for every iteration).
RunResult q_vi_lp(const AlgorithmConfig& config, const PlantModel& plant,
                  const SampleBuffer& buffer);

/// Policy-iteration baseline: one-shot policy-evaluation LP per iteration
/// (decision variables on both constraint sides), greedy improvement.
/// Requires an explicit stabilizing initial policy; the first evaluation
/// counts as an iteration because it produces the initial parameter matrix.
RunResult q_pi_lp(const AlgorithmConfig& config, const PlantModel& plant,
                  const SampleBuffer& buffer);

/// Max residual of the sub-Bellman start condition at the buffer samples:
///   max_b [ L_b + gamma * min_v Q(next_b, v) - Q(z_b, a_b) ].
/// The condition holds iff the result is <= 0.
double superbellman_residual(const QParams& params, const SampleBuffer& buffer,
                             double gamma, const ActionDomain& domain);

/// Searches the parameter box |p| <= bound for a matrix satisfying the
/// sub-Bellman start condition on the buffer with maximum margin, by
/// alternating a feasibility LP with re-selection of the minimizing actions.
/// Returns nothing when no such matrix is found.
std::optional<QParams> construct_compliant_params(
    const FeatureMap& map, const SampleBuffer& buffer, double gamma,
    const ActionDomain& domain, double bound = 50.0, int exchange_rounds = 8);

struct MonotonicityReport {
    int pairs_checked = 0;
    int first_violations = 0;    // Q^{i+1}(z_b,a_b) <= L_b + gamma min_v Q^i(next_b, v)
    int second_violations = 0;   // L_b + gamma min_v Q^i(next_b, v) <= Q^i(z_b,a_b)
    double max_first_violation = 0.0;
    double max_second_violation = 0.0;
    double tolerance = 1e-6;
};

/// Evaluates both inequalities of the monotone-decrease sandwich at every
/// buffer sample for every consecutive pair of iterates in the run.
MonotonicityReport check_monotonicity(const RunResult& result,
                                      const SampleBuffer& buffer,
                                      double tolerance = 1e-6);

/// Serialized run artifact (config, per-iteration metrics, final matrix).
/// Wall-clock timings are intentionally excluded so reruns are byte-identical.
std::string run_result_to_json_string(const RunResult& result);

/// CSV rows "iteration,horizon,buffer_q_distance,matrix_inf_distance".
std::string history_to_csv(const RunResult& result, const std::string& header_comment);

std::string algorithm_config_to_json_string(const AlgorithmConfig& config);

}  // namespace msqlp

#endif  // MSQLP_ALGORITHMS_HPP
