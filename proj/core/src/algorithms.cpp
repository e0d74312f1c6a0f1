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
#include "msqlp/algorithms.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <memory>
#include <nlohmann/json.hpp>
#include <sstream>

namespace msqlp {

std::string to_string(RunStatus status) {
    switch (status) {
        case RunStatus::Converged: return "converged";
        case RunStatus::MaxIterations: return "max-iterations";
        case RunStatus::Aborted: return "aborted";
    }
    return "unknown";
}

int horizon(int iteration, double gain) {
    if (iteration < 0) throw InvalidArgument("horizon: iteration must be >= 0");
    if (gain < 0.0) throw InvalidArgument("horizon: gain must be >= 0");
    return 1 + static_cast<int>(std::floor(gain * std::sqrt(static_cast<double>(iteration)) + 0.5));
}

namespace {

ActionDomain backup_domain_for(const AlgorithmConfig& config) {
    if (config.backup_domain) return *config.backup_domain;
    if (config.buffer.action_lower.size() > 0) {
        return ActionDomain::box(config.buffer.action_lower, config.buffer.action_upper);
    }
    return ActionDomain::unbounded();
}

double trust_radius_for(const AlgorithmConfig& config) {
    if (config.trust_region_radius > 0.0) return config.trust_region_radius;
    if (config.buffer.state_upper.size() > 0) {
        return 3.0 * config.buffer.state_upper.cwiseAbs().cwiseMax(config.buffer.state_lower.cwiseAbs()).norm();
    }
    return 1e6;
}

int schedule_horizon(const AlgorithmConfig& config, int i) {
    if (config.horizon_schedule) {
        const auto& s = *config.horizon_schedule;
        if (s.empty()) throw InvalidArgument("empty horizon schedule");
        return (i < static_cast<int>(s.size())) ? s[i] : s.back();
    }
    return std::min(horizon(i, config.horizon_gain), std::max(1, config.max_horizon));
}

Eigen::VectorXd objective_for(const AlgorithmConfig& config, const FeatureMap& map,
                              const SampleBuffer& buffer, const LinearProgram& lp) {
    switch (config.objective_mode) {
        case ObjectiveMode::RowAverage:
            return row_average_objective(lp);
        case ObjectiveMode::EmpiricalMoments:
            return objective_coefficients(empirical_moments(map, buffer));
        case ObjectiveMode::ExplicitMoments:
            return objective_coefficients(assemble_moments(map, config.moments));
    }
    throw InvalidArgument("unknown objective mode");
}

std::unique_ptr<Policy> make_iteration_policy(const AlgorithmConfig& config,
                                              const QParams& current, int iteration,
                                              const ActionDomain& domain) {
    if (iteration == 0 && config.initial_policy_mode == InitialPolicyMode::ExplicitLinearPolicy) {
        if (!config.explicit_policy_coefficients) {
            throw InvalidArgument("explicit initial policy requested but no coefficients configured");
        }
        return std::make_unique<LinearFeaturePolicy>(current.feature_map(),
                                                     *config.explicit_policy_coefficients);
    }
    return std::make_unique<GreedyPolicy>(current, domain);
}

struct LoopShared {
    const AlgorithmConfig& config;
    const PlantModel& plant;
    const SampleBuffer& buffer;
    ActionDomain domain;
    double trust;
};

RunResult run_iteration_loop(const AlgorithmConfig& config, const PlantModel& plant,
                             const SampleBuffer& buffer, const std::string& algorithm_id,
                             bool pi_mode) {
    if (config.gamma < 0.0 || config.gamma > 1.0) throw InvalidArgument("gamma out of [0, 1]");
    if (config.epsilon <= 0.0) throw InvalidArgument("epsilon must be positive");
    if (config.max_iterations < 1) throw InvalidArgument("max_iterations must be >= 1");
    if (buffer.samples.empty()) throw InvalidArgument("empty buffer");
    if (pi_mode && config.initial_policy_mode != InitialPolicyMode::ExplicitLinearPolicy) {
        throw InvalidArgument("q_pi_lp requires an explicit stabilizing initial policy");
    }

    const ActionDomain domain = backup_domain_for(config);
    const double trust = trust_radius_for(config);
    const FeatureMap& map = config.initial_params.feature_map();

    RunResult result;
    result.algorithm_id = algorithm_id;
    result.config = config;
    result.status = RunStatus::MaxIterations;

    QParams current = config.initial_params;
    for (int i = 0; i < config.max_iterations; ++i) {
        const auto t0 = std::chrono::steady_clock::now();
        const int h = pi_mode ? 1 : schedule_horizon(config, i);

        std::unique_ptr<Policy> policy;
        try {
            policy = make_iteration_policy(config, current, i, domain);
        } catch (const IllPosedPolicy& e) {
            result.status = RunStatus::Aborted;
            result.abort_reason = "ill-posed greedy policy at iteration " + std::to_string(i) +
                                  ": " + e.what();
            break;
        }

        RolloutSet rollouts =
            collect_rollouts(plant, buffer, *policy, h, trust, config.rollout_mode, i);
        if (config.rollout_mode == RolloutMode::Drop) {
            const double survival =
                static_cast<double>(rollouts.surviving_count()) / buffer.size();
            if (survival < config.min_survival_fraction) {
                result.status = RunStatus::Aborted;
                result.abort_reason = "rollout survival " + std::to_string(survival) +
                                      " below threshold at iteration " + std::to_string(i);
                break;
            }
        }

        LinearProgram lp = assemble_constraints(buffer, rollouts, current, config.gamma, h,
                                                config.terminal_anchor);
        lp.iteration = i;
        lp.objective = objective_for(config, map, buffer, lp);
        if (config.action_curvature_floor) {
            add_action_curvature_floor(lp, map, *config.action_curvature_floor);
        }

        const LpSolution sol = solve(lp, map);
        if (sol.status != LpStatus::Optimal) {
            result.status = RunStatus::Aborted;
            result.abort_reason = "LP " + to_string(sol.status) + " at iteration " +
                                  std::to_string(i) + " (" + sol.diagnostics + ")";
            break;
        }

        IterationRecord rec;
        rec.index = i;
        rec.horizon = h;
        rec.params_after = sol.params;
        rec.buffer_q_distance = buffer_q_distance(sol.params, current, buffer);
        rec.matrix_inf_distance = iterate_distance(sol.params, current);
        rec.dropped_constraints = lp.dropped_count;
        rec.truncated_rollouts = lp.truncated_count;
        rec.lp_objective = sol.objective_value;
        rec.wall_seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        result.history.push_back(rec);

        current = sol.params;
        if (rec.buffer_q_distance <= config.epsilon) {
            result.status = RunStatus::Converged;
            break;
        }
    }
    result.final_params = current;
    return result;
}

}  // namespace

RunResult msq_vi_lp(const AlgorithmConfig& config, const PlantModel& plant,
                    const SampleBuffer& buffer) {
    return run_iteration_loop(config, plant, buffer, "msq-vi-lp", false);
}

RunResult q_vi_lp(const AlgorithmConfig& config, const PlantModel& plant,
                  const SampleBuffer& buffer) {
    AlgorithmConfig cfg = config;
    cfg.horizon_gain = 0.0;
    cfg.horizon_schedule.reset();
    RunResult result = run_iteration_loop(cfg, plant, buffer, "q-vi-lp", false);
    return result;
}

RunResult q_pi_lp(const AlgorithmConfig& config, const PlantModel& plant,
                  const SampleBuffer& buffer) {
    AlgorithmConfig cfg = config;
    cfg.terminal_anchor = TerminalAnchor::CurrentIterate;  // evaluation LP is self-anchored by definition
    cfg.horizon_gain = 0.0;
    cfg.horizon_schedule.reset();
    return run_iteration_loop(cfg, plant, buffer, "q-pi-lp", true);
}

double superbellman_residual(const QParams& params, const SampleBuffer& buffer,
                             double gamma, const ActionDomain& domain) {
    if (buffer.samples.empty()) throw InvalidArgument("superbellman_residual: empty buffer");
    double worst = -std::numeric_limits<double>::infinity();
    for (const auto& s : buffer.samples) {
        const double backup = s.cost + gamma * q_min(params, s.next, domain);
        const double q = q_value(params, s.state, s.action);
        worst = std::max(worst, backup - q);
    }
    return worst;
}

std::optional<QParams> construct_compliant_params(const FeatureMap& map,
                                                  const SampleBuffer& buffer, double gamma,
                                                  const ActionDomain& domain, double bound,
                                                  int exchange_rounds) {
    if (buffer.samples.empty()) throw InvalidArgument("construct_compliant_params: empty buffer");
    const Eigen::Index ntri = triangle_size(map.feature_dim());
    const Eigen::Index b = buffer.size();

    // Variables [p; t]; constraints  -(phi_b - gamma psi_b(vhat)) p + t <= -L_b
    // plus the box |p| <= bound. Maximize t.
    Eigen::VectorXd obj = Eigen::VectorXd::Zero(ntri + 1);
    obj[ntri] = 1.0;

    std::vector<Eigen::VectorXd> vhat(b, Eigen::VectorXd::Zero(map.action_dim()));
    std::optional<QParams> best;
    double best_t = -std::numeric_limits<double>::infinity();

    for (int round = 0; round < exchange_rounds; ++round) {
        Eigen::MatrixXd a(b + 2 * ntri, ntri + 1);
        Eigen::VectorXd rhs(b + 2 * ntri);
        for (Eigen::Index k = 0; k < b; ++k) {
            const Sample& s = buffer.samples[k];
            const Eigen::VectorXd phi0 = features(map, s.state, s.action);
            const Eigen::VectorXd phi1 = features(map, s.next, vhat[k]);
            a.row(k).head(ntri) =
                -(triangle_coefficients(phi0) - gamma * triangle_coefficients(phi1)).transpose();
            a(k, ntri) = 1.0;
            rhs[k] = -s.cost;
        }
        for (Eigen::Index j = 0; j < ntri; ++j) {
            a.row(b + 2 * j).setZero();
            a(b + 2 * j, j) = 1.0;
            rhs[b + 2 * j] = bound;
            a.row(b + 2 * j + 1).setZero();
            a(b + 2 * j + 1, j) = -1.0;
            rhs[b + 2 * j + 1] = bound;
        }
        const DenseLpResult res = solve_dense_lp(obj, a, rhs);
        if (res.status != LpStatus::Optimal) return best;
        const double t = res.x[ntri];
        QParams candidate = QParams::from_triangle(map, res.x.head(ntri));
        if (t > best_t) {
            best_t = t;
            if (t >= 0.0 && superbellman_residual(candidate, buffer, gamma, domain) <= 0.0) {
                best = candidate;
            }
        }
        for (Eigen::Index k = 0; k < b; ++k) {
            vhat[k] = greedy_action(candidate, buffer.samples[k].next, domain);
        }
    }
    return best;
}

MonotonicityReport check_monotonicity(const RunResult& result, const SampleBuffer& buffer,
                                      double tolerance) {
    MonotonicityReport report;
    report.tolerance = tolerance;
    const ActionDomain domain = [&] {
        if (result.config.backup_domain) return *result.config.backup_domain;
        if (result.config.buffer.action_lower.size() > 0) {
            return ActionDomain::box(result.config.buffer.action_lower,
                                     result.config.buffer.action_upper);
        }
        return ActionDomain::unbounded();
    }();
    const double gamma = result.config.gamma;

    QParams prev = result.config.initial_params;
    for (const auto& rec : result.history) {
        const QParams& next = rec.params_after;
        for (const auto& s : buffer.samples) {
            const double mid = s.cost + gamma * q_min(prev, s.next, domain);
            const double q_new = q_value(next, s.state, s.action);
            const double q_old = q_value(prev, s.state, s.action);
            if (q_new > mid + tolerance) {
                ++report.first_violations;
                report.max_first_violation = std::max(report.max_first_violation, q_new - mid);
            }
            if (mid > q_old + tolerance) {
                ++report.second_violations;
                report.max_second_violation = std::max(report.max_second_violation, mid - q_old);
            }
        }
        ++report.pairs_checked;
        prev = next;
    }
    return report;
}

namespace {

nlohmann::json config_to_json(const AlgorithmConfig& config) {
    nlohmann::json j;
    j["gamma"] = config.gamma;
    j["epsilon"] = config.epsilon;
    j["max_iterations"] = config.max_iterations;
    j["horizon_gain"] = config.horizon_gain;
    j["max_horizon"] = config.max_horizon;
    if (config.horizon_schedule) j["horizon_schedule"] = *config.horizon_schedule;
    j["initial_params"] = nlohmann::json::parse(config.initial_params.to_json_string());
    j["initial_policy_mode"] =
        config.initial_policy_mode == InitialPolicyMode::ExplicitLinearPolicy ? "explicit-linear-policy"
                                                                              : "greedy-of-initial-params";
    if (config.explicit_policy_coefficients) {
        const auto& c = *config.explicit_policy_coefficients;
        j["explicit_policy_coefficients"] = std::vector<double>(c.data(), c.data() + c.size());
    }
    j["terminal_anchor"] =
        config.terminal_anchor == TerminalAnchor::CurrentIterate ? "current" : "previous";
    j["rollout_mode"] = config.rollout_mode == RolloutMode::Truncate ? "truncate" : "drop";
    j["trust_region_radius"] = config.trust_region_radius;
    j["min_survival_fraction"] = config.min_survival_fraction;
    switch (config.objective_mode) {
        case ObjectiveMode::RowAverage: j["objective"] = "row-average"; break;
        case ObjectiveMode::EmpiricalMoments: j["objective"] = "empirical-moments"; break;
        case ObjectiveMode::ExplicitMoments: j["objective"] = "explicit-moments"; break;
    }
    if (config.action_curvature_floor) j["action_curvature_floor"] = *config.action_curvature_floor;
    j["plant"] = config.plant_id;
    j["seed"] = config.seed;
    if (config.buffer.state_lower.size() > 0) {
        j["buffer"] = {
            {"size", config.buffer.size},
            {"state_lower", std::vector<double>(config.buffer.state_lower.data(),
                                                config.buffer.state_lower.data() +
                                                    config.buffer.state_lower.size())},
            {"state_upper", std::vector<double>(config.buffer.state_upper.data(),
                                                config.buffer.state_upper.data() +
                                                    config.buffer.state_upper.size())},
            {"action_lower", std::vector<double>(config.buffer.action_lower.data(),
                                                 config.buffer.action_lower.data() +
                                                     config.buffer.action_lower.size())},
            {"action_upper", std::vector<double>(config.buffer.action_upper.data(),
                                                 config.buffer.action_upper.data() +
                                                     config.buffer.action_upper.size())},
        };
    }
    return j;
}

}  // namespace

std::string algorithm_config_to_json_string(const AlgorithmConfig& config) {
    return config_to_json(config).dump(2);
}

std::string run_result_to_json_string(const RunResult& result) {
    nlohmann::json j;
    j["algorithm"] = result.algorithm_id;
    j["status"] = to_string(result.status);
    if (!result.abort_reason.empty()) j["abort_reason"] = result.abort_reason;
    j["config"] = config_to_json(result.config);
    nlohmann::json hist = nlohmann::json::array();
    for (const auto& rec : result.history) {
        hist.push_back({
            {"iteration", rec.index},
            {"horizon", rec.horizon},
            {"buffer_q_distance", rec.buffer_q_distance},
            {"matrix_inf_distance", rec.matrix_inf_distance},
            {"dropped_constraints", rec.dropped_constraints},
            {"truncated_rollouts", rec.truncated_rollouts},
            {"lp_objective", rec.lp_objective},
        });
    }
    j["iterations"] = hist;
    j["final_params"] = nlohmann::json::parse(result.final_params.to_json_string());
    return j.dump(2);
}

std::string history_to_csv(const RunResult& result, const std::string& header_comment) {
    std::ostringstream out;
    if (!header_comment.empty()) out << "# " << header_comment << "\n";
    out << "iteration,horizon,buffer_q_distance,matrix_inf_distance\n";
    char buf[64];
    for (const auto& rec : result.history) {
        out << rec.index << ',' << rec.horizon << ',';
        std::snprintf(buf, sizeof buf, "%.17g", rec.buffer_q_distance);
        out << buf << ',';
        std::snprintf(buf, sizeof buf, "%.17g", rec.matrix_inf_distance);
        out << buf << '\n';
    }
    return out.str();
}

}  // namespace msqlp
