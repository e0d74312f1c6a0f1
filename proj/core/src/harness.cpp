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
#include "msqlp/harness.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <future>
#include <nlohmann/json.hpp>
#include <sstream>

#include "msqlp/benchmark_system.hpp"

namespace msqlp {

namespace {

std::string fmt17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string kind_name(ExperimentKind kind) {
    switch (kind) {
        case ExperimentKind::Compare: return "compare";
        case ExperimentKind::SweepK: return "sweep-k";
        case ExperimentKind::Track: return "track";
        case ExperimentKind::SingleRun: return "run";
    }
    return "unknown";
}

ExperimentKind kind_from_name(const std::string& name) {
    if (name == "compare") return ExperimentKind::Compare;
    if (name == "sweep-k") return ExperimentKind::SweepK;
    if (name == "track") return ExperimentKind::Track;
    if (name == "run") return ExperimentKind::SingleRun;
    throw InvalidArgument("unknown experiment kind: " + name);
}

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InvalidArgument("cannot open for writing: " + path);
    out << text;
}

std::string hash_comment(const ExperimentConfig& config) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "config_hash=%016llx seed=%llu",
                  static_cast<unsigned long long>(config_hash(config)),
                  static_cast<unsigned long long>(config.seed));
    return buf;
}

}  // namespace

std::string experiment_config_to_json_string(const ExperimentConfig& c) {
    nlohmann::json j;
    j["experiment"] = kind_name(c.kind);
    j["constrained"] = c.constrained;
    j["plant"] = c.plant_id;
    j["seed"] = c.seed;
    j["out_dir"] = c.out_dir;
    j["gamma"] = c.gamma;
    j["epsilon"] = c.epsilon;
    j["max_iterations"] = c.max_iterations;
    j["k_gain"] = c.k_gain;
    j["max_horizon"] = c.max_horizon;
    j["k_values"] = c.k_values;
    j["tracking_steps"] = c.tracking_steps;
    j["divergence_threshold"] = c.divergence_threshold;
    j["buffer"] = {{"size", c.buffer_size},
                   {"state_radius", c.state_radius},
                   {"reference_radius", c.reference_radius},
                   {"action_radius", c.action_radius}};
    j["terminal_anchor"] = c.terminal_anchor == TerminalAnchor::CurrentIterate ? "current" : "previous";
    j["rollout_mode"] = c.rollout_mode == RolloutMode::Truncate ? "truncate" : "drop";
    switch (c.objective_mode) {
        case ObjectiveMode::RowAverage: j["objective"] = "row-average"; break;
        case ObjectiveMode::EmpiricalMoments: j["objective"] = "empirical-moments"; break;
        case ObjectiveMode::ExplicitMoments: j["objective"] = "explicit-moments"; break;
    }
    if (c.moments) {
        j["moments"] = {{"third", c.moments->third},
                        {"fourth", c.moments->fourth},
                        {"second_diagonal", c.moments->second.diagonal().mean()}};
    }
    j["trust_region_radius"] = c.trust_region_radius;
    j["min_survival_fraction"] = c.min_survival_fraction;
    if (c.action_curvature_floor) j["action_curvature_floor"] = *c.action_curvature_floor;
    j["compliant_initialization"] = c.compliant_initialization;
    j["variants"] = c.variants;
    j["algorithm"] = c.algorithm;
    if (c.initial_params_path) j["initial_params_path"] = *c.initial_params_path;
    j["dump_lps"] = c.dump_lps;
    return j.dump(2);
}

ExperimentConfig load_experiment_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InvalidArgument("cannot open config: " + path);
    nlohmann::json j;
    in >> j;

    ExperimentConfig c;
    if (j.contains("experiment")) c.kind = kind_from_name(j["experiment"].get<std::string>());
    if (j.contains("constrained")) c.constrained = j["constrained"].get<bool>();
    if (j.contains("plant")) c.plant_id = j["plant"].get<std::string>();
    if (j.contains("seed")) c.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("out_dir")) c.out_dir = j["out_dir"].get<std::string>();
    if (j.contains("gamma")) c.gamma = j["gamma"].get<double>();
    if (j.contains("epsilon")) c.epsilon = j["epsilon"].get<double>();
    if (j.contains("max_iterations")) c.max_iterations = j["max_iterations"].get<int>();
    if (j.contains("k_gain")) c.k_gain = j["k_gain"].get<double>();
    if (j.contains("max_horizon")) c.max_horizon = j["max_horizon"].get<int>();
    if (j.contains("k_values")) c.k_values = j["k_values"].get<std::vector<double>>();
    if (j.contains("tracking_steps")) c.tracking_steps = j["tracking_steps"].get<int>();
    if (j.contains("divergence_threshold")) c.divergence_threshold = j["divergence_threshold"].get<double>();
    if (j.contains("buffer")) {
        const auto& b = j["buffer"];
        if (b.contains("size")) c.buffer_size = b["size"].get<int>();
        if (b.contains("state_radius")) c.state_radius = b["state_radius"].get<double>();
        if (b.contains("reference_radius")) c.reference_radius = b["reference_radius"].get<double>();
        if (b.contains("action_radius")) c.action_radius = b["action_radius"].get<double>();
    }
    if (j.contains("terminal_anchor")) {
        const auto a = j["terminal_anchor"].get<std::string>();
        if (a == "current") c.terminal_anchor = TerminalAnchor::CurrentIterate;
        else if (a == "previous") c.terminal_anchor = TerminalAnchor::PreviousIterate;
        else throw InvalidArgument("terminal_anchor must be 'current' or 'previous'");
    }
    if (j.contains("rollout_mode")) {
        const auto a = j["rollout_mode"].get<std::string>();
        if (a == "truncate") c.rollout_mode = RolloutMode::Truncate;
        else if (a == "drop") c.rollout_mode = RolloutMode::Drop;
        else throw InvalidArgument("rollout_mode must be 'truncate' or 'drop'");
    }
    if (j.contains("objective")) {
        const auto a = j["objective"].get<std::string>();
        if (a == "row-average") c.objective_mode = ObjectiveMode::RowAverage;
        else if (a == "empirical-moments") c.objective_mode = ObjectiveMode::EmpiricalMoments;
        else if (a == "explicit-moments") c.objective_mode = ObjectiveMode::ExplicitMoments;
        else throw InvalidArgument("unknown objective mode: " + a);
    }
    if (j.contains("moments")) {
        MomentConfig m;
        const auto& mj = j["moments"];
        const int linear_dim = mj.value("linear_dim", 5);
        m = MomentConfig::identity(linear_dim);
        if (mj.contains("third")) m.third = mj["third"].get<double>();
        if (mj.contains("fourth")) m.fourth = mj["fourth"].get<double>();
        if (mj.contains("second_scale")) m.second *= mj["second_scale"].get<double>();
        c.moments = m;
    }
    if (j.contains("trust_region_radius")) c.trust_region_radius = j["trust_region_radius"].get<double>();
    if (j.contains("min_survival_fraction")) c.min_survival_fraction = j["min_survival_fraction"].get<double>();
    if (j.contains("action_curvature_floor") && !j["action_curvature_floor"].is_null()) {
        c.action_curvature_floor = j["action_curvature_floor"].get<double>();
    }
    if (j.contains("compliant_initialization")) c.compliant_initialization = j["compliant_initialization"].get<bool>();
    if (j.contains("variants")) c.variants = j["variants"].get<std::vector<std::string>>();
    if (j.contains("algorithm")) c.algorithm = j["algorithm"].get<std::string>();
    if (j.contains("initial_params_path")) c.initial_params_path = j["initial_params_path"].get<std::string>();
    if (j.contains("dump_lps")) c.dump_lps = j["dump_lps"].get<bool>();
    return c;
}

std::uint64_t config_hash(const ExperimentConfig& config) {
    const std::string canon = experiment_config_to_json_string(config);
    std::uint64_t h = 1469598103934665603ull;
    for (const unsigned char ch : canon) {
        h ^= ch;
        h *= 1099511628211ull;
    }
    return h;
}

PlantModel plant_for(const ExperimentConfig& config) {
    PlantModel plant = make_plant(config.plant_id);
    if (!config.constrained) plant = plant.without_bounds();
    return plant;
}

BufferConfig buffer_config_for(const ExperimentConfig& config, const PlantModel& plant) {
    BufferConfig cfg = BufferConfig::uniform(config.buffer_size, plant.state_dim,
                                             config.state_radius, plant.input_dim,
                                             config.action_radius);
    cfg.state_lower.tail(plant.state_dim).setConstant(-config.reference_radius);
    cfg.state_upper.tail(plant.state_dim).setConstant(config.reference_radius);
    return cfg;
}

namespace {

QParams initial_params_for(const ExperimentConfig& config, const PlantModel& plant,
                           const SampleBuffer& buffer) {
    const FeatureMap map = FeatureMap::benchmark();
    if (plant.state_dim != map.state_dim() || plant.input_dim != map.action_dim()) {
        throw InvalidArgument("built-in feature map does not match plant dimensions");
    }
    if (config.compliant_initialization) {
        const ActionDomain domain =
            ActionDomain::symmetric_box(plant.input_dim, config.action_radius);
        auto compliant = construct_compliant_params(map, buffer, config.gamma, domain);
        if (compliant) return *compliant;
        // fall through to the stock matrix when construction fails
    }
    return QParams::from_matrix(map, benchmark::initial_matrix());
}

}  // namespace

AlgorithmConfig algorithm_config_for(const ExperimentConfig& config,
                                     const std::string& variant,
                                     const PlantModel& plant,
                                     const SampleBuffer& buffer) {
    AlgorithmConfig a;
    a.gamma = config.gamma;
    a.epsilon = config.epsilon;
    a.max_iterations = config.max_iterations;
    a.horizon_gain = config.k_gain;
    a.max_horizon = config.max_horizon;
    a.initial_params = initial_params_for(config, plant, buffer);
    a.terminal_anchor = config.terminal_anchor;
    a.rollout_mode = config.rollout_mode;
    a.trust_region_radius = config.trust_region_radius;
    a.min_survival_fraction = config.min_survival_fraction;
    a.objective_mode = config.objective_mode;
    if (config.moments) a.moments = *config.moments;
    a.action_curvature_floor = config.action_curvature_floor;
    a.plant_id = config.plant_id;
    a.seed = config.seed;
    a.buffer = buffer.config;

    const bool stabilizing = variant == "msq-vi-lp-s" || variant == "q-vi-lp-s" || variant == "q-pi-lp";
    if (stabilizing) {
        a.initial_policy_mode = InitialPolicyMode::ExplicitLinearPolicy;
        a.explicit_policy_coefficients = benchmark::stabilizing_policy_coefficients();
    } else {
        a.initial_policy_mode = InitialPolicyMode::GreedyOfInitialParams;
    }
    if (variant == "q-vi-lp-a" || variant == "q-vi-lp-s") a.horizon_gain = 0.0;
    return a;
}

RunResult run_variant(const ExperimentConfig& config, const std::string& variant,
                      const PlantModel& plant, const SampleBuffer& buffer) {
    const AlgorithmConfig a = algorithm_config_for(config, variant, plant, buffer);
    if (variant == "msq-vi-lp-a" || variant == "msq-vi-lp-s") return msq_vi_lp(a, plant, buffer);
    if (variant == "q-vi-lp-a" || variant == "q-vi-lp-s") return q_vi_lp(a, plant, buffer);
    if (variant == "q-pi-lp") return q_pi_lp(a, plant, buffer);
    throw InvalidArgument("unknown variant: " + variant);
}

CompareResult run_compare(const ExperimentConfig& config) {
    std::filesystem::create_directories(config.out_dir);
    const PlantModel plant = plant_for(config);
    const SampleBuffer buffer = build_buffer(plant, buffer_config_for(config, plant), config.seed);

    CompareResult result;
    std::vector<std::future<RunResult>> futures;
    futures.reserve(config.variants.size());
    for (const auto& variant : config.variants) {
        futures.push_back(std::async(std::launch::async, [&, variant] {
            return run_variant(config, variant, plant, buffer);
        }));
    }
    for (std::size_t i = 0; i < config.variants.size(); ++i) {
        result.runs.emplace(config.variants[i], futures[i].get());
    }

    const std::string comment = hash_comment(config);
    nlohmann::json summary;
    summary["config_hash"] = hash_comment(config);
    summary["seed"] = config.seed;
    summary["constrained"] = config.constrained;
    for (const auto& variant : config.variants) {
        const RunResult& run = result.runs.at(variant);
        const std::string csv_path =
            (std::filesystem::path(config.out_dir) / ("convergence_" + variant + ".csv")).string();
        write_text_file(csv_path, history_to_csv(run, comment + " variant=" + variant));
        result.files_written.push_back(csv_path);

        nlohmann::json v;
        v["status"] = to_string(run.status);
        v["iterations"] = run.iterations();
        if (!run.abort_reason.empty()) v["abort_reason"] = run.abort_reason;
        v["final_params"] = nlohmann::json::parse(run.final_params.to_json_string());
        summary["variants"][variant] = v;
    }
    const std::string summary_path = (std::filesystem::path(config.out_dir) / "summary.json").string();
    write_text_file(summary_path, summary.dump(2) + "\n");
    result.files_written.push_back(summary_path);
    return result;
}

SweepResult run_sweep_k(const ExperimentConfig& config, const std::vector<double>& k_values) {
    if (k_values.empty()) throw InvalidArgument("run_sweep_k: empty k list");
    for (double k : k_values) {
        if (k < 0.0) throw InvalidArgument("run_sweep_k: negative k");
    }
    std::filesystem::create_directories(config.out_dir);
    const PlantModel plant = plant_for(config);
    const SampleBuffer buffer = build_buffer(plant, buffer_config_for(config, plant), config.seed);

    struct Arm {
        double k;
        std::string mode;
        std::string variant;
    };
    std::vector<Arm> arms;
    for (double k : k_values) {
        arms.push_back({k, "arbitrary", "msq-vi-lp-a"});
        arms.push_back({k, "stabilizing", "msq-vi-lp-s"});
    }

    std::vector<std::future<SweepRow>> futures;
    futures.reserve(arms.size());
    for (const auto& arm : arms) {
        futures.push_back(std::async(std::launch::async, [&, arm] {
            ExperimentConfig arm_cfg = config;
            arm_cfg.k_gain = arm.k;
            SweepRow row;
            row.k_gain = arm.k;
            row.mode = arm.mode;
            try {
                const RunResult run = run_variant(arm_cfg, arm.variant, plant, buffer);
                row.iterations = run.iterations();
                row.converged = run.status == RunStatus::Converged;
            } catch (const std::exception&) {
                row.iterations = 0;
                row.converged = false;
            }
            return row;
        }));
    }

    SweepResult result;
    for (auto& f : futures) result.rows.push_back(f.get());

    std::ostringstream csv;
    csv << "# " << hash_comment(config) << "\n";
    csv << "k,mode,iterations,converged\n";
    for (const auto& row : result.rows) {
        csv << fmt17(row.k_gain) << ',' << row.mode << ',' << row.iterations << ','
            << (row.converged ? 1 : 0) << '\n';
    }
    const std::string path = (std::filesystem::path(config.out_dir) / "sweep_k.csv").string();
    write_text_file(path, csv.str());
    result.files_written.push_back(path);
    return result;
}

TrackingResult run_tracking(const ExperimentConfig& config, std::optional<QParams> params,
                            std::optional<int> steps) {
    std::filesystem::create_directories(config.out_dir);
    const PlantModel plant = plant_for(config);

    TrackingResult result;
    if (params) {
        result.params = *params;
    } else if (config.initial_params_path) {
        std::ifstream in(*config.initial_params_path);
        if (!in) throw InvalidArgument("cannot open params file: " + *config.initial_params_path);
        std::stringstream ss;
        ss << in.rdbuf();
        result.params = QParams::from_json_string(ss.str());
    } else {
        const SampleBuffer buffer = build_buffer(plant, buffer_config_for(config, plant), config.seed);
        const RunResult run = run_variant(config, config.algorithm, plant, buffer);
        if (run.status == RunStatus::Aborted) {
            throw InvalidArgument("training run aborted: " + run.abort_reason);
        }
        result.params = run.final_params;
    }

    const int n_steps = steps.value_or(config.tracking_steps);
    const QParams controller = result.params;
    const auto policy = [&controller](const AugmentedState& z) {
        return greedy_action(controller, z);
    };

    ClosedLoopTrajectory traj;
    try {
        traj = simulate_closed_loop(plant, policy, benchmark::default_initial_state(),
                                    benchmark::default_initial_reference(), n_steps, config.gamma,
                                    config.divergence_threshold);
    } catch (const NumericalOverflow& e) {
        result.diverged = true;
        throw;
    }
    result.trajectory = traj;

    std::ostringstream csv;
    csv << "# " << hash_comment(config) << "\n";
    csv << "k,x1,x2,r1,r2,u_applied,u_unconstrained\n";
    for (std::size_t k = 0; k < traj.applied_inputs.size(); ++k) {
        const Eigen::VectorXd x = traj.states[k].plant_state();
        const Eigen::VectorXd& r = traj.states[k].reference;
        csv << k << ',' << fmt17(x[0]) << ',' << fmt17(x[1]) << ',' << fmt17(r[0]) << ','
            << fmt17(r[1]) << ',' << fmt17(traj.applied_inputs[k].value[0]) << ','
            << fmt17(traj.unconstrained_actions[k][0]) << '\n';
    }
    const std::string case_name = config.constrained ? "constrained" : "unconstrained";
    const std::string path =
        (std::filesystem::path(config.out_dir) / ("tracking_" + case_name + ".csv")).string();
    write_text_file(path, csv.str());
    result.files_written.push_back(path);

    const std::string params_path =
        (std::filesystem::path(config.out_dir) / ("controller_" + case_name + ".json")).string();
    write_text_file(params_path, result.params.to_json_string() + "\n");
    result.files_written.push_back(params_path);
    return result;
}

SingleRunResult run_single(const ExperimentConfig& config) {
    std::filesystem::create_directories(config.out_dir);
    const PlantModel plant = plant_for(config);
    const SampleBuffer buffer = build_buffer(plant, buffer_config_for(config, plant), config.seed);

    SingleRunResult result;
    result.run = run_variant(config, config.algorithm, plant, buffer);

    const std::string comment = hash_comment(config);
    const std::string json_path =
        (std::filesystem::path(config.out_dir) / ("run_" + config.algorithm + ".json")).string();
    write_text_file(json_path, run_result_to_json_string(result.run) + "\n");
    result.files_written.push_back(json_path);

    const std::string csv_path =
        (std::filesystem::path(config.out_dir) / ("convergence_" + config.algorithm + ".csv")).string();
    write_text_file(csv_path, history_to_csv(result.run, comment + " variant=" + config.algorithm));
    result.files_written.push_back(csv_path);
    return result;
}

}  // namespace msqlp
