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
#include <CLI11.hpp>
#include <iostream>

#include "msqlp/harness.hpp"

namespace {

struct CommonFlags {
    std::string config_path;
    std::int64_t seed = -1;
    std::string out_dir;
    int constrained = -1;
    double k_gain = -1.0;
    double epsilon = -1.0;
};

void add_common(CLI::App* cmd, CommonFlags& flags) {
    cmd->add_option("--config", flags.config_path, "JSON config file");
    cmd->add_option("--seed", flags.seed, "master seed (overrides config)");
    cmd->add_option("--out-dir", flags.out_dir, "output directory (overrides config)");
    cmd->add_option("--constrained", flags.constrained,
                    "1 = apply input bounds, 0 = unconstrained (overrides config)");
    cmd->add_option("--k-gain", flags.k_gain, "horizon tuning gain K (overrides config)");
    cmd->add_option("--epsilon", flags.epsilon, "convergence threshold (overrides config)");
}

msqlp::ExperimentConfig resolve(const CommonFlags& flags, msqlp::ExperimentKind kind) {
    msqlp::ExperimentConfig cfg;
    if (!flags.config_path.empty()) cfg = msqlp::load_experiment_config(flags.config_path);
    cfg.kind = kind;
    if (flags.seed >= 0) cfg.seed = static_cast<std::uint64_t>(flags.seed);
    if (!flags.out_dir.empty()) cfg.out_dir = flags.out_dir;
    if (flags.constrained >= 0) cfg.constrained = flags.constrained != 0;
    if (flags.k_gain >= 0.0) cfg.k_gain = flags.k_gain;
    if (flags.epsilon > 0.0) cfg.epsilon = flags.epsilon;
    return cfg;
}

void report_files(const std::vector<std::string>& files) {
    for (const auto& f : files) std::cout << "wrote " << f << "\n";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Multi-step Q-learning with LP policy evaluation for constrained tracking control"};
    app.require_subcommand(1);

    CommonFlags compare_flags, sweep_flags, track_flags, run_flags;

    auto* compare = app.add_subcommand("compare", "run all configured algorithm variants on a shared buffer");
    add_common(compare, compare_flags);

    auto* sweep = app.add_subcommand("sweep-k", "iterations-to-converge as a function of the horizon gain");
    add_common(sweep, sweep_flags);
    std::vector<double> k_values;
    sweep->add_option("--k-values", k_values, "gains to sweep (overrides config)");

    auto* track = app.add_subcommand("track", "closed-loop tracking under a converged controller");
    add_common(track, track_flags);
    std::string params_path;
    int steps = -1;
    track->add_option("--params", params_path, "JSON file with a saved parameter matrix");
    track->add_option("--steps", steps, "simulation steps");

    auto* run = app.add_subcommand("run", "single algorithm run");
    add_common(run, run_flags);
    std::string algorithm;
    run->add_option("--algorithm", algorithm,
                    "msq-vi-lp-a | msq-vi-lp-s | q-pi-lp | q-vi-lp-a | q-vi-lp-s");

    CLI11_PARSE(app, argc, argv);

    try {
        if (compare->parsed()) {
            auto cfg = resolve(compare_flags, msqlp::ExperimentKind::Compare);
            const auto result = msqlp::run_compare(cfg);
            for (const auto& [variant, r] : result.runs) {
                std::cout << variant << ": " << msqlp::to_string(r.status) << " in "
                          << r.iterations() << " iterations\n";
            }
            report_files(result.files_written);
        } else if (sweep->parsed()) {
            auto cfg = resolve(sweep_flags, msqlp::ExperimentKind::SweepK);
            if (!k_values.empty()) cfg.k_values = k_values;
            const auto result = msqlp::run_sweep_k(cfg, cfg.k_values);
            for (const auto& row : result.rows) {
                std::cout << "K=" << row.k_gain << " [" << row.mode << "]: " << row.iterations
                          << (row.converged ? "" : " (not converged)") << "\n";
            }
            report_files(result.files_written);
        } else if (track->parsed()) {
            auto cfg = resolve(track_flags, msqlp::ExperimentKind::Track);
            if (!params_path.empty()) cfg.initial_params_path = params_path;
            const auto result =
                msqlp::run_tracking(cfg, std::nullopt,
                                    steps > 0 ? std::optional<int>(steps) : std::nullopt);
            std::cout << "tracked " << result.trajectory.applied_inputs.size()
                      << " steps, discounted cost " << result.trajectory.discounted_cost << "\n";
            report_files(result.files_written);
        } else if (run->parsed()) {
            auto cfg = resolve(run_flags, msqlp::ExperimentKind::SingleRun);
            if (!algorithm.empty()) cfg.algorithm = algorithm;
            const auto result = msqlp::run_single(cfg);
            std::cout << cfg.algorithm << ": " << msqlp::to_string(result.run.status) << " in "
                      << result.run.iterations() << " iterations\n";
            if (!result.run.abort_reason.empty()) {
                std::cout << "abort reason: " << result.run.abort_reason << "\n";
            }
            report_files(result.files_written);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
