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
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <nlohmann/json.hpp>

#include "msqlp/benchmark_system.hpp"
#include "msqlp/harness.hpp"

using namespace msqlp;

namespace {

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

struct TempDir {
    std::filesystem::path path;
    explicit TempDir(const std::string& name) {
        path = std::filesystem::temp_directory_path() / name;
        std::filesystem::remove_all(path);
        std::filesystem::create_directories(path);
    }
    ~TempDir() { std::filesystem::remove_all(path); }
};

void ensure_linear_plant() {
    static bool done = false;
    if (done) return;
    done = true;
    register_plant("test-linear", [] {
        PlantModel plant;
        plant.state_dim = 2;
        plant.input_dim = 1;
        plant.input_bounds = Eigen::VectorXd::Constant(1, 0.7);
        plant.dynamics = [](const Eigen::VectorXd& x, const Eigen::VectorXd& u) {
            Eigen::Matrix2d a;
            a << 0.9, 0.2, -0.15, 0.85;
            Eigen::Vector2d b(0.5, 1.0);
            return (a * x + b * u[0]).eval();
        };
        plant.reference_map = [](const Eigen::VectorXd& r) {
            Eigen::Matrix2d g;
            g << 0.9751, 0.0992, -0.4958, 0.9751;
            return (g * r).eval();
        };
        plant.stage_cost = [](const AugmentedState& z, const Eigen::VectorXd& u) {
            return 4.0 * z.error.squaredNorm() + u.squaredNorm();
        };
        return plant;
    });
}

ExperimentConfig small_linear_config(const std::string& out_dir) {
    ensure_linear_plant();
    ExperimentConfig cfg;
    cfg.plant_id = "test-linear";
    cfg.constrained = false;
    cfg.seed = 777;
    cfg.out_dir = out_dir;
    cfg.buffer_size = 400;
    cfg.state_radius = 0.8;
    cfg.reference_radius = 0.8;
    cfg.action_radius = 3.0;
    cfg.epsilon = 1e-7;
    cfg.max_iterations = 120;
    cfg.max_horizon = 4;
    return cfg;
}

}  // namespace

TEST_CASE("experiment config round-trips through JSON") {
    ExperimentConfig cfg;
    cfg.seed = 4242;
    cfg.constrained = false;
    cfg.k_gain = 3.5;
    cfg.epsilon = 1e-7;
    cfg.variants = {"msq-vi-lp-a"};
    const std::string text = experiment_config_to_json_string(cfg);
    const auto path = std::filesystem::temp_directory_path() / "msqlp_cfg_test.json";
    std::ofstream(path) << text;
    const ExperimentConfig back = load_experiment_config(path.string());
    CHECK(experiment_config_to_json_string(back) == text);
    CHECK(config_hash(back) == config_hash(cfg));
    std::filesystem::remove(path);
}

TEST_CASE("config hash changes with the seed") {
    ExperimentConfig a, b;
    b.seed = a.seed + 1;
    CHECK(config_hash(a) != config_hash(b));
}

TEST_CASE("unconstrained experiments strip the plant bounds") {
    ExperimentConfig cfg;
    cfg.constrained = false;
    CHECK(!plant_for(cfg).input_bounds.has_value());
    cfg.constrained = true;
    CHECK(plant_for(cfg).input_bounds.has_value());
}

TEST_CASE("variant configs choose the right initial policy mode") {
    ExperimentConfig cfg;
    const PlantModel plant = plant_for(cfg);
    const SampleBuffer buffer = build_buffer(plant, buffer_config_for(cfg, plant), cfg.seed);
    const AlgorithmConfig a = algorithm_config_for(cfg, "msq-vi-lp-a", plant, buffer);
    CHECK(a.initial_policy_mode == InitialPolicyMode::GreedyOfInitialParams);
    const AlgorithmConfig s = algorithm_config_for(cfg, "msq-vi-lp-s", plant, buffer);
    CHECK(s.initial_policy_mode == InitialPolicyMode::ExplicitLinearPolicy);
    REQUIRE(s.explicit_policy_coefficients.has_value());
    CHECK((*s.explicit_policy_coefficients)[0] == -1.5);
    const AlgorithmConfig v = algorithm_config_for(cfg, "q-vi-lp-a", plant, buffer);
    CHECK(v.horizon_gain == 0.0);
    CHECK_THROWS_AS(algorithm_config_for(cfg, "bogus", plant, buffer), InvalidArgument);
}

TEST_CASE("compare runs every variant and writes its artifacts") {
    TempDir dir("msqlp_compare_test");
    ExperimentConfig cfg = small_linear_config(dir.path.string());
    const CompareResult result = run_compare(cfg);
    REQUIRE(result.runs.size() == cfg.variants.size());
    for (const auto& [variant, run] : result.runs) {
        INFO(variant);
        CHECK(run.status == RunStatus::Converged);
    }
    // All variants land on the same fixed point for the linear plant.
    const QParams& ref = result.runs.begin()->second.final_params;
    for (const auto& [variant, run] : result.runs) {
        INFO(variant);
        CHECK(iterate_distance(run.final_params, ref) < 0.05);
    }
    CHECK(std::filesystem::exists(dir.path / "summary.json"));
    for (const auto& v : cfg.variants) {
        CHECK(std::filesystem::exists(dir.path / ("convergence_" + v + ".csv")));
    }
    const auto summary = nlohmann::json::parse(slurp((dir.path / "summary.json").string()));
    CHECK(summary["variants"].size() == cfg.variants.size());
    CHECK(summary.contains("config_hash"));
}

TEST_CASE("identical configs give byte-identical artifacts") {
    TempDir dir1("msqlp_det_a");
    TempDir dir2("msqlp_det_b");
    ExperimentConfig cfg = small_linear_config(dir1.path.string());
    cfg.variants = {"q-vi-lp-a", "q-pi-lp"};
    run_compare(cfg);
    ExperimentConfig cfg2 = cfg;
    cfg2.out_dir = dir2.path.string();
    run_compare(cfg2);
    for (const auto& v : cfg.variants) {
        const std::string f = "convergence_" + v + ".csv";
        CHECK(slurp((dir1.path / f).string()) == slurp((dir2.path / f).string()));
    }
    // The summary embeds the config hash, which covers out_dir, so compare the
    // variant payloads instead of raw bytes.
    const auto s1 = nlohmann::json::parse(slurp((dir1.path / "summary.json").string()));
    const auto s2 = nlohmann::json::parse(slurp((dir2.path / "summary.json").string()));
    CHECK(s1["variants"] == s2["variants"]);
}

TEST_CASE("sweep over horizon gains") {
    TempDir dir("msqlp_sweep_test");
    ExperimentConfig cfg = small_linear_config(dir.path.string());
    const SweepResult sweep = run_sweep_k(cfg, {0.0, 1.0, 2.0});
    REQUIRE(sweep.rows.size() == 6);
    CHECK(std::filesystem::exists(dir.path / "sweep_k.csv"));

    // Gain-zero arms reproduce the plain value-iteration counts.
    const PlantModel plant = plant_for(cfg);
    const SampleBuffer buffer = build_buffer(plant, buffer_config_for(cfg, plant), cfg.seed);
    const RunResult vi_a = run_variant(cfg, "q-vi-lp-a", plant, buffer);
    const RunResult vi_s = run_variant(cfg, "q-vi-lp-s", plant, buffer);
    for (const auto& row : sweep.rows) {
        if (row.k_gain == 0.0) {
            CHECK(row.converged);
            CHECK(row.iterations == (row.mode == "arbitrary" ? vi_a : vi_s).iterations());
        } else {
            CHECK(row.converged);
        }
    }

    const SweepResult single = run_sweep_k(cfg, {2.0});
    CHECK(single.rows.size() == 2);
    CHECK_THROWS_AS(run_sweep_k(cfg, {}), InvalidArgument);
    CHECK_THROWS_AS(run_sweep_k(cfg, {-1.0}), InvalidArgument);
}

TEST_CASE("tracking writes a complete trajectory with bounded inputs") {
    TempDir dir("msqlp_track_test");
    ExperimentConfig cfg = small_linear_config(dir.path.string());
    cfg.constrained = true;
    cfg.algorithm = "q-vi-lp-a";
    cfg.tracking_steps = 120;
    const TrackingResult result = run_tracking(cfg);
    CHECK(result.trajectory.applied_inputs.size() == 120);
    for (const auto& u : result.trajectory.applied_inputs) {
        CHECK(std::abs(u.value[0]) <= 0.7);
    }
    const std::string csv = slurp((dir.path / "tracking_constrained.csv").string());
    CHECK(csv.find("k,x1,x2,r1,r2,u_applied,u_unconstrained") != std::string::npos);
    // 120 data rows plus comment and header.
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 122);
    CHECK(std::filesystem::exists(dir.path / "controller_constrained.json"));

    // The saved controller can be replayed through the params path.
    ExperimentConfig replay = cfg;
    replay.initial_params_path = (dir.path / "controller_constrained.json").string();
    const TrackingResult again = run_tracking(replay);
    CHECK(again.trajectory.discounted_cost ==
          doctest::Approx(result.trajectory.discounted_cost).epsilon(1e-15));
}

TEST_CASE("unconstrained tracking exceeds a tight bound at least once") {
    TempDir dir("msqlp_track_unc");
    ExperimentConfig cfg = small_linear_config(dir.path.string());
    cfg.constrained = false;
    cfg.algorithm = "q-vi-lp-a";
    cfg.tracking_steps = 60;
    const TrackingResult result = run_tracking(cfg);
    double max_raw = 0.0;
    for (const auto& a : result.trajectory.unconstrained_actions) {
        max_raw = std::max(max_raw, std::abs(a[0]));
    }
    CHECK(max_raw > 0.7);
    CHECK(std::filesystem::exists(dir.path / "tracking_unconstrained.csv"));
}

TEST_CASE("single runs write a replayable artifact") {
    TempDir dir("msqlp_single_test");
    ExperimentConfig cfg = small_linear_config(dir.path.string());
    cfg.algorithm = "q-pi-lp";
    const SingleRunResult result = run_single(cfg);
    CHECK(result.run.status == RunStatus::Converged);
    const auto j = nlohmann::json::parse(slurp((dir.path / "run_q-pi-lp.json").string()));
    CHECK(j["algorithm"] == "q-pi-lp");
    CHECK(j["status"] == "converged");
    CHECK(std::filesystem::exists(dir.path / "convergence_q-pi-lp.csv"));
}

TEST_CASE("csv floats carry full precision") {
    TempDir dir("msqlp_precision_test");
    ExperimentConfig cfg = small_linear_config(dir.path.string());
    cfg.variants = {"q-vi-lp-a"};
    const CompareResult result = run_compare(cfg);
    const RunResult& run = result.runs.at("q-vi-lp-a");
    const std::string csv = slurp((dir.path / "convergence_q-vi-lp-a.csv").string());
    char expect[64];
    std::snprintf(expect, sizeof expect, "%.17g", run.history[0].buffer_q_distance);
    CHECK(csv.find(expect) != std::string::npos);
}
