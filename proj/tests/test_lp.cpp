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

#include <Eigen/Dense>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>

#include "msqlp/benchmark_system.hpp"
#include "msqlp/lp.hpp"

using namespace msqlp;

namespace {

Eigen::VectorXd vec1(double v) { return Eigen::VectorXd::Constant(1, v); }

Eigen::VectorXd vec2(double a, double b) {
    Eigen::VectorXd v(2);
    v << a, b;
    return v;
}

// Brute-force LP oracle: enumerate all n-subsets of constraints, solve the
// square systems, keep feasible vertices, return the best objective.
double vertex_enumeration_optimum(const Eigen::VectorXd& c, const Eigen::MatrixXd& a,
                                  const Eigen::VectorXd& b) {
    const int n = static_cast<int>(c.size());
    const int m = static_cast<int>(a.rows());
    double best = -std::numeric_limits<double>::infinity();
    std::vector<int> idx(n);
    std::function<void(int, int)> rec = [&](int start, int depth) {
        if (depth == n) {
            Eigen::MatrixXd sub(n, n);
            Eigen::VectorXd rhs(n);
            for (int i = 0; i < n; ++i) {
                sub.row(i) = a.row(idx[i]);
                rhs[i] = b[idx[i]];
            }
            Eigen::FullPivLU<Eigen::MatrixXd> lu(sub);
            if (!lu.isInvertible()) return;
            const Eigen::VectorXd x = lu.solve(rhs);
            if (((a * x - b).array() <= 1e-9).all()) best = std::max(best, c.dot(x));
            return;
        }
        for (int i = start; i < m; ++i) {
            idx[depth] = i;
            rec(i + 1, depth + 1);
        }
    };
    rec(0, 0);
    return best;
}

}  // namespace

TEST_CASE("stock moment defaults produce the expected weight matrix") {
    const FeatureMap map = FeatureMap::benchmark();
    const RelevanceMoments m = assemble_moments(map, MomentConfig::identity(5));
    const auto& mc = m.feature_second_moment;
    // Identity on the linear coordinates {e1, e2, r1, r2, a}.
    const int lin[] = {0, 1, 2, 3, 6};
    for (int i : lin) {
        for (int j : lin) CHECK(mc(i, j) == (i == j ? 1.0 : 0.0));
    }
    // Unit weight wherever a squared feature is involved.
    for (int q : {4, 5}) {
        for (int i = 0; i < 7; ++i) {
            CHECK(mc(i, q) == 1.0);
            CHECK(mc(q, i) == 1.0);
        }
    }
    CHECK(mc == mc.transpose());
}

TEST_CASE("zero cross moments reduce the objective to the linear-block trace") {
    const FeatureMap map = FeatureMap::benchmark();
    MomentConfig cfg = MomentConfig::identity(5);
    cfg.third = 0.0;
    cfg.fourth = 0.0;
    const Eigen::VectorXd coeff = objective_coefficients(assemble_moments(map, cfg));
    // <P, M> = sum of the linear-feature diagonal entries of P.
    std::mt19937_64 rng(3);
    std::normal_distribution<double> g;
    Eigen::MatrixXd p(7, 7);
    for (int i = 0; i < 7; ++i)
        for (int j = 0; j < 7; ++j) p(i, j) = g(rng);
    p = ((p + p.transpose()) / 2).eval();
    const QParams qp = QParams::from_matrix(map, p);
    const double val = coeff.dot(qp.triangle());
    CHECK(val == doctest::Approx(p(0, 0) + p(1, 1) + p(2, 2) + p(3, 3) + p(6, 6)).epsilon(1e-12));
}

TEST_CASE("toy map moments match the hand expansion") {
    // Base features [e1, r1^2] with one action channel: linear coordinates
    // are (e1, a); the expansion was done symbolically for these numbers.
    const FeatureMap toy(
        {{BaseFeatureKind::Error, 0}, {BaseFeatureKind::ReferenceSquared, 0}}, 1, 1);
    MomentConfig cfg;
    cfg.first = Eigen::VectorXd::Zero(2);
    cfg.second = (Eigen::MatrixXd(2, 2) << 2.0, 0.5, 0.5, 3.0).finished();
    cfg.third = 1.5;
    cfg.fourth = 4.0;
    const auto mc = assemble_moments(toy, cfg).feature_second_moment;
    Eigen::MatrixXd expect(3, 3);
    expect << 2.0, 1.5, 0.5, 1.5, 4.0, 1.5, 0.5, 1.5, 3.0;
    CHECK(mc == expect);
}

TEST_CASE("assemble_moments validates the configuration") {
    const FeatureMap map = FeatureMap::benchmark();
    MomentConfig bad = MomentConfig::identity(4);
    CHECK_THROWS_AS(assemble_moments(map, bad), InvalidArgument);
    MomentConfig notpsd = MomentConfig::identity(5);
    notpsd.second(0, 0) = -1.0;
    CHECK_THROWS_AS(assemble_moments(map, notpsd), InvalidArgument);
}

TEST_CASE("objective coefficients represent the inner product") {
    const FeatureMap map = FeatureMap::benchmark();

    RelevanceMoments ident{Eigen::MatrixXd::Identity(7, 7)};
    Eigen::VectorXd coeff = objective_coefficients(ident);
    Eigen::Index idx = 0;
    for (int i = 0; i < 7; ++i) {
        for (int j = i; j < 7; ++j) {
            CHECK(coeff[idx++] == (i == j ? 1.0 : 0.0));
        }
    }

    RelevanceMoments zero{Eigen::MatrixXd::Zero(7, 7)};
    CHECK(objective_coefficients(zero).norm() == 0.0);

    // <P, M_c> oracle on random symmetric matrices for the stock defaults.
    const RelevanceMoments stock = assemble_moments(map, MomentConfig::identity(5));
    coeff = objective_coefficients(stock);
    std::mt19937_64 rng(8);
    std::normal_distribution<double> g;
    for (int trial = 0; trial < 10; ++trial) {
        Eigen::MatrixXd p(7, 7);
        for (int i = 0; i < 7; ++i)
            for (int j = 0; j < 7; ++j) p(i, j) = g(rng);
        p = ((p + p.transpose()) / 2).eval();
        const double inner = (p.array() * stock.feature_second_moment.array()).sum();
        const QParams qp = QParams::from_matrix(map, p);
        CHECK(coeff.dot(qp.triangle()) == doctest::Approx(inner).epsilon(1e-12));
    }
}

TEST_CASE("empirical moments average the feature outer products") {
    const PlantModel plant = benchmark::make_benchmark_plant();
    const FeatureMap map = FeatureMap::benchmark();
    const SampleBuffer buffer = build_buffer(plant, BufferConfig::uniform(40, 2, 2.0, 1, 2.0), 9);
    const auto mc = empirical_moments(map, buffer).feature_second_moment;
    Eigen::MatrixXd manual = Eigen::MatrixXd::Zero(7, 7);
    for (const auto& s : buffer.samples) {
        const Eigen::VectorXd phi = features(map, s.state, s.action);
        manual += phi * phi.transpose() / static_cast<double>(buffer.size());
    }
    CHECK((mc - manual).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("one-step constraints with the previous-iterate anchor") {
    const PlantModel plant = benchmark::make_benchmark_plant();
    const FeatureMap map = FeatureMap::benchmark();
    const SampleBuffer buffer = build_buffer(plant, BufferConfig::uniform(12, 2, 1.0, 1, 1.0), 31);
    const QParams p_prev = QParams::from_matrix(map, benchmark::initial_matrix());
    const GreedyPolicy policy(p_prev, ActionDomain::symmetric_box(1, 2.0));
    const RolloutSet rollouts = collect_rollouts(plant, buffer, policy, 1, 1e6);
    const double gamma = 0.95;
    const LinearProgram lp = assemble_constraints(buffer, rollouts, p_prev, gamma, 1,
                                                  TerminalAnchor::PreviousIterate);
    REQUIRE(lp.constraint_count() == buffer.size());
    for (int b = 0; b < buffer.size(); ++b) {
        const Sample& s = buffer.samples[b];
        const double expect =
            s.cost + gamma * q_value(p_prev, s.next, policy.action(s.next));
        CHECK(lp.rhs[b] == doctest::Approx(expect).epsilon(1e-13));
        const Eigen::VectorXd phi = features(map, s.state, s.action);
        CHECK(lp.constraint_matrix.row(b).transpose() == triangle_coefficients(phi));
    }
}

TEST_CASE("gamma = 0 kills the backup tail") {
    const PlantModel plant = benchmark::make_benchmark_plant();
    const FeatureMap map = FeatureMap::benchmark();
    const SampleBuffer buffer = build_buffer(plant, BufferConfig::uniform(10, 2, 1.0, 1, 1.0), 32);
    const QParams p_prev = QParams::from_matrix(map, benchmark::initial_matrix());
    const GreedyPolicy policy(p_prev, ActionDomain::symmetric_box(1, 2.0));
    for (int h : {1, 4}) {
        const RolloutSet rollouts = collect_rollouts(plant, buffer, policy, h, 1e6);
        const LinearProgram lp = assemble_constraints(buffer, rollouts, p_prev, 0.0, h,
                                                      TerminalAnchor::PreviousIterate);
        for (int b = 0; b < buffer.size(); ++b) {
            CHECK(lp.rhs[b] == buffer.samples[b].cost);
        }
    }
}

TEST_CASE("multi-step rhs matches independent scalar accumulation") {
    const PlantModel plant = benchmark::make_benchmark_plant();
    const FeatureMap map = FeatureMap::benchmark();
    const SampleBuffer buffer = build_buffer(plant, BufferConfig::uniform(3, 2, 0.5, 1, 0.5), 33);
    const QParams p_prev = QParams::from_matrix(map, benchmark::initial_matrix());
    const GreedyPolicy policy(p_prev, ActionDomain::symmetric_box(1, 2.0));
    const double gamma = 0.95;
    const int h = 3;
    const RolloutSet rollouts = collect_rollouts(plant, buffer, policy, h, 1e6);
    const LinearProgram lp =
        assemble_constraints(buffer, rollouts, p_prev, gamma, h, TerminalAnchor::PreviousIterate);
    for (int b = 0; b < 3; ++b) {
        // Recompute by stepping the plant directly.
        AugmentedState z = buffer.samples[b].next;
        double acc = buffer.samples[b].cost;
        double d = gamma;
        for (int l = 1; l < h; ++l) {
            const Eigen::VectorXd a = policy.action(z);
            acc += d * stage_cost_observed(plant, z, a);
            z = step_augmented(plant, z, a);
            d *= gamma;
        }
        acc += d * q_value(p_prev, z, policy.action(z));
        CHECK(lp.rhs[b] == doctest::Approx(acc).epsilon(1e-13));
    }
}

TEST_CASE("self-anchored rows carry the terminal features") {
    const PlantModel plant = benchmark::make_benchmark_plant();
    const FeatureMap map = FeatureMap::benchmark();
    const SampleBuffer buffer = build_buffer(plant, BufferConfig::uniform(6, 2, 1.0, 1, 1.0), 34);
    const QParams p_prev = QParams::from_matrix(map, benchmark::initial_matrix());
    const GreedyPolicy policy(p_prev, ActionDomain::symmetric_box(1, 2.0));
    const double gamma = 0.9;
    const RolloutSet rollouts = collect_rollouts(plant, buffer, policy, 2, 1e6);
    const LinearProgram lp =
        assemble_constraints(buffer, rollouts, p_prev, gamma, 2, TerminalAnchor::CurrentIterate);
    for (int b = 0; b < buffer.size(); ++b) {
        const auto& traj = rollouts.trajectories[b];
        const double dh = std::pow(gamma, traj.effective_horizon());
        const Eigen::VectorXd phi0 = features(map, buffer.samples[b].state, buffer.samples[b].action);
        const Eigen::VectorXd phiT = features(map, traj.states.back(), traj.terminal_action);
        const Eigen::VectorXd expect =
            triangle_coefficients(phi0) - dh * triangle_coefficients(phiT);
        CHECK((lp.constraint_matrix.row(b).transpose() - expect).cwiseAbs().maxCoeff() < 1e-14);
    }
}

TEST_CASE("constraint count does not depend on the horizon") {
    const PlantModel plant = benchmark::make_benchmark_plant();
    const FeatureMap map = FeatureMap::benchmark();
    const SampleBuffer buffer = build_buffer(plant, BufferConfig::uniform(200, 2, 5.0, 1, 2.0), 35);
    const QParams p_prev = QParams::from_matrix(map, benchmark::initial_matrix());
    const LinearFeaturePolicy policy(map, benchmark::stabilizing_policy_coefficients());
    Eigen::Index vars = -1, rows = -1;
    for (int h : {1, 3, 10}) {
        const RolloutSet rollouts = collect_rollouts(plant, buffer, policy, h, 30.0);
        const LinearProgram lp = assemble_constraints(buffer, rollouts, p_prev, 0.95, h,
                                                      TerminalAnchor::CurrentIterate);
        if (vars < 0) {
            vars = lp.variable_count();
            rows = lp.constraint_count();
        }
        CHECK(lp.variable_count() == vars);
        CHECK(lp.constraint_count() == rows);
        CHECK(lp.constraint_count() == buffer.size());
    }
}

TEST_CASE("horizon mismatch is rejected") {
    const PlantModel plant = benchmark::make_benchmark_plant();
    const SampleBuffer buffer = build_buffer(plant, BufferConfig::uniform(4, 2, 1.0, 1, 1.0), 36);
    const QParams p_prev =
        QParams::from_matrix(FeatureMap::benchmark(), benchmark::initial_matrix());
    const LinearFeaturePolicy policy(FeatureMap::benchmark(),
                                     benchmark::stabilizing_policy_coefficients());
    const RolloutSet rollouts = collect_rollouts(plant, buffer, policy, 2, 1e6);
    CHECK_THROWS_AS(assemble_constraints(buffer, rollouts, p_prev, 0.95, 3), InvalidArgument);
}

TEST_CASE("solve: objective aligned with a single constraint") {
    Eigen::VectorXd phi(7);
    phi << 1, -2, 0.5, 3, 0.25, 9, 1.5;
    const Eigen::VectorXd row = triangle_coefficients(phi);
    LinearProgram lp;
    lp.constraint_matrix = row.transpose();
    lp.rhs = Eigen::VectorXd::Constant(1, 1.0);
    lp.objective = row;
    const LpSolution sol = solve(lp, FeatureMap::benchmark());
    CHECK(sol.status == LpStatus::Optimal);
    CHECK(sol.objective_value == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("solve: zero objective is optimal at any feasible point") {
    Eigen::VectorXd phi(7);
    phi << 1, 1, 1, 1, 1, 1, 1;
    LinearProgram lp;
    lp.constraint_matrix = triangle_coefficients(phi).transpose();
    lp.rhs = Eigen::VectorXd::Constant(1, 3.0);
    lp.objective = Eigen::VectorXd::Zero(28);
    const LpSolution sol = solve(lp, FeatureMap::benchmark());
    CHECK(sol.status == LpStatus::Optimal);
    CHECK(sol.objective_value == doctest::Approx(0.0));
}

TEST_CASE("solver matches vertex enumeration on small problems") {
    std::mt19937_64 rng(4242);
    std::normal_distribution<double> g;
    for (int trial = 0; trial < 40; ++trial) {
        const int n = 3, m = 8;
        Eigen::MatrixXd a(m, n);
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < n; ++j) a(i, j) = g(rng);
        Eigen::VectorXd b(m);
        for (int i = 0; i < m; ++i) b[i] = std::abs(g(rng)) + 0.2;
        // Objective inside the row cone so the problem is bounded.
        Eigen::VectorXd w(m);
        for (int i = 0; i < m; ++i) w[i] = std::abs(g(rng));
        const Eigen::VectorXd c = a.transpose() * w;

        const double oracle = vertex_enumeration_optimum(c, a, b);
        const DenseLpResult res = solve_dense_lp(c, a, b);
        REQUIRE(res.status == LpStatus::Optimal);
        CHECK(res.objective == doctest::Approx(oracle).epsilon(1e-7));
        CHECK(res.feasibility_violation <= 1e-8);
    }
}

TEST_CASE("solver reports unboundedness") {
    // max x1 with only x2 constrained.
    Eigen::MatrixXd a(1, 2);
    a << 0, 1;
    const DenseLpResult res =
        solve_dense_lp((Eigen::VectorXd(2) << 1, 0).finished(), a, vec1(1.0));
    CHECK(res.status == LpStatus::Unbounded);
}

TEST_CASE("solver reports infeasibility of contradictory empty rows") {
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(1, 2);
    const DenseLpResult res =
        solve_dense_lp((Eigen::VectorXd(2) << 1, 0).finished(), a, vec1(-1.0));
    CHECK(res.status == LpStatus::Infeasible);
}

TEST_CASE("scaling the rhs scales the optimum on a single-constraint instance") {
    Eigen::VectorXd phi(7);
    phi << 0.5, 1, -1, 2, 4, 0.3, -0.7;
    const Eigen::VectorXd row = triangle_coefficients(phi);
    for (double lambda : {1.0, 3.5, 40.0}) {
        LinearProgram lp;
        lp.constraint_matrix = row.transpose();
        lp.rhs = Eigen::VectorXd::Constant(1, lambda);
        lp.objective = row;
        const LpSolution sol = solve(lp, FeatureMap::benchmark());
        REQUIRE(sol.status == LpStatus::Optimal);
        CHECK(sol.objective_value == doctest::Approx(lambda).epsilon(1e-7));
    }
}

TEST_CASE("optimal solutions satisfy every constraint within tolerance") {
    const PlantModel plant = benchmark::make_benchmark_plant();
    const FeatureMap map = FeatureMap::benchmark();
    const SampleBuffer buffer = build_buffer(plant, BufferConfig::uniform(500, 2, 2.0, 1, 2.0), 55);
    const QParams p_prev = QParams::from_matrix(map, benchmark::initial_matrix());
    const GreedyPolicy policy(p_prev, ActionDomain::symmetric_box(1, 2.0));
    const RolloutSet rollouts = collect_rollouts(plant, buffer, policy, 1, 12.0);
    LinearProgram lp =
        assemble_constraints(buffer, rollouts, p_prev, 0.95, 1, TerminalAnchor::CurrentIterate);
    lp.objective = row_average_objective(lp);
    const LpSolution sol = solve(lp, map);
    REQUIRE(sol.status == LpStatus::Optimal);
    const Eigen::VectorXd resid = lp.constraint_matrix * sol.params.triangle() - lp.rhs;
    for (Eigen::Index r = 0; r < resid.size(); ++r) {
        CHECK(resid[r] <= 1e-8 * (1.0 + std::abs(lp.rhs[r])));
    }
}

TEST_CASE("action curvature floor appends the expected rows") {
    const FeatureMap map = FeatureMap::benchmark();
    LinearProgram lp;
    Eigen::VectorXd phi(7);
    phi << 1, 1, 1, 1, 1, 1, 1;
    lp.constraint_matrix = triangle_coefficients(phi).transpose();
    lp.rhs = Eigen::VectorXd::Constant(1, 10.0);
    add_action_curvature_floor(lp, map, 1e-6);
    CHECK(lp.constraint_count() == 2);
    CHECK(lp.safeguard_rows == 1);
    CHECK(lp.rhs[1] == -1e-6);
    CHECK(lp.constraint_matrix(1, triangle_index(6, 6, 7)) == -1.0);
    // Row-average objective ignores safeguard rows.
    const Eigen::VectorXd avg = row_average_objective(lp);
    CHECK(avg == triangle_coefficients(phi));
}

TEST_CASE("lp dump is written") {
    LinearProgram lp;
    Eigen::VectorXd phi(7);
    phi << 1, 0, 0, 0, 0, 0, 1;
    lp.constraint_matrix = triangle_coefficients(phi).transpose();
    lp.rhs = Eigen::VectorXd::Constant(1, 2.0);
    lp.objective = triangle_coefficients(phi);
    const std::string path = (std::filesystem::temp_directory_path() / "msqlp_lp_dump.txt").string();
    dump_lp(lp, path);
    std::ifstream in(path);
    std::string first;
    std::getline(in, first);
    CHECK(first.rfind("maximize", 0) == 0);
    std::remove(path.c_str());
}
