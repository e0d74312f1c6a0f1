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
#include "msqlp/lp.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <cstdio>
#include <fstream>

namespace msqlp {

MomentConfig MomentConfig::identity(int linear_dim) {
    MomentConfig cfg;
    cfg.first = Eigen::VectorXd::Zero(linear_dim);
    cfg.second = Eigen::MatrixXd::Identity(linear_dim, linear_dim);
    cfg.third = 1.0;
    cfg.fourth = 1.0;
    return cfg;
}

RelevanceMoments assemble_moments(const FeatureMap& map, const MomentConfig& config) {
    const int k = map.feature_dim();
    // Linear coordinates: degree-1 base features plus the action channels.
    std::vector<int> linear_of_feature(k, -1);
    int linear_count = 0;
    for (int i = 0; i < map.base_dim(); ++i) {
        if (map.base()[i].degree() == 1) linear_of_feature[i] = linear_count++;
    }
    for (int j = 0; j < map.action_dim(); ++j) {
        linear_of_feature[map.base_dim() + j] = linear_count++;
    }
    if (config.second.rows() != linear_count || config.second.cols() != linear_count) {
        throw InvalidArgument("assemble_moments: second-moment matrix must be " +
                              std::to_string(linear_count) + "x" + std::to_string(linear_count));
    }
    if (config.first.size() != 0 && config.first.size() != linear_count) {
        throw InvalidArgument("assemble_moments: first-moment vector length mismatch");
    }
    if (config.second != config.second.transpose()) {
        throw InvalidArgument("assemble_moments: second-moment matrix must be symmetric");
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(config.second);
    if (es.eigenvalues().minCoeff() < -1e-10 * (1.0 + es.eigenvalues().cwiseAbs().maxCoeff())) {
        throw InvalidArgument("assemble_moments: second-moment matrix must be positive semidefinite");
    }

    RelevanceMoments moments;
    auto& m = moments.feature_second_moment;
    m.resize(k, k);
    for (int i = 0; i < k; ++i) {
        const int di = (i < map.base_dim()) ? map.base()[i].degree() : 1;
        for (int j = i; j < k; ++j) {
            const int dj = (j < map.base_dim()) ? map.base()[j].degree() : 1;
            double v;
            if (di == 1 && dj == 1) {
                v = config.second(linear_of_feature[i], linear_of_feature[j]);
            } else if (di + dj == 3) {
                v = config.third;
            } else {
                v = config.fourth;
            }
            m(i, j) = v;
            m(j, i) = v;
        }
    }
    return moments;
}

RelevanceMoments empirical_moments(const FeatureMap& map, const SampleBuffer& buffer) {
    if (buffer.samples.empty()) throw InvalidArgument("empirical_moments: empty buffer");
    const int k = map.feature_dim();
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(k, k);
    for (const auto& s : buffer.samples) {
        const Eigen::VectorXd phi = features(map, s.state, s.action);
        m.noalias() += phi * phi.transpose();
    }
    m /= static_cast<double>(buffer.samples.size());
    return RelevanceMoments{(m + m.transpose()) / 2.0};
}

Eigen::VectorXd objective_coefficients(const RelevanceMoments& moments) {
    const auto& m = moments.feature_second_moment;
    const Eigen::Index k = m.rows();
    Eigen::VectorXd c(triangle_size(k));
    Eigen::Index idx = 0;
    for (Eigen::Index i = 0; i < k; ++i) {
        for (Eigen::Index j = i; j < k; ++j) {
            c[idx++] = (i == j) ? m(i, i) : 2.0 * m(i, j);
        }
    }
    return c;
}

LinearProgram assemble_constraints(const SampleBuffer& buffer,
                                   const RolloutSet& rollouts,
                                   const QParams& p_prev, double gamma,
                                   int horizon, TerminalAnchor anchor) {
    if (rollouts.horizon != horizon) {
        throw InvalidArgument("assemble_constraints: horizon does not match rollout set");
    }
    if (rollouts.trajectories.size() != buffer.samples.size()) {
        throw InvalidArgument("assemble_constraints: rollout set does not match buffer");
    }
    const FeatureMap& map = p_prev.feature_map();
    const Eigen::Index ntri = triangle_size(map.feature_dim());

    LinearProgram lp;
    lp.horizon = horizon;
    lp.dropped_count = rollouts.dropped_count();
    lp.truncated_count = rollouts.truncated_count();

    const Eigen::Index rows = rollouts.surviving_count();
    lp.constraint_matrix.resize(rows, ntri);
    lp.rhs.resize(rows);
    lp.sample_ids.reserve(rows);

    Eigen::Index r = 0;
    for (std::size_t b = 0; b < buffer.samples.size(); ++b) {
        const auto& traj = rollouts.trajectories[b];
        if (traj.dropped) continue;
        const Sample& sample = buffer.samples[b];
        const int hb = traj.effective_horizon();

        double rhs = sample.cost;
        double discount = gamma;
        for (int l = 0; l < hb - 1; ++l) {
            rhs += discount * traj.stage_costs[l];
            discount *= gamma;
        }
        // discount == gamma^hb here.
        const Eigen::VectorXd phi0 = features(map, sample.state, sample.action);
        const Eigen::VectorXd phiT = features(map, traj.states.back(), traj.terminal_action);
        if (anchor == TerminalAnchor::PreviousIterate) {
            lp.constraint_matrix.row(r) = triangle_coefficients(phi0);
            rhs += discount * phiT.dot(p_prev.matrix() * phiT);
        } else {
            lp.constraint_matrix.row(r) =
                (triangle_coefficients(phi0) - discount * triangle_coefficients(phiT)).transpose();
        }
        lp.rhs[r] = rhs;
        lp.sample_ids.push_back(static_cast<int>(b));
        ++r;
    }
    return lp;
}

void add_action_curvature_floor(LinearProgram& lp, const FeatureMap& map, double delta) {
    if (delta <= 0.0) throw InvalidArgument("add_action_curvature_floor: delta must be positive");
    const Eigen::Index ntri = triangle_size(map.feature_dim());
    if (lp.constraint_matrix.cols() != ntri) {
        throw InvalidArgument("add_action_curvature_floor: triangle size mismatch");
    }
    const int m = map.action_dim();
    const Eigen::Index old_rows = lp.constraint_matrix.rows();
    lp.constraint_matrix.conservativeResize(old_rows + m, ntri);
    lp.rhs.conservativeResize(old_rows + m);
    for (int j = 0; j < m; ++j) {
        const Eigen::Index aj = map.base_dim() + j;
        Eigen::RowVectorXd row = Eigen::RowVectorXd::Zero(ntri);
        row[triangle_index(aj, aj, map.feature_dim())] = -1.0;
        lp.constraint_matrix.row(old_rows + j) = row;
        lp.rhs[old_rows + j] = -delta;
        lp.sample_ids.push_back(-1);
    }
    lp.safeguard_rows += m;
}

Eigen::VectorXd row_average_objective(const LinearProgram& lp) {
    if (lp.constraint_matrix.rows() == 0) {
        throw InvalidArgument("row_average_objective: no constraints");
    }
    const Eigen::Index data_rows = lp.constraint_matrix.rows() - lp.safeguard_rows;
    return lp.constraint_matrix.topRows(data_rows).colwise().mean();
}

LpSolution solve(const LinearProgram& lp, const FeatureMap& map) {
    if (lp.constraint_count() < 1) throw InvalidArgument("solve: LP has no constraints");
    if (lp.objective.size() != lp.variable_count()) {
        throw InvalidArgument("solve: objective not set or wrong length");
    }
    const DenseLpResult raw = solve_dense_lp(lp.objective, lp.constraint_matrix, lp.rhs);
    LpSolution sol;
    sol.status = raw.status;
    sol.solver_iterations = raw.iterations;
    sol.diagnostics = raw.diagnostics;
    sol.feasibility_violation = raw.feasibility_violation;
    if (raw.status == LpStatus::Optimal) {
        sol.objective_value = raw.objective;
        sol.params = QParams::from_triangle(map, raw.x);
    } else {
        sol.params = QParams::zero(map);
    }
    return sol;
}

void dump_lp(const LinearProgram& lp, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw InvalidArgument("dump_lp: cannot open " + path);
    auto put = [&](double v) {
        char buf[64];
        std::snprintf(buf, sizeof buf, "%.17g", v);
        out << buf;
    };
    out << "maximize";
    for (Eigen::Index i = 0; i < lp.objective.size(); ++i) {
        out << ' ';
        put(lp.objective[i]);
    }
    out << "\n";
    for (Eigen::Index r = 0; r < lp.constraint_count(); ++r) {
        for (Eigen::Index c = 0; c < lp.variable_count(); ++c) {
            if (c) out << ' ';
            put(lp.constraint_matrix(r, c));
        }
        out << " <= ";
        put(lp.rhs[r]);
        out << "\n";
    }
}

}  // namespace msqlp
