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
#ifndef MSQLP_LP_HPP
#define MSQLP_LP_HPP

#include <Eigen/Core>
#include <string>
#include <vector>

#include "msqlp/lp_solver.hpp"
#include "msqlp/qfunc.hpp"
#include "msqlp/sampling.hpp"

namespace msqlp {

/// Raw moments of the relevance measure over the map's linear features
/// (degree-1 base features followed by the action channels). `third` and
/// `fourth` broadcast to every linear-quadratic and quadratic-quadratic
/// feature pair. `first` is carried for provenance; no degree-0 feature
/// exists, so first moments never enter the assembled matrix.
struct MomentConfig {
    Eigen::VectorXd first;
    Eigen::MatrixXd second;
    double third = 1.0;
    double fourth = 1.0;

    /// Second moments = identity, third = fourth = 1 over `linear_dim` coordinates.
    static MomentConfig identity(int linear_dim);
};

/// Second-moment matrix M_c = E_c[phi phi'] of the full feature vector;
/// E_c[phi' P phi] = <P, M_c> for every symmetric P.
struct RelevanceMoments {
    Eigen::MatrixXd feature_second_moment;
};

RelevanceMoments assemble_moments(const FeatureMap& map, const MomentConfig& config);

/// Empirical moments (1/B) sum phi_b phi_b' of the buffer's state-action pairs.
RelevanceMoments empirical_moments(const FeatureMap& map, const SampleBuffer& buffer);

/// Linear functional p -> <P(p), M_c> over the upper-triangle parameters
/// (diagonal weighted by M_c's diagonal, off-diagonal entries doubled).
Eigen::VectorXd objective_coefficients(const RelevanceMoments& moments);

/// Whether the terminal Q-value of each policy-evaluation constraint is a
/// constant computed from the previous iterate (the textbook one-step backup)
/// or the decision variable itself (self-anchored evaluation). The
/// self-anchored form keeps all feature terms inside the constraint row and is
/// the numerically robust default for plants whose successors leave the
/// sampled region.
enum class TerminalAnchor { PreviousIterate, CurrentIterate };

/// One inequality per usable buffer sample over the triangle parameters,
/// meaning constraint_matrix * p <= rhs. The objective is filled by the
/// caller (maximize).
struct LinearProgram {
    Eigen::VectorXd objective;
    Eigen::MatrixXd constraint_matrix;
    Eigen::VectorXd rhs;
    std::vector<int> sample_ids;   // buffer index per row

    int iteration = 0;
    int horizon = 1;
    int truncated_count = 0;
    int dropped_count = 0;
    int safeguard_rows = 0;

    Eigen::Index constraint_count() const { return constraint_matrix.rows(); }
    Eigen::Index variable_count() const { return constraint_matrix.cols(); }
};

/// Builds the per-sample evaluation inequalities from a rollout set:
///   Q(z_b, a_b) <= cost_b + sum_l gamma^l L_l + gamma^{H_b} Q(z_Hb, mu(z_Hb))
/// with the terminal either folded into the row (CurrentIterate) or evaluated
/// against `p_prev` (PreviousIterate). Dropped trajectories contribute no row.
LinearProgram assemble_constraints(const SampleBuffer& buffer,
                                   const RolloutSet& rollouts,
                                   const QParams& p_prev, double gamma,
                                   int horizon,
                                   TerminalAnchor anchor = TerminalAnchor::CurrentIterate);

/// Appends the linear safeguard rows P_aa[j][j] >= delta.
void add_action_curvature_floor(LinearProgram& lp, const FeatureMap& map, double delta);

/// Mean of the assembled constraint rows. Lies in the conic hull of the rows
/// by construction, so the LP is bounded whenever it is feasible.
Eigen::VectorXd row_average_objective(const LinearProgram& lp);

struct LpSolution {
    QParams params;
    double objective_value = 0.0;
    LpStatus status = LpStatus::NumericalFailure;
    int solver_iterations = 0;
    double feasibility_violation = 0.0;
    std::string diagnostics;
};

/// Maximizes lp.objective subject to the assembled inequalities and rebuilds
/// the symmetric parameter matrix from the optimal triangle vector.
LpSolution solve(const LinearProgram& lp, const FeatureMap& map);

/// Plain-text dump (objective line, then one constraint per line:
/// coefficients then rhs) for external solver cross-checks.
void dump_lp(const LinearProgram& lp, const std::string& path);

}  // namespace msqlp

#endif  // MSQLP_LP_HPP
