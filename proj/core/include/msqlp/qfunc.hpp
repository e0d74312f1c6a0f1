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
#ifndef MSQLP_QFUNC_HPP
#define MSQLP_QFUNC_HPP

#include <Eigen/Core>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "msqlp/plant.hpp"

namespace msqlp {

struct SampleBuffer;  // sampling.hpp

enum class BaseFeatureKind { Error, Reference, ErrorSquared, ReferenceSquared };

/// One named scalar basis function of the augmented state.
struct BaseFeature {
    BaseFeatureKind kind;
    int index = 0;

    std::string name() const;
    /// Polynomial degree in the underlying state variable (1 or 2); drives the
    /// relevance-moment assembly.
    int degree() const;
    double evaluate(const AugmentedState& z) const;

    bool operator==(const BaseFeature&) const = default;
};

/// Ordered basis [psi(z); a]: base features of z followed by the raw action
/// channels. Actions always enter linearly, which keeps any Q-function in the
/// induced class quadratic in a and the greedy policy closed-form.
class FeatureMap {
public:
    FeatureMap() = default;
    FeatureMap(std::vector<BaseFeature> base, int state_dim, int action_dim);

    int base_dim() const { return static_cast<int>(base_.size()); }
    int action_dim() const { return action_dim_; }
    int state_dim() const { return state_dim_; }
    /// Total feature count K = |base| + m.
    int feature_dim() const { return base_dim() + action_dim_; }

    Eigen::VectorXd base_features(const AugmentedState& z) const;
    const std::vector<BaseFeature>& base() const { return base_; }
    std::vector<std::string> feature_names() const;

    bool operator==(const FeatureMap&) const = default;

    /// [e1, e2, r1, r2, r1^2, r2^2, a] for a 2-state single-input plant.
    static FeatureMap benchmark();
    static FeatureMap from_feature_names(const std::vector<std::string>& names);

private:
    std::vector<BaseFeature> base_;
    int state_dim_ = 0;
    int action_dim_ = 0;
};

/// phi(z, a): stacked base features with the action channels appended last.
Eigen::VectorXd features(const FeatureMap& map, const AugmentedState& z,
                         const Eigen::VectorXd& action);

// Upper-triangle (row-major, i <= j) parameterization of symmetric K x K
// matrices. Off-diagonal coefficients are doubled so that
// dot(triangle_coefficients(phi), p) == phi' P(p) phi.
Eigen::Index triangle_size(Eigen::Index k);
Eigen::Index triangle_index(Eigen::Index i, Eigen::Index j, Eigen::Index k);
Eigen::VectorXd triangle_coefficients(const Eigen::VectorXd& phi);
Eigen::MatrixXd matrix_from_triangle(const Eigen::VectorXd& tri, Eigen::Index k);
Eigen::VectorXd triangle_from_matrix(const Eigen::MatrixXd& m);

/// Symmetric parameter matrix over a feature map. The upper triangle is the
/// source of truth; the mirrored full matrix is materialized on construction,
/// so `matrix()` is exactly symmetric.
class QParams {
public:
    QParams() = default;

    static QParams from_triangle(FeatureMap map, Eigen::VectorXd triangle);
    /// Requires an exactly symmetric input; the upper triangle is extracted.
    static QParams from_matrix(FeatureMap map, const Eigen::MatrixXd& matrix);
    static QParams zero(FeatureMap map);

    const FeatureMap& feature_map() const { return map_; }
    const Eigen::MatrixXd& matrix() const { return matrix_; }
    const Eigen::VectorXd& triangle() const { return triangle_; }
    int feature_dim() const { return map_.feature_dim(); }

    /// Action-action block P_aa (m x m, trailing coordinates).
    Eigen::MatrixXd action_block() const;
    /// Cross block P_a,psi (m x base_dim).
    Eigen::MatrixXd cross_block() const;
    /// Base block P_psi,psi.
    Eigen::MatrixXd base_block() const;

    /// Lossless JSON round trip: {"feature_names": [...], "upper_triangle": [...]}.
    std::string to_json_string() const;
    static QParams from_json_string(const std::string& text);

private:
    FeatureMap map_;
    Eigen::VectorXd triangle_;
    Eigen::MatrixXd matrix_;
};

/// Box of admissible actions for the backup minimization. An unbounded domain
/// reproduces the pure stationary-point policy improvement.
struct ActionDomain {
    std::optional<Eigen::VectorXd> lower;
    std::optional<Eigen::VectorXd> upper;

    bool bounded() const { return lower.has_value() && upper.has_value(); }
    static ActionDomain unbounded() { return {}; }
    static ActionDomain box(Eigen::VectorXd lo, Eigen::VectorXd hi);
    static ActionDomain symmetric_box(int m, double radius);
};

double q_value(const QParams& params, const AugmentedState& z,
               const Eigen::VectorXd& action);

/// Unconstrained minimizer a* = -P_aa^{-1} P_a,psi psi(z). Throws
/// IllPosedPolicy when the action block is not positive definite.
Eigen::VectorXd greedy_action(const QParams& params, const AugmentedState& z);

/// Minimizer of Q(z, .) over the given domain. Total for bounded domains even
/// when the action block is indefinite (the minimum then sits on the boundary).
Eigen::VectorXd greedy_action(const QParams& params, const AugmentedState& z,
                              const ActionDomain& domain);

/// min over the domain of Q(z, v).
double q_min(const QParams& params, const AugmentedState& z,
             const ActionDomain& domain);

/// Element-wise infinity norm of the parameter difference.
double iterate_distance(const QParams& p_new, const QParams& p_old);

/// max over buffer samples of |Q_new(z_b, a_b) - Q_old(z_b, a_b)|.
double buffer_q_distance(const QParams& p_new, const QParams& p_old,
                         const SampleBuffer& buffer);

/// State-feedback policy interface shared by greedy and explicit policies.
class Policy {
public:
    virtual ~Policy() = default;
    virtual Eigen::VectorXd action(const AugmentedState& z) const = 0;
};

class GreedyPolicy : public Policy {
public:
    GreedyPolicy(QParams params, ActionDomain domain = ActionDomain::unbounded());
    Eigen::VectorXd action(const AugmentedState& z) const override;
    const QParams& params() const { return params_; }

private:
    QParams params_;
    ActionDomain domain_;
};

/// mu(z) = coefficients . psi(z) over the map's base features.
class LinearFeaturePolicy : public Policy {
public:
    LinearFeaturePolicy(FeatureMap map, Eigen::VectorXd coefficients);
    Eigen::VectorXd action(const AugmentedState& z) const override;

private:
    FeatureMap map_;
    Eigen::VectorXd coefficients_;
};

}  // namespace msqlp

#endif  // MSQLP_QFUNC_HPP
