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
#include "msqlp/qfunc.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <cmath>
#include <nlohmann/json.hpp>

#include "msqlp/sampling.hpp"

namespace msqlp {

std::string BaseFeature::name() const {
    const char base = (kind == BaseFeatureKind::Error || kind == BaseFeatureKind::ErrorSquared) ? 'e' : 'r';
    std::string n = std::string(1, base) + std::to_string(index + 1);
    if (degree() == 2) n += "^2";
    return n;
}

int BaseFeature::degree() const {
    return (kind == BaseFeatureKind::ErrorSquared || kind == BaseFeatureKind::ReferenceSquared) ? 2 : 1;
}

double BaseFeature::evaluate(const AugmentedState& z) const {
    switch (kind) {
        case BaseFeatureKind::Error: return z.error[index];
        case BaseFeatureKind::Reference: return z.reference[index];
        case BaseFeatureKind::ErrorSquared: return z.error[index] * z.error[index];
        case BaseFeatureKind::ReferenceSquared: return z.reference[index] * z.reference[index];
    }
    throw InvalidArgument("unknown feature kind");
}

FeatureMap::FeatureMap(std::vector<BaseFeature> base, int state_dim, int action_dim)
    : base_(std::move(base)), state_dim_(state_dim), action_dim_(action_dim) {
    if (state_dim_ <= 0 || action_dim_ <= 0) {
        throw InvalidArgument("FeatureMap: dimensions must be positive");
    }
    for (const auto& f : base_) {
        if (f.index < 0 || f.index >= state_dim_) {
            throw InvalidArgument("FeatureMap: feature index out of range");
        }
    }
}

Eigen::VectorXd FeatureMap::base_features(const AugmentedState& z) const {
    if (z.state_dim() != state_dim_) {
        throw InvalidArgument("FeatureMap: state dimension mismatch");
    }
    Eigen::VectorXd psi(base_dim());
    for (int i = 0; i < base_dim(); ++i) psi[i] = base_[i].evaluate(z);
    return psi;
}

std::vector<std::string> FeatureMap::feature_names() const {
    std::vector<std::string> names;
    names.reserve(feature_dim());
    for (const auto& f : base_) names.push_back(f.name());
    for (int j = 0; j < action_dim_; ++j) {
        names.push_back(action_dim_ == 1 ? "a" : "a" + std::to_string(j + 1));
    }
    return names;
}

FeatureMap FeatureMap::benchmark() {
    std::vector<BaseFeature> base = {
        {BaseFeatureKind::Error, 0},         {BaseFeatureKind::Error, 1},
        {BaseFeatureKind::Reference, 0},     {BaseFeatureKind::Reference, 1},
        {BaseFeatureKind::ReferenceSquared, 0}, {BaseFeatureKind::ReferenceSquared, 1},
    };
    return FeatureMap(std::move(base), 2, 1);
}

FeatureMap FeatureMap::from_feature_names(const std::vector<std::string>& names) {
    std::vector<BaseFeature> base;
    int action_dim = 0;
    int state_dim = 0;
    for (const auto& n : names) {
        if (n.empty()) throw InvalidArgument("empty feature name");
        if (n[0] == 'a') {
            ++action_dim;
            continue;
        }
        if (action_dim > 0) throw InvalidArgument("action features must be trailing");
        BaseFeature f;
        const bool squared = n.size() > 2 && n.substr(n.size() - 2) == "^2";
        const std::string core = squared ? n.substr(0, n.size() - 2) : n;
        if (core.size() < 2) throw InvalidArgument("bad feature name: " + n);
        f.index = std::stoi(core.substr(1)) - 1;
        if (core[0] == 'e') {
            f.kind = squared ? BaseFeatureKind::ErrorSquared : BaseFeatureKind::Error;
        } else if (core[0] == 'r') {
            f.kind = squared ? BaseFeatureKind::ReferenceSquared : BaseFeatureKind::Reference;
        } else {
            throw InvalidArgument("bad feature name: " + n);
        }
        state_dim = std::max(state_dim, f.index + 1);
        base.push_back(f);
    }
    if (action_dim == 0) throw InvalidArgument("feature names carry no action channel");
    return FeatureMap(std::move(base), state_dim, action_dim);
}

Eigen::VectorXd features(const FeatureMap& map, const AugmentedState& z,
                         const Eigen::VectorXd& action) {
    if (action.size() != map.action_dim()) {
        throw InvalidArgument("features: action dimension mismatch");
    }
    if (!z.error.allFinite() || !z.reference.allFinite() || !action.allFinite()) {
        throw InvalidArgument("features: non-finite input");
    }
    Eigen::VectorXd phi(map.feature_dim());
    phi.head(map.base_dim()) = map.base_features(z);
    phi.tail(map.action_dim()) = action;
    return phi;
}

Eigen::Index triangle_size(Eigen::Index k) { return k * (k + 1) / 2; }

Eigen::Index triangle_index(Eigen::Index i, Eigen::Index j, Eigen::Index k) {
    if (i > j) std::swap(i, j);
    return i * k - i * (i - 1) / 2 + (j - i);
}

Eigen::VectorXd triangle_coefficients(const Eigen::VectorXd& phi) {
    const Eigen::Index k = phi.size();
    Eigen::VectorXd coeff(triangle_size(k));
    Eigen::Index idx = 0;
    for (Eigen::Index i = 0; i < k; ++i) {
        for (Eigen::Index j = i; j < k; ++j) {
            coeff[idx++] = (i == j) ? phi[i] * phi[i] : 2.0 * phi[i] * phi[j];
        }
    }
    return coeff;
}

Eigen::MatrixXd matrix_from_triangle(const Eigen::VectorXd& tri, Eigen::Index k) {
    if (tri.size() != triangle_size(k)) {
        throw InvalidArgument("matrix_from_triangle: length mismatch");
    }
    Eigen::MatrixXd m(k, k);
    Eigen::Index idx = 0;
    for (Eigen::Index i = 0; i < k; ++i) {
        for (Eigen::Index j = i; j < k; ++j) {
            m(i, j) = tri[idx];
            m(j, i) = tri[idx];
            ++idx;
        }
    }
    return m;
}

Eigen::VectorXd triangle_from_matrix(const Eigen::MatrixXd& m) {
    const Eigen::Index k = m.rows();
    Eigen::VectorXd tri(triangle_size(k));
    Eigen::Index idx = 0;
    for (Eigen::Index i = 0; i < k; ++i) {
        for (Eigen::Index j = i; j < k; ++j) tri[idx++] = m(i, j);
    }
    return tri;
}

QParams QParams::from_triangle(FeatureMap map, Eigen::VectorXd triangle) {
    if (triangle.size() != triangle_size(map.feature_dim())) {
        throw InvalidArgument("QParams: triangle length mismatch");
    }
    QParams p;
    p.matrix_ = matrix_from_triangle(triangle, map.feature_dim());
    p.triangle_ = std::move(triangle);
    p.map_ = std::move(map);
    return p;
}

QParams QParams::from_matrix(FeatureMap map, const Eigen::MatrixXd& matrix) {
    if (matrix.rows() != map.feature_dim() || matrix.cols() != map.feature_dim()) {
        throw InvalidArgument("QParams: matrix size mismatch");
    }
    if (matrix != matrix.transpose()) {
        throw InvalidArgument("QParams: matrix must be exactly symmetric");
    }
    return from_triangle(std::move(map), triangle_from_matrix(matrix));
}

QParams QParams::zero(FeatureMap map) {
    const Eigen::Index n = triangle_size(map.feature_dim());
    return from_triangle(std::move(map), Eigen::VectorXd::Zero(n));
}

Eigen::MatrixXd QParams::action_block() const {
    const int m = map_.action_dim();
    return matrix_.bottomRightCorner(m, m);
}

Eigen::MatrixXd QParams::cross_block() const {
    const int m = map_.action_dim();
    return matrix_.bottomLeftCorner(m, map_.base_dim());
}

Eigen::MatrixXd QParams::base_block() const {
    const int n = map_.base_dim();
    return matrix_.topLeftCorner(n, n);
}

std::string QParams::to_json_string() const {
    nlohmann::json j;
    j["feature_names"] = map_.feature_names();
    j["upper_triangle"] = std::vector<double>(triangle_.data(), triangle_.data() + triangle_.size());
    return j.dump();
}

QParams QParams::from_json_string(const std::string& text) {
    const auto j = nlohmann::json::parse(text);
    auto names = j.at("feature_names").get<std::vector<std::string>>();
    auto tri = j.at("upper_triangle").get<std::vector<double>>();
    FeatureMap map = FeatureMap::from_feature_names(names);
    Eigen::VectorXd t = Eigen::Map<const Eigen::VectorXd>(tri.data(), static_cast<Eigen::Index>(tri.size()));
    return from_triangle(std::move(map), std::move(t));
}

ActionDomain ActionDomain::box(Eigen::VectorXd lo, Eigen::VectorXd hi) {
    if (lo.size() != hi.size() || (lo.array() > hi.array()).any()) {
        throw InvalidArgument("ActionDomain: invalid box");
    }
    return ActionDomain{std::move(lo), std::move(hi)};
}

ActionDomain ActionDomain::symmetric_box(int m, double radius) {
    if (radius <= 0.0) throw InvalidArgument("ActionDomain: radius must be positive");
    return box(Eigen::VectorXd::Constant(m, -radius), Eigen::VectorXd::Constant(m, radius));
}

double q_value(const QParams& params, const AugmentedState& z,
               const Eigen::VectorXd& action) {
    const Eigen::VectorXd phi = features(params.feature_map(), z, action);
    return phi.dot(params.matrix() * phi);
}

Eigen::VectorXd greedy_action(const QParams& params, const AugmentedState& z) {
    const Eigen::MatrixXd paa = params.action_block();
    Eigen::LLT<Eigen::MatrixXd> llt(paa);
    if (llt.info() != Eigen::Success) {
        throw IllPosedPolicy("greedy_action: action block is not positive definite", paa);
    }
    const Eigen::VectorXd psi = params.feature_map().base_features(z);
    return llt.solve(-(params.cross_block() * psi));
}

namespace {

// m = 1 specialization: the minimum over a box is the clipped stationary point
// when P_aa > 0 and an endpoint otherwise.
Eigen::VectorXd greedy_box_scalar(const QParams& params, const AugmentedState& z,
                                  const ActionDomain& domain) {
    const double paa = params.action_block()(0, 0);
    const Eigen::VectorXd psi = params.feature_map().base_features(z);
    const double cross = (params.cross_block() * psi)(0);
    const double lo = (*domain.lower)(0);
    const double hi = (*domain.upper)(0);
    double best_a = lo;
    double best_v = paa * lo * lo + 2.0 * cross * lo;
    const auto consider = [&](double a) {
        const double v = paa * a * a + 2.0 * cross * a;
        if (v < best_v) {
            best_v = v;
            best_a = a;
        }
    };
    consider(hi);
    if (paa > 0.0) consider(std::min(hi, std::max(lo, -cross / paa)));
    return Eigen::VectorXd::Constant(1, best_a);
}

}  // namespace

Eigen::VectorXd greedy_action(const QParams& params, const AugmentedState& z,
                              const ActionDomain& domain) {
    if (!domain.bounded()) {
        return greedy_action(params, z);
    }
    const int m = params.feature_map().action_dim();
    if (domain.lower->size() != m) {
        throw InvalidArgument("greedy_action: domain dimension mismatch");
    }
    if (m == 1) {
        return greedy_box_scalar(params, z, domain);
    }
    // Projected coordinate descent on the quadratic; requires a positive
    // definite action block for the boxed multi-input case.
    const Eigen::MatrixXd paa = params.action_block();
    Eigen::LLT<Eigen::MatrixXd> llt(paa);
    if (llt.info() != Eigen::Success) {
        throw IllPosedPolicy("greedy_action: boxed multi-input minimization needs a positive definite action block", paa);
    }
    const Eigen::VectorXd psi = params.feature_map().base_features(z);
    const Eigen::VectorXd cross = params.cross_block() * psi;
    Eigen::VectorXd a = llt.solve(-cross).cwiseMin(*domain.upper).cwiseMax(*domain.lower);
    for (int sweep = 0; sweep < 200; ++sweep) {
        double change = 0.0;
        for (int j = 0; j < m; ++j) {
            double num = -cross[j];
            for (int k2 = 0; k2 < m; ++k2) {
                if (k2 != j) num -= paa(j, k2) * a[k2];
            }
            const double aj = std::min((*domain.upper)[j], std::max((*domain.lower)[j], num / paa(j, j)));
            change = std::max(change, std::abs(aj - a[j]));
            a[j] = aj;
        }
        if (change < 1e-14) break;
    }
    return a;
}

double q_min(const QParams& params, const AugmentedState& z,
             const ActionDomain& domain) {
    return q_value(params, z, greedy_action(params, z, domain));
}

double iterate_distance(const QParams& p_new, const QParams& p_old) {
    if (!(p_new.feature_map() == p_old.feature_map())) {
        throw InvalidArgument("iterate_distance: feature map mismatch");
    }
    return (p_new.matrix() - p_old.matrix()).cwiseAbs().maxCoeff();
}

double buffer_q_distance(const QParams& p_new, const QParams& p_old,
                         const SampleBuffer& buffer) {
    if (!(p_new.feature_map() == p_old.feature_map())) {
        throw InvalidArgument("buffer_q_distance: feature map mismatch");
    }
    if (buffer.samples.empty()) {
        throw InvalidArgument("buffer_q_distance: empty buffer");
    }
    double dist = 0.0;
    for (const auto& s : buffer.samples) {
        const Eigen::VectorXd phi = features(p_new.feature_map(), s.state, s.action);
        const double dq = phi.dot((p_new.matrix() - p_old.matrix()) * phi);
        dist = std::max(dist, std::abs(dq));
    }
    return dist;
}

GreedyPolicy::GreedyPolicy(QParams params, ActionDomain domain)
    : params_(std::move(params)), domain_(std::move(domain)) {}

Eigen::VectorXd GreedyPolicy::action(const AugmentedState& z) const {
    return greedy_action(params_, z, domain_);
}

LinearFeaturePolicy::LinearFeaturePolicy(FeatureMap map, Eigen::VectorXd coefficients)
    : map_(std::move(map)), coefficients_(std::move(coefficients)) {
    if (coefficients_.size() != map_.base_dim()) {
        throw InvalidArgument("LinearFeaturePolicy: coefficient length must match base feature count");
    }
    if (map_.action_dim() != 1) {
        throw InvalidArgument("LinearFeaturePolicy: only single-input maps are supported");
    }
}

Eigen::VectorXd LinearFeaturePolicy::action(const AugmentedState& z) const {
    return Eigen::VectorXd::Constant(1, coefficients_.dot(map_.base_features(z)));
}

}  // namespace msqlp
