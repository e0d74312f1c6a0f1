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
#include "msqlp/lp_solver.hpp"

#include <Eigen/Cholesky>
#include <Eigen/QR>
#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <vector>

#include "msqlp/errors.hpp"

namespace msqlp {

std::string to_string(LpStatus status) {
    switch (status) {
        case LpStatus::Optimal: return "optimal";
        case LpStatus::Infeasible: return "infeasible";
        case LpStatus::Unbounded: return "unbounded";
        case LpStatus::NumericalFailure: return "numerical-failure";
    }
    return "unknown";
}

namespace {

constexpr double kResidualTol = 1e-9;
constexpr int kMaxIterations = 200;
constexpr double kStepFraction = 0.9995;
constexpr double kVacuousRhs = 1e14;
constexpr double kDivergingIterate = 1e13;

double max_violation(const Eigen::MatrixXd& a, const Eigen::VectorXd& b,
                     const Eigen::VectorXd& x) {
    if (a.rows() == 0) return 0.0;
    double v = 0.0;
    const Eigen::VectorXd r = a * x - b;
    for (Eigen::Index i = 0; i < r.size(); ++i) {
        v = std::max(v, r[i] / (1.0 + std::abs(b[i])));
    }
    return v;
}

struct PolishOutcome {
    bool certified = false;
    Eigen::VectorXd x;
};

// Re-solves the near-active rows as equalities and certifies the vertex with
// a dual least-squares fit: feasible + c in the cone of active rows (within
// tolerance) proves optimality independently of how sharp the interior-point
// endgame was.
PolishOutcome polish_vertex(const Eigen::MatrixXd& a, const Eigen::VectorXd& b,
                            const Eigen::VectorXd& c, const Eigen::VectorXd& x_ipm,
                            const Eigen::VectorXd& s, const Eigen::VectorXd& y) {
    PolishOutcome out;
    const Eigen::Index m = a.rows();
    const Eigen::Index n = a.cols();

    std::vector<Eigen::Index> act;
    for (Eigen::Index i = 0; i < m; ++i) {
        if (y[i] > s[i]) act.push_back(i);
    }
    if (act.empty()) {
        // No binding rows: optimal only if the objective vanishes.
        if (c.cwiseAbs().maxCoeff() <= 1e-12) {
            out.certified = true;
            out.x = x_ipm;
        }
        return out;
    }

    Eigen::MatrixXd aa(static_cast<Eigen::Index>(act.size()), n);
    Eigen::VectorXd bb(static_cast<Eigen::Index>(act.size()));
    for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(act.size()); ++i) {
        aa.row(i) = a.row(act[i]);
        bb[i] = b[act[i]];
    }

    Eigen::VectorXd x_pol;
    if (aa.rows() >= n) {
        x_pol = aa.colPivHouseholderQr().solve(bb);
    } else {
        const Eigen::VectorXd resid = bb - aa * x_ipm;
        x_pol = x_ipm + aa.transpose() * (aa * aa.transpose()).ldlt().solve(resid);
    }
    if (!x_pol.allFinite()) return out;
    if (max_violation(a, b, x_pol) > 1e-9) return out;

    // Dual certificate: c ~= A_act' y_act with y_act >= 0.
    Eigen::VectorXd y_act = aa.transpose().colPivHouseholderQr().solve(c);
    const double stat = (aa.transpose() * y_act - c).cwiseAbs().maxCoeff();
    const double cnorm = 1.0 + c.cwiseAbs().maxCoeff();
    if (stat <= 1e-7 * cnorm && y_act.minCoeff() >= -1e-7 * (1.0 + y_act.cwiseAbs().maxCoeff())) {
        out.certified = true;
        out.x = x_pol;
    }
    return out;
}

}  // namespace

DenseLpResult solve_dense_lp(const Eigen::VectorXd& objective,
                             const Eigen::MatrixXd& constraints,
                             const Eigen::VectorXd& rhs) {
    const Eigen::Index n = objective.size();
    const Eigen::Index m_all = constraints.rows();
    if (constraints.cols() != n || rhs.size() != m_all) {
        throw InvalidArgument("solve_dense_lp: dimension mismatch");
    }
    if (m_all < 1) throw InvalidArgument("solve_dense_lp: at least one constraint required");

    DenseLpResult result;
    if (!objective.allFinite() || !constraints.allFinite() || !rhs.allFinite()) {
        result.status = LpStatus::NumericalFailure;
        result.diagnostics = "non-finite problem data";
        return result;
    }

    // Empty and vacuous rows are resolved up front.
    std::vector<Eigen::Index> keep;
    keep.reserve(m_all);
    for (Eigen::Index r = 0; r < m_all; ++r) {
        const double amax = constraints.row(r).cwiseAbs().maxCoeff();
        if (amax == 0.0) {
            if (rhs[r] < 0.0) {
                result.status = LpStatus::Infeasible;
                result.diagnostics = "empty row with negative rhs";
                return result;
            }
            continue;
        }
        if (rhs[r] / std::max(1.0, amax) > kVacuousRhs) continue;
        keep.push_back(r);
    }
    if (keep.empty()) {
        result.status = (objective.cwiseAbs().maxCoeff() == 0.0) ? LpStatus::Optimal
                                                                 : LpStatus::Unbounded;
        result.x = Eigen::VectorXd::Zero(n);
        result.diagnostics = "all constraints vacuous";
        return result;
    }
    const Eigen::Index m = static_cast<Eigen::Index>(keep.size());
    Eigen::MatrixXd a(m, n);
    Eigen::VectorXd b(m);
    for (Eigen::Index i = 0; i < m; ++i) {
        a.row(i) = constraints.row(keep[i]);
        b[i] = rhs[keep[i]];
    }

    // Ruiz equilibration: iteratively scale rows and columns toward unit
    // infinity norm. The transformed problem is max (Cc)'v, (RAC)v <= Rb with
    // x = C v.
    Eigen::VectorXd row_scale = Eigen::VectorXd::Ones(m);
    Eigen::VectorXd col_scale = Eigen::VectorXd::Ones(n);
    for (int pass = 0; pass < 6; ++pass) {
        for (Eigen::Index i = 0; i < m; ++i) {
            const double mx = a.row(i).cwiseAbs().maxCoeff();
            if (mx > 0.0) {
                const double f = 1.0 / std::sqrt(mx);
                a.row(i) *= f;
                row_scale[i] *= f;
            }
        }
        for (Eigen::Index j = 0; j < n; ++j) {
            const double mx = a.col(j).cwiseAbs().maxCoeff();
            if (mx > 0.0) {
                const double f = 1.0 / std::sqrt(mx);
                a.col(j) *= f;
                col_scale[j] *= f;
            }
        }
    }
    b = row_scale.asDiagonal() * b;
    Eigen::VectorXd c = col_scale.asDiagonal() * objective;
    const double c_scale = std::max(1.0, c.cwiseAbs().maxCoeff());
    c /= c_scale;
    const double b_scale = std::max(1.0, b.cwiseAbs().maxCoeff());
    b /= b_scale;

    const double bnorm = b.cwiseAbs().maxCoeff();
    const double cnorm = std::max(1.0, c.cwiseAbs().maxCoeff());

    Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
    Eigen::VectorXd s = b.cwiseMax(1.0).array() + 1.0;
    Eigen::VectorXd y = Eigen::VectorXd::Ones(m);

    auto recover = [&](const Eigen::VectorXd& v) {
        return (col_scale.asDiagonal() * v * b_scale).eval();
    };

    int it = 0;
    bool converged = false;
    double rp_rel = 0.0, rd_rel = 0.0, gap_rel = 0.0;
    for (; it < kMaxIterations; ++it) {
        const Eigen::VectorXd rp = b - a * x - s;
        const Eigen::VectorXd rd = c - a.transpose() * y;
        const double mu = s.dot(y) / static_cast<double>(m);
        const double pobj = c.dot(x);
        const double dobj = b.dot(y);
        rp_rel = rp.cwiseAbs().maxCoeff() / (1.0 + bnorm);
        rd_rel = rd.cwiseAbs().maxCoeff() / (1.0 + cnorm);
        gap_rel = std::abs(pobj - dobj) / (1.0 + std::abs(pobj));

        if (rp_rel <= kResidualTol && rd_rel <= kResidualTol && gap_rel <= kResidualTol) {
            converged = true;
            break;
        }
        if (x.cwiseAbs().maxCoeff() > kDivergingIterate * (1.0 + bnorm)) {
            result.status = (rp_rel <= 1e-6) ? LpStatus::Unbounded : LpStatus::NumericalFailure;
            result.diagnostics = "diverging primal iterate";
            result.iterations = it;
            return result;
        }
        if (it > 60 && rp_rel <= kResidualTol && gap_rel <= kResidualTol && rd_rel > 1e-5) {
            result.status = LpStatus::Unbounded;
            result.iterations = it;
            result.diagnostics = "persistent dual infeasibility";
            return result;
        }

        const Eigen::ArrayXd d = (y.array() / s.array()).max(1e-300).min(1e300);
        Eigen::MatrixXd normal = a.transpose() * d.matrix().asDiagonal() * a;
        // Fixed small shift (the problem is equilibrated); a diagonal-scaled
        // shift would inject dual-residual error as the barrier sharpens.
        const double reg = 1e-11;
        Eigen::MatrixXd normal_reg = normal;
        normal_reg.diagonal().array() += reg;
        Eigen::LDLT<Eigen::MatrixXd> ldlt(normal_reg);
        if (ldlt.info() != Eigen::Success) {
            result.status = LpStatus::NumericalFailure;
            result.diagnostics = "normal equation factorization failed";
            result.iterations = it;
            return result;
        }

        auto solve_step = [&](const Eigen::VectorXd& rc, Eigen::VectorXd& dx,
                              Eigen::VectorXd& dy, Eigen::VectorXd& ds) {
            const Eigen::VectorXd t = rc.array() / s.array();
            const Eigen::VectorXd rhs_n =
                rd + a.transpose() * (d * rp.array()).matrix() - a.transpose() * t;
            dx = ldlt.solve(rhs_n);
            dx += ldlt.solve(rhs_n - normal * dx);  // one refinement pass
            dy = (d * (a * dx - rp).array()).matrix() + t;
            ds = ((rc.array() - s.array() * dy.array()) / y.array()).matrix();
        };
        auto step_len = [](const Eigen::VectorXd& v, const Eigen::VectorXd& dv) {
            double alpha = 1.0;
            for (Eigen::Index i = 0; i < v.size(); ++i) {
                if (dv[i] < 0.0) alpha = std::min(alpha, -v[i] / dv[i]);
            }
            return alpha;
        };

        Eigen::VectorXd dx_aff, dy_aff, ds_aff;
        solve_step((-(s.array() * y.array())).matrix(), dx_aff, dy_aff, ds_aff);
        const double ap_aff = step_len(s, ds_aff);
        const double ad_aff = step_len(y, dy_aff);
        const double mu_aff =
            (s + ap_aff * ds_aff).dot(y + ad_aff * dy_aff) / static_cast<double>(m);
        const double sigma = std::clamp(std::pow(mu_aff / std::max(mu, 1e-300), 3), 0.0, 1.0);

        Eigen::VectorXd rc =
            (sigma * mu - (s.array() * y.array()) - (ds_aff.array() * dy_aff.array())).matrix();
        Eigen::VectorXd dx, dy, ds;
        solve_step(rc, dx, dy, ds);

        const double ap = std::min(1.0, kStepFraction * step_len(s, ds));
        const double ad = std::min(1.0, kStepFraction * step_len(y, dy));
        x += ap * dx;
        s += ap * ds;
        y += ad * dy;
        s = s.cwiseMax(1e-300);
        y = y.cwiseMax(1e-300);
        if (!x.allFinite() || !s.allFinite() || !y.allFinite()) {
            result.status = LpStatus::NumericalFailure;
            result.diagnostics = "non-finite iterate";
            result.iterations = it;
            return result;
        }
    }

    const PolishOutcome polish = polish_vertex(a, b, c, x, s, y);
    const bool loose_ok = rp_rel <= 1e-7 && rd_rel <= 1e-7 && gap_rel <= 1e-7;
    if (!converged && !loose_ok && !polish.certified) {
        result.status = LpStatus::NumericalFailure;
        std::ostringstream oss;
        oss << "no convergence in " << kMaxIterations << " iterations (rp=" << rp_rel
            << ", rd=" << rd_rel << ", gap=" << gap_rel << ")";
        result.diagnostics = oss.str();
        result.iterations = it;
        return result;
    }

    Eigen::VectorXd x_best = x;
    if (polish.certified) {
        x_best = polish.x;
    } else {
        // Uncertified polish can still sharpen the point when it keeps
        // feasibility and does not lose objective.
        const double obj_ipm = c.dot(x);
        if (polish.x.size() == n && polish.x.allFinite() &&
            max_violation(a, b, polish.x) <= 1e-9 &&
            c.dot(polish.x) >= obj_ipm - 1e-9 * (1.0 + std::abs(obj_ipm))) {
            x_best = polish.x;
        }
    }

    result.status = LpStatus::Optimal;
    result.x = recover(x_best);
    result.objective = objective.dot(result.x);
    result.iterations = it;
    result.feasibility_violation = max_violation(constraints, rhs, result.x);
    if (!converged) {
        result.diagnostics = polish.certified ? "vertex certified from loose interior point"
                                              : "loose tolerance accepted";
    }
    return result;
}

}  // namespace msqlp
