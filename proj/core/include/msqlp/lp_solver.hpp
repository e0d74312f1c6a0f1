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
#ifndef MSQLP_LP_SOLVER_HPP
#define MSQLP_LP_SOLVER_HPP

#include <Eigen/Core>
#include <string>

namespace msqlp {

enum class LpStatus { Optimal, Infeasible, Unbounded, NumericalFailure };

std::string to_string(LpStatus status);

struct DenseLpResult {
    LpStatus status = LpStatus::NumericalFailure;
    Eigen::VectorXd x;
    double objective = 0.0;
    int iterations = 0;
    /// Max over rows of (a_r'x - b_r) / (1 + |b_r|) at the returned point.
    double feasibility_violation = 0.0;
    std::string diagnostics;
};

/// Solves  max c'x  s.t.  A x <= b  (x free) with a Mehrotra-style dense
/// primal-dual interior point method followed by an active-set polish.
///
/// Expected shape m >> n: each Newton step costs one n x n Cholesky of the
/// normal equations A' D A. Target accuracy is 1e-9 relative on primal/dual
/// residuals and duality gap; the polish typically sharpens the solution to a
/// vertex at ~1e-13 relative accuracy, which makes fixed-point iterations on
/// top of this solver settle to exact floating-point stationarity.
DenseLpResult solve_dense_lp(const Eigen::VectorXd& objective,
                             const Eigen::MatrixXd& constraints,
                             const Eigen::VectorXd& rhs);

}  // namespace msqlp

#endif  // MSQLP_LP_SOLVER_HPP
