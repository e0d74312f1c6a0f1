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
#ifndef MSQLP_BENCHMARK_SYSTEM_HPP
#define MSQLP_BENCHMARK_SYSTEM_HPP

#include <Eigen/Core>

#include "msqlp/plant.hpp"

namespace msqlp::benchmark {

/// Two-dimensional nonlinear tracking benchmark ("benchmark-v"): trigonometric
/// plant dynamics with a single saturated input channel (|u| <= 0.7), a
/// sine-wave reference generator and quadratic stage cost e'(4 I)e + u^2.
PlantModel make_benchmark_plant();

inline Eigen::Vector2d default_initial_state() { return {0.8, -1.1}; }
inline Eigen::Vector2d default_initial_reference() { return {0.5, 0.5}; }
inline constexpr double default_input_bound = 0.7;
inline constexpr double default_discount = 0.95;

/// 7x7 symmetric matrix used as the stock "arbitrary" Q-function initializer
/// over the benchmark basis [e1, e2, r1, r2, r1^2, r2^2, a]. It is indefinite;
/// callers that need a sub-Bellman (monotone-start) initializer should build
/// one with construct_compliant_params instead.
Eigen::MatrixXd initial_matrix();

/// Linear stabilizing policy coefficients over the base features
/// [e1, e2, r1, r2, r1^2, r2^2]: mu(z) = -1.5 e1 + 0.5 e2.
Eigen::VectorXd stabilizing_policy_coefficients();

/// Published converged parameter matrices for the unconstrained and
/// constrained-input benchmark studies; used as comparison targets by the
/// acceptance suite and reported alongside fresh runs.
Eigen::MatrixXd reference_solution_unconstrained();
Eigen::MatrixXd reference_solution_constrained();

}  // namespace msqlp::benchmark

#endif  // MSQLP_BENCHMARK_SYSTEM_HPP
