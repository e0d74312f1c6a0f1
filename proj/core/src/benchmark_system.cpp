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
#include "msqlp/benchmark_system.hpp"

#include <cmath>

namespace msqlp::benchmark {

PlantModel make_benchmark_plant() {
    PlantModel plant;
    plant.state_dim = 2;
    plant.input_dim = 1;
    plant.input_bounds = Eigen::VectorXd::Constant(1, default_input_bound);
    plant.dynamics = [](const Eigen::VectorXd& x, const Eigen::VectorXd& u) {
        Eigen::VectorXd next(2);
        next[0] = (x[0] + x[1] * x[1] + u[0]) * std::cos(x[1]);
        next[1] = (2.0 * x[0] * x[0] + 2.0 * x[1] + 2.0 * u[0]) * std::sin(x[1]);
        return next;
    };
    plant.reference_map = [](const Eigen::VectorXd& r) {
        Eigen::VectorXd next(2);
        next[0] = 0.9751 * r[0] + 0.0992 * r[1];
        next[1] = -0.4958 * r[0] + 0.9751 * r[1];
        return next;
    };
    plant.stage_cost = [](const AugmentedState& z, const Eigen::VectorXd& u) {
        return 4.0 * z.error.squaredNorm() + u.squaredNorm();
    };
    return plant;
}

Eigen::MatrixXd initial_matrix() {
    Eigen::MatrixXd p(7, 7);
    p << 34.49, -1.88, -0.36, -9.25, -6.86, 11.84, 3.97,
        -1.88, 96.46, 7.25, 29.08, -7.05, -22.61, -3.71,
        -0.36, 7.25, 21.69, 5.4, -18.23, 1.13, 4.85,
        -9.25, 29.08, 5.4, 19.68, -2.49, -11.5, -4.89,
        -6.86, -7.05, -18.23, -2.49, 39.83, 1.64, -13.31,
        11.84, -22.61, 1.13, -11.5, 1.64, 22.86, 3.38,
        3.97, -3.71, 4.85, -4.89, -13.31, 3.38, 0.69;
    return p;
}

Eigen::VectorXd stabilizing_policy_coefficients() {
    Eigen::VectorXd c(6);
    c << -1.5, 0.5, 0.0, 0.0, 0.0, 0.0;
    return c;
}

Eigen::MatrixXd reference_solution_unconstrained() {
    Eigen::MatrixXd p(7, 7);
    p << 1.4919, -0.3188, 1.6205, -1.5628, 1.1226, 1.1514, -0.4904,
        -0.3188, 1.4633, 1.0812, 2.0894, -0.6807, -1.2905, 0.5798,
        1.6205, 1.0812, 1.7562, -1.4084, 1.1803, 0.8366, -0.1929,
        -1.5628, 2.0894, -1.4084, 2.3127, -1.1903, -0.8835, -0.41,
        1.1226, -0.6807, 1.1803, -1.1903, 1.1439, 0.9940, 0.2128,
        1.1514, -1.2905, 0.8366, -0.8835, 0.9940, 0.9997, -0.3828,
        -0.4904, 0.5798, -0.1929, -0.41, 0.2128, -0.3828, 1.2541;
    return p;
}

Eigen::MatrixXd reference_solution_constrained() {
    Eigen::MatrixXd p(7, 7);
    p << 3.41, 0.3425, 3.1847, -1.4843, -0.2365, 0.8246, -0.353,
        0.3425, 2.2134, 0.3118, -0.831, -0.0006, -0.3326, 0.2298,
        3.1847, 0.3118, 6.4281, -4.2846, 0.6503, 1.0746, -0.9133,
        -1.4843, -0.831, -4.2846, 5.4101, -0.6801, -0.8131, 0.033,
        -0.2365, -0.0006, 0.6503, -0.6801, 1.616, -1.6175, -0.388,
        0.8246, -0.3326, 1.0746, -0.8131, -1.6175, 2.6316, 0.0135,
        -0.353, 0.2298, -0.9133, 0.033, -0.388, 0.0135, 1.9404;
    return p;
}

}  // namespace msqlp::benchmark
