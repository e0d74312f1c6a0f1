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
#ifndef MSQLP_ERRORS_HPP
#define MSQLP_ERRORS_HPP

#include <Eigen/Core>
#include <cstddef>
#include <stdexcept>
#include <string>

namespace msqlp {

class InvalidArgument : public std::invalid_argument {
public:
    explicit InvalidArgument(const std::string& what) : std::invalid_argument(what) {}
};

/// A dynamics or cost evaluation produced a non-finite value, or a simulated
/// state crossed the divergence threshold. Carries the offending state.
class NumericalOverflow : public std::runtime_error {
public:
    NumericalOverflow(const std::string& what, Eigen::VectorXd state)
        : std::runtime_error(what), offending_state(std::move(state)) {}

    Eigen::VectorXd offending_state;
};

/// Greedy policy improvement was requested for a Q-function whose
/// action-action block is not positive definite. Carries the block.
class IllPosedPolicy : public std::runtime_error {
public:
    IllPosedPolicy(const std::string& what, Eigen::MatrixXd block)
        : std::runtime_error(what), action_block(std::move(block)) {}

    Eigen::MatrixXd action_block;
};

/// A rollout left the trust region at sample `sample` after `step` steps.
class DivergedRollout : public std::runtime_error {
public:
    DivergedRollout(const std::string& what, std::size_t sample, int step)
        : std::runtime_error(what), sample(sample), step(step) {}

    std::size_t sample;
    int step;
};

}  // namespace msqlp

#endif  // MSQLP_ERRORS_HPP
