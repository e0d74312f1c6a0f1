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
#ifndef MSQLP_SAMPLING_HPP
#define MSQLP_SAMPLING_HPP

#include <Eigen/Core>
#include <cstdint>
#include <string>
#include <vector>

#include "msqlp/plant.hpp"
#include "msqlp/qfunc.hpp"

namespace msqlp {

/// Per-dimension uniform ranges for the excitation sampling of (z, a).
struct BufferConfig {
    int size = 2000;
    Eigen::VectorXd state_lower;   // over the stacked z = [e; r]
    Eigen::VectorXd state_upper;
    Eigen::VectorXd action_lower;
    Eigen::VectorXd action_upper;

    static BufferConfig uniform(int size, int state_dim, double state_radius,
                                int action_dim, double action_radius);
};

struct Sample {
    AugmentedState state;      // z_b
    Eigen::VectorXd action;    // a_b (raw excitation action)
    double cost = 0.0;         // L(z_b, a_b) = l(z_b, s(a_b))
    AugmentedState next;       // z_{1,b} = F(z_b, s(a_b))
};

/// Randomized experience replay buffer: drawn once, reused every iteration.
struct SampleBuffer {
    std::vector<Sample> samples;
    std::uint64_t seed = 0;
    BufferConfig config;

    int size() const { return static_cast<int>(samples.size()); }
};

/// Draws (z_b, a_b) i.i.d. uniform from the configured ranges and queries the
/// plant once per sample. Deterministic in (seed, config).
SampleBuffer build_buffer(const PlantModel& plant, const BufferConfig& config,
                          std::uint64_t seed);

/// Columnar CSV audit format; reload gives a bit-identical buffer.
void save_buffer_csv(const SampleBuffer& buffer, const std::string& path,
                     const std::string& header_comment = "");
SampleBuffer load_buffer_csv(const PlantModel& plant, const std::string& path);

/// What to do when a rollout reaches the edge of the trust region. Truncate
/// ends the trajectory at the last usable state and keeps the sample with a
/// shorter effective horizon; Drop discards the sample for this iteration.
enum class RolloutMode { Truncate, Drop };

/// Per-sample multi-step trajectory data for one policy-evaluation pass.
/// Trajectories start at the stored z_{1,b}; a full-length trajectory carries
/// H states, H-1 on-policy stage costs and the terminal action.
struct RolloutSet {
    struct Trajectory {
        std::vector<AugmentedState> states;   // z_1 .. z_{H_b} (empty when dropped)
        std::vector<double> stage_costs;      // L(z_l, mu(z_l)), l = 1 .. H_b-1
        Eigen::VectorXd terminal_action;      // mu(z_{H_b})
        bool dropped = false;
        bool truncated = false;

        int effective_horizon() const { return static_cast<int>(states.size()); }
    };

    std::vector<Trajectory> trajectories;
    int horizon = 1;
    int policy_id = 0;

    int dropped_count() const;
    int truncated_count() const;
    int surviving_count() const;
};

/// Rolls the policy for up to horizon-1 steps from every stored successor
/// state, stopping a trajectory before it would leave the trust region
/// (state norm above `divergence_threshold`). Results do not depend on
/// thread scheduling.
RolloutSet collect_rollouts(const PlantModel& plant, const SampleBuffer& buffer,
                            const Policy& policy, int horizon,
                            double divergence_threshold = 1e6,
                            RolloutMode mode = RolloutMode::Truncate,
                            int policy_id = 0);

}  // namespace msqlp

#endif  // MSQLP_SAMPLING_HPP
