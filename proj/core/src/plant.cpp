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
#include "msqlp/plant.hpp"

#include <cmath>

#include "msqlp/benchmark_system.hpp"

namespace msqlp {

AugmentedState::AugmentedState(Eigen::VectorXd e, Eigen::VectorXd r)
    : error(std::move(e)), reference(std::move(r)) {
    if (error.size() != reference.size()) {
        throw InvalidArgument("AugmentedState: error and reference must have equal length");
    }
}

Eigen::VectorXd AugmentedState::stacked() const {
    Eigen::VectorXd z(dim());
    z << error, reference;
    return z;
}

AugmentedState AugmentedState::from_stacked(const Eigen::VectorXd& z) {
    if (z.size() % 2 != 0) {
        throw InvalidArgument("AugmentedState::from_stacked: odd length");
    }
    const Eigen::Index n = z.size() / 2;
    return AugmentedState(z.head(n), z.tail(n));
}

PlantModel PlantModel::without_bounds() const {
    PlantModel copy = *this;
    copy.input_bounds.reset();
    return copy;
}

ControlInput saturate(const Eigen::VectorXd& raw,
                      const std::optional<Eigen::VectorXd>& bounds) {
    if (!bounds) {
        return ControlInput{raw, true};
    }
    if (bounds->size() != raw.size()) {
        throw InvalidArgument("saturate: bounds dimension mismatch");
    }
    if ((bounds->array() <= 0.0).any()) {
        throw InvalidArgument("saturate: bounds must be strictly positive");
    }
    ControlInput out;
    out.value = raw.cwiseMin(*bounds).cwiseMax(-*bounds);
    out.saturated = true;
    return out;
}

namespace {

void check_finite(const AugmentedState& z, const Eigen::VectorXd& action) {
    if (!z.error.allFinite() || !z.reference.allFinite() || !action.allFinite()) {
        throw InvalidArgument("non-finite state or action");
    }
}

}  // namespace

AugmentedState step_augmented(const PlantModel& plant, const AugmentedState& z,
                              const Eigen::VectorXd& action) {
    if (z.state_dim() != plant.state_dim || action.size() != plant.input_dim) {
        throw InvalidArgument("step_augmented: dimension mismatch");
    }
    check_finite(z, action);
    const Eigen::VectorXd u = saturate(action, plant.input_bounds).value;
    const Eigen::VectorXd next_ref = plant.reference_map(z.reference);
    const Eigen::VectorXd next_state = plant.dynamics(z.plant_state(), u);
    if (!next_state.allFinite() || !next_ref.allFinite()) {
        Eigen::VectorXd bad(next_state.size() + next_ref.size());
        bad << next_state, next_ref;
        throw NumericalOverflow("step_augmented: non-finite dynamics output", bad);
    }
    return AugmentedState(next_state - next_ref, next_ref);
}

double stage_cost_observed(const PlantModel& plant, const AugmentedState& z,
                           const Eigen::VectorXd& action) {
    if (z.state_dim() != plant.state_dim || action.size() != plant.input_dim) {
        throw InvalidArgument("stage_cost_observed: dimension mismatch");
    }
    check_finite(z, action);
    const Eigen::VectorXd u = saturate(action, plant.input_bounds).value;
    return plant.stage_cost(z, u);
}

ClosedLoopTrajectory simulate_closed_loop(
    const PlantModel& plant,
    const std::function<Eigen::VectorXd(const AugmentedState&)>& policy,
    const Eigen::VectorXd& x0, const Eigen::VectorXd& r0, int steps,
    double gamma, double divergence_threshold) {
    if (steps < 1) throw InvalidArgument("simulate_closed_loop: steps must be >= 1");
    if (gamma < 0.0 || gamma > 1.0) throw InvalidArgument("simulate_closed_loop: gamma out of [0, 1]");

    ClosedLoopTrajectory traj;
    AugmentedState z(x0 - r0, r0);
    traj.states.push_back(z);
    double discount = 1.0;
    for (int k = 0; k < steps; ++k) {
        if (z.plant_state().norm() > divergence_threshold) {
            throw NumericalOverflow("simulate_closed_loop: state norm exceeded divergence threshold at step " +
                                        std::to_string(k),
                                    z.stacked());
        }
        const Eigen::VectorXd raw = policy(z);
        const ControlInput u = saturate(raw, plant.input_bounds);
        const double cost = plant.stage_cost(z, u.value);
        traj.unconstrained_actions.push_back(raw);
        traj.applied_inputs.push_back(u);
        traj.stage_costs.push_back(cost);
        traj.discounted_cost += discount * cost;
        discount *= gamma;
        z = step_augmented(plant, z, raw);
        traj.states.push_back(z);
    }
    return traj;
}

std::map<std::string, PlantFactory>& plant_registry() {
    static std::map<std::string, PlantFactory> registry = {
        {"benchmark-v", [] { return benchmark::make_benchmark_plant(); }},
    };
    return registry;
}

PlantModel make_plant(const std::string& name) {
    auto& reg = plant_registry();
    auto it = reg.find(name);
    if (it == reg.end()) {
        throw InvalidArgument("unknown plant: " + name);
    }
    return it->second();
}

void register_plant(const std::string& name, PlantFactory factory) {
    plant_registry()[name] = std::move(factory);
}

}  // namespace msqlp
