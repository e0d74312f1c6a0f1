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
#ifndef MSQLP_PLANT_HPP
#define MSQLP_PLANT_HPP

#include <Eigen/Core>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "msqlp/errors.hpp"

namespace msqlp {

/// Stacked tracking-error / reference vector z = [e; r]. Both halves have the
/// plant's state dimension; the plant state itself is x = e + r.
struct AugmentedState {
    Eigen::VectorXd error;
    Eigen::VectorXd reference;

    AugmentedState() = default;
    AugmentedState(Eigen::VectorXd e, Eigen::VectorXd r);

    Eigen::Index state_dim() const { return error.size(); }
    Eigen::Index dim() const { return error.size() + reference.size(); }
    Eigen::VectorXd plant_state() const { return error + reference; }
    Eigen::VectorXd stacked() const;

    static AugmentedState from_stacked(const Eigen::VectorXd& z);
};

/// Control vector plus a flag recording whether the saturation map has been
/// applied. When `saturated` is true every channel obeys the plant bounds.
struct ControlInput {
    Eigen::VectorXd value;
    bool saturated = false;
};

/// Black-box system description: dynamics, reference generator, stage cost and
/// per-channel input bounds. Algorithms interact with it only through
/// step_augmented and stage_cost_observed.
struct PlantModel {
    int state_dim = 0;
    int input_dim = 0;
    std::function<Eigen::VectorXd(const Eigen::VectorXd&, const Eigen::VectorXd&)> dynamics;
    std::function<Eigen::VectorXd(const Eigen::VectorXd&)> reference_map;
    std::function<double(const AugmentedState&, const Eigen::VectorXd&)> stage_cost;
    /// Empty bounds disable saturation entirely (s = identity).
    std::optional<Eigen::VectorXd> input_bounds;

    PlantModel without_bounds() const;
};

struct ClosedLoopTrajectory {
    std::vector<AugmentedState> states;            // length steps + 1
    std::vector<ControlInput> applied_inputs;      // length steps
    std::vector<Eigen::VectorXd> unconstrained_actions;
    std::vector<double> stage_costs;
    double discounted_cost = 0.0;
};

/// Clamps each channel of `raw` to [-bounds_j, bounds_j]. With no bounds the
/// input passes through unchanged (identity saturation).
ControlInput saturate(const Eigen::VectorXd& raw,
                      const std::optional<Eigen::VectorXd>& bounds);

/// One step of the augmented system: z' = [f(e + r, s(a)) - g(r); g(r)].
/// Saturation is applied internally before the dynamics are queried.
AugmentedState step_augmented(const PlantModel& plant, const AugmentedState& z,
                              const Eigen::VectorXd& action);

/// Observed stage cost L(z, a) = l(z, s(a)).
double stage_cost_observed(const PlantModel& plant, const AugmentedState& z,
                           const Eigen::VectorXd& action);

/// Rolls the closed loop under `policy` for `steps` steps, recording raw and
/// saturated inputs and the discounted cost. Throws NumericalOverflow when the
/// plant state norm exceeds `divergence_threshold`; the partial trajectory is
/// carried in the exception's offending state.
ClosedLoopTrajectory simulate_closed_loop(
    const PlantModel& plant,
    const std::function<Eigen::VectorXd(const AugmentedState&)>& policy,
    const Eigen::VectorXd& x0, const Eigen::VectorXd& r0, int steps,
    double gamma, double divergence_threshold = 1e6);

/// Named plant factories. "benchmark-v" is built in.
using PlantFactory = std::function<PlantModel()>;
std::map<std::string, PlantFactory>& plant_registry();
PlantModel make_plant(const std::string& name);
void register_plant(const std::string& name, PlantFactory factory);

}  // namespace msqlp

#endif  // MSQLP_PLANT_HPP
