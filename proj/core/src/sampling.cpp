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
#include "msqlp/sampling.hpp"

#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>

namespace msqlp {

BufferConfig BufferConfig::uniform(int size, int state_dim, double state_radius,
                                   int action_dim, double action_radius) {
    BufferConfig cfg;
    cfg.size = size;
    cfg.state_lower = Eigen::VectorXd::Constant(2 * state_dim, -state_radius);
    cfg.state_upper = Eigen::VectorXd::Constant(2 * state_dim, state_radius);
    cfg.action_lower = Eigen::VectorXd::Constant(action_dim, -action_radius);
    cfg.action_upper = Eigen::VectorXd::Constant(action_dim, action_radius);
    return cfg;
}

namespace {

// Fixed uniform transform so buffers reproduce bit-identically for a seed,
// independent of the standard library's distribution implementation.
class UniformSource {
public:
    explicit UniformSource(std::uint64_t seed) : engine_(seed) {}

    double draw(double lo, double hi) {
        const double u = static_cast<double>(engine_() >> 11) * 0x1.0p-53;
        return lo + (hi - lo) * u;
    }

private:
    std::mt19937_64 engine_;
};

}  // namespace

SampleBuffer build_buffer(const PlantModel& plant, const BufferConfig& config,
                          std::uint64_t seed) {
    if (config.size < 1) throw InvalidArgument("build_buffer: size must be >= 1");
    const int zdim = 2 * plant.state_dim;
    if (config.state_lower.size() != zdim || config.state_upper.size() != zdim ||
        config.action_lower.size() != plant.input_dim ||
        config.action_upper.size() != plant.input_dim) {
        throw InvalidArgument("build_buffer: range dimension mismatch");
    }
    if ((config.state_lower.array() >= config.state_upper.array()).any() ||
        (config.action_lower.array() >= config.action_upper.array()).any()) {
        throw InvalidArgument("build_buffer: empty range");
    }

    UniformSource rng(seed);
    SampleBuffer buffer;
    buffer.seed = seed;
    buffer.config = config;
    buffer.samples.reserve(config.size);
    for (int b = 0; b < config.size; ++b) {
        Eigen::VectorXd z(zdim);
        for (int i = 0; i < zdim; ++i) z[i] = rng.draw(config.state_lower[i], config.state_upper[i]);
        Eigen::VectorXd a(plant.input_dim);
        for (int i = 0; i < plant.input_dim; ++i) a[i] = rng.draw(config.action_lower[i], config.action_upper[i]);

        Sample s;
        s.state = AugmentedState::from_stacked(z);
        s.action = a;
        try {
            s.cost = stage_cost_observed(plant, s.state, a);
            s.next = step_augmented(plant, s.state, a);
        } catch (const NumericalOverflow& e) {
            throw NumericalOverflow("build_buffer: plant overflow at sample " + std::to_string(b) +
                                        ": " + e.what(),
                                    e.offending_state);
        }
        buffer.samples.push_back(std::move(s));
    }
    return buffer;
}

namespace {

std::string format17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

void save_buffer_csv(const SampleBuffer& buffer, const std::string& path,
                     const std::string& header_comment) {
    std::ofstream out(path);
    if (!out) throw InvalidArgument("save_buffer_csv: cannot open " + path);
    if (!header_comment.empty()) out << "# " << header_comment << "\n";
    out << "# seed=" << buffer.seed << "\n";
    const int n = static_cast<int>(buffer.samples.front().state.state_dim());
    const int m = static_cast<int>(buffer.samples.front().action.size());
    for (int i = 0; i < 2 * n; ++i) out << "z" << i + 1 << ",";
    for (int i = 0; i < m; ++i) out << "a" << i + 1 << ",";
    out << "cost";
    for (int i = 0; i < 2 * n; ++i) out << ",next" << i + 1;
    out << "\n";
    for (const auto& s : buffer.samples) {
        const Eigen::VectorXd z = s.state.stacked();
        const Eigen::VectorXd y = s.next.stacked();
        for (Eigen::Index i = 0; i < z.size(); ++i) out << format17(z[i]) << ",";
        for (Eigen::Index i = 0; i < s.action.size(); ++i) out << format17(s.action[i]) << ",";
        out << format17(s.cost);
        for (Eigen::Index i = 0; i < y.size(); ++i) out << "," << format17(y[i]);
        out << "\n";
    }
}

SampleBuffer load_buffer_csv(const PlantModel& plant, const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InvalidArgument("load_buffer_csv: cannot open " + path);
    SampleBuffer buffer;
    const int zdim = 2 * plant.state_dim;
    const int m = plant.input_dim;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (line[0] == '#') {
            const auto pos = line.find("seed=");
            if (pos != std::string::npos) buffer.seed = std::strtoull(line.c_str() + pos + 5, nullptr, 10);
            continue;
        }
        if (line.rfind("z1,", 0) == 0) continue;  // header row
        std::stringstream ss(line);
        std::vector<double> vals;
        std::string tok;
        while (std::getline(ss, tok, ',')) vals.push_back(std::strtod(tok.c_str(), nullptr));
        if (static_cast<int>(vals.size()) != 2 * zdim + m + 1) {
            throw InvalidArgument("load_buffer_csv: bad row width in " + path);
        }
        Sample s;
        s.state = AugmentedState::from_stacked(Eigen::Map<const Eigen::VectorXd>(vals.data(), zdim));
        s.action = Eigen::Map<const Eigen::VectorXd>(vals.data() + zdim, m);
        s.cost = vals[zdim + m];
        s.next = AugmentedState::from_stacked(Eigen::Map<const Eigen::VectorXd>(vals.data() + zdim + m + 1, zdim));
        buffer.samples.push_back(std::move(s));
    }
    if (buffer.samples.empty()) throw InvalidArgument("load_buffer_csv: no samples in " + path);
    return buffer;
}

int RolloutSet::dropped_count() const {
    int n = 0;
    for (const auto& t : trajectories) n += t.dropped ? 1 : 0;
    return n;
}

int RolloutSet::truncated_count() const {
    int n = 0;
    for (const auto& t : trajectories) n += t.truncated ? 1 : 0;
    return n;
}

int RolloutSet::surviving_count() const {
    return static_cast<int>(trajectories.size()) - dropped_count();
}

RolloutSet collect_rollouts(const PlantModel& plant, const SampleBuffer& buffer,
                            const Policy& policy, int horizon,
                            double divergence_threshold, RolloutMode mode,
                            int policy_id) {
    if (horizon < 1) throw InvalidArgument("collect_rollouts: horizon must be >= 1");
    if (buffer.samples.empty()) throw InvalidArgument("collect_rollouts: empty buffer");

    RolloutSet set;
    set.horizon = horizon;
    set.policy_id = policy_id;
    set.trajectories.resize(buffer.samples.size());

    for (std::size_t b = 0; b < buffer.samples.size(); ++b) {
        auto& traj = set.trajectories[b];
        traj.states.reserve(horizon);
        traj.states.push_back(buffer.samples[b].next);
        bool hit_boundary = false;
        for (int l = 1; l < horizon; ++l) {
            const AugmentedState& z = traj.states.back();
            if (z.stacked().norm() > divergence_threshold) {
                hit_boundary = true;
                break;
            }
            const Eigen::VectorXd a = policy.action(z);
            AugmentedState next;
            try {
                next = step_augmented(plant, z, a);
            } catch (const NumericalOverflow&) {
                hit_boundary = true;
                break;
            }
            if (next.stacked().norm() > divergence_threshold) {
                hit_boundary = true;
                break;
            }
            traj.stage_costs.push_back(stage_cost_observed(plant, z, a));
            traj.states.push_back(next);
        }
        if (hit_boundary && mode == RolloutMode::Drop) {
            traj.dropped = true;
            traj.states.clear();
            traj.stage_costs.clear();
            continue;
        }
        traj.truncated = hit_boundary;
        traj.terminal_action = policy.action(traj.states.back());
    }
    return set;
}

}  // namespace msqlp
