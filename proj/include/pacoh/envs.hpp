// Copyright 2026 The pacoh-rl Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef PACOH_ENVS_HPP_
#define PACOH_ENVS_HPP_

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <variant>
#include <vector>

#include "pacoh/random.hpp"
#include "pacoh/transitions.hpp"
#include "pacoh/types.hpp"

namespace pacoh {

enum class EnvId { kPendulum, kCartpole };
enum class RewardVariant { kDense, kSparse };

std::string to_string(EnvId env);
std::string to_string(RewardVariant variant);
EnvId env_from_string(const std::string& name);
RewardVariant variant_from_string(const std::string& name);

// Swing-up pendulum; angle 0 is upright. Torque = action * max_torque.
struct PendulumParams {
  double mass = 1.0;
  double length = 1.0;
  double damping = 0.0;
  double max_torque = 2.0;
};

// Cart with a pole hinged on top; angle 0 is upright. Force = action * max_force.
struct CartpoleParams {
  double pole_mass = 0.1;
  double pole_length = 1.0;
  double cart_mass = 1.0;
  double max_force = 10.0;
};

using TaskParams = std::variant<PendulumParams, CartpoleParams>;

EnvId env_of(const TaskParams& params);
std::string describe(const TaskParams& params);

struct EnvSpec {
  Index physical_dim;  // internal simulator state
  Index state_dim;     // observation fed to the model and the planner
  Index action_dim;
  double dt;
  int substeps;
};

EnvSpec env_spec(EnvId env);

// Physical state: pendulum (theta, omega); cartpole (x, x_dot, theta, omega).
// Angles are wrapped to (-pi, pi].
using EnvState = Vector;

double wrap_angle(double theta);

// Advances one control period with semi-implicit Euler substeps. Actions are
// clipped to [-1, 1].
EnvState env_step(const TaskParams& params, const EnvState& state,
                  const Eigen::Ref<const Vector>& action);

// Model-space state: pendulum (cos, sin, omega); cartpole (x, x_dot, cos, sin, omega).
Vector observe(EnvId env, const EnvState& state);
EnvState state_from_observation(EnvId env, const Eigen::Ref<const Vector>& obs);

// Hanging down at rest.
EnvState rest_down_state(EnvId env);
// Angle uniform on the circle, small random velocities.
EnvState random_state(EnvId env, Rng& rng);

// Mechanical energy with the potential measured from the lowest pole position.
double pendulum_energy(const PendulumParams& params, const EnvState& state);

struct ToleranceSpec {
  double lower = 0.0;
  double upper = 0.0;
  double margin = 0.0;
  double value_at_margin = 0.1;
};

// 1 inside [lower, upper]; outside, exp(ln(value_at_margin) * (d / margin)^2)
// for distance d from the nearest bound. margin = 0 gives a hard indicator.
double tolerance(double x, const ToleranceSpec& spec);

// Per-step reward r(s, a) on model-space states and normalized actions.
class RewardFunction {
 public:
  RewardFunction(EnvId env, RewardVariant variant, double pole_length = 1.0);
  RewardFunction(const TaskParams& params, RewardVariant variant);

  double operator()(const Eigen::Ref<const Vector>& state,
                    const Eigen::Ref<const Vector>& action) const;
  // Row-wise rewards for (n x d_s) states and (n x d_a) actions.
  Vector batch(const Eigen::Ref<const Matrix>& states, const Eigen::Ref<const Matrix>& actions) const;

  EnvId env() const { return env_; }
  RewardVariant variant() const { return variant_; }

 private:
  EnvId env_;
  RewardVariant variant_;
  double pole_length_;
};

// Uniform draws around the nominal parameters: pendulum mass/length in
// [0.5, 1.5]x nominal and damping in [0.005, 0.05]; cartpole pole mass,
// pole length and cart mass in [0.6, 1.4]x nominal.
std::vector<TaskParams> sample_tasks(EnvId env, int n, std::uint64_t seed);

using BehaviorPolicy = std::function<Vector(const Eigen::Ref<const Vector>& obs, Rng& rng)>;
BehaviorPolicy uniform_random_policy(Index action_dim);
BehaviorPolicy zero_policy(Index action_dim);

enum class InitialState { kRestDown, kRandom };

// Concatenated transitions of `episodes` rollouts of length `horizon`.
TransitionDataset collect_meta_dataset(const TaskParams& params, int episodes, int horizon,
                                       const BehaviorPolicy& policy, InitialState init,
                                       Rng& rng);

// Columnar text file: '#'-prefixed header (format, env, d_s, d_a, task, seed),
// a column-name line, then one row s || a || s' per transition.
struct DatasetFile {
  TransitionDataset data;
  TaskParams params;
  std::uint64_t seed = 0;
};

void write_dataset(const std::filesystem::path& path, const DatasetFile& file);
DatasetFile read_dataset(const std::filesystem::path& path);

}  // namespace pacoh

#endif  // PACOH_ENVS_HPP_
