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

#ifndef PACOH_CONTROL_HPP_
#define PACOH_CONTROL_HPP_

#include <functional>
#include <optional>
#include <vector>

#include "pacoh/envs.hpp"
#include "pacoh/inference.hpp"
#include "pacoh/random.hpp"
#include "pacoh/types.hpp"

namespace pacoh {

struct ICEMConfig {
  int iterations = 5;              // n_it
  int population = 1000;           // n_p
  int horizon = 40;                // h
  int elites = 50;                 // n_e
  double reduction = 1.25;         // gamma
  double init_std = 0.5;           // sigma_init
  double noise_beta = 2.0;         // colored-noise exponent
  double momentum = 0.2;           // alpha
  double elite_keep_fraction = 0.3;
  double optimism = 1.0;           // nu
  double min_std = 1e-3;

  static ICEMConfig paper();
  static ICEMConfig desk();
  void validate() const;
};

// n_{p,i} = max(floor(n_p * gamma^-i), 2 n_e), iterations counted from 0.
int population_at(const ICEMConfig& cfg, int iteration);

// `count` independent (dims x horizon) sequences with power spectral density
// proportional to 1/f^beta, scaled to zero mean and unit variance per entry.
std::vector<Matrix> colored_noise(double beta, Index dims, Index horizon, Index count, Rng& rng);

// Anything that maps batches of (state, action) to a predictive mean and
// epistemic standard deviation.
class TransitionModel {
 public:
  virtual ~TransitionModel() = default;
  virtual Index state_dim() const = 0;
  virtual Index action_dim() const = 0;
  virtual PredictiveBatch predict(const Eigen::Ref<const Matrix>& states,
                                  const Eigen::Ref<const Matrix>& actions) const = 0;
};

class EnsembleModel final : public TransitionModel {
 public:
  explicit EnsembleModel(const ParticleEnsemble& ens) : ens_(ens) {}
  Index state_dim() const override { return ens_.arch.output_dim(); }
  Index action_dim() const override { return ens_.arch.input_dim() - ens_.arch.output_dim(); }
  PredictiveBatch predict(const Eigen::Ref<const Matrix>& states,
                          const Eigen::Ref<const Matrix>& actions) const override {
    return predict_batch(ens_, states, actions);
  }

 private:
  const ParticleEnsemble& ens_;
};

// The simulator itself with zero epistemic spread; a test hook.
class TrueDynamicsModel final : public TransitionModel {
 public:
  explicit TrueDynamicsModel(TaskParams params) : params_(params) {}
  Index state_dim() const override { return env_spec(env_of(params_)).state_dim; }
  Index action_dim() const override { return env_spec(env_of(params_)).action_dim; }
  PredictiveBatch predict(const Eigen::Ref<const Matrix>& states,
                          const Eigen::Ref<const Matrix>& actions) const override;

 private:
  TaskParams params_;
};

// Row-wise rewards for (n x d_s) states and (n x d_a) actions.
using BatchReward = std::function<Vector(const Eigen::Ref<const Matrix>&, const Eigen::Ref<const Matrix>&)>;
BatchReward batch_reward(const RewardFunction& reward);

// Real actions plus hallucinated controls over the horizon, each column one step.
struct AugmentedPlan {
  Matrix actions;  // d_a x h
  Matrix halluc;   // d_s x h

  Index horizon() const { return actions.cols(); }
  Matrix stacked() const;
  static AugmentedPlan from_stacked(const Eigen::Ref<const Matrix>& stacked, Index action_dim);
};

struct PlanDistribution {
  Matrix mean;  // (d_a + d_s) x h
  Matrix std;
};

struct Trajectory {
  Matrix states;  // (h + 1) x d_s, row t is s_{t}
  double ret = 0.0;
  bool diverged = false;
};

inline constexpr double kDivergedReturn = -1e9;

enum class PlannerMode { kOptimistic, kGreedy };

// s_{h+1} = mu(s_h, a_h) + nu * eta_h * sigma(s_h, a_h); R = sum_h r(s_h, a_h).
Trajectory simulate_optimistic(const TransitionModel& model, const Eigen::Ref<const Vector>& s0,
                               const BatchReward& reward, const AugmentedPlan& plan, double nu);

// s_{h+1} ~ N(mu(s_h, a_h), sigma^2(s_h, a_h)).
Trajectory simulate_ds(const TransitionModel& model, const Eigen::Ref<const Vector>& s0,
                       const BatchReward& reward, const Eigen::Ref<const Matrix>& actions,
                       Rng& rng);

// Returns of many stacked candidates evaluated together. Diverging rollouts
// receive kDivergedReturn.
Vector rollout_returns(const TransitionModel& model, const Eigen::Ref<const Vector>& s0,
                       const BatchReward& reward, const std::vector<Matrix>& candidates,
                       double nu, PlannerMode mode, Rng& rng, Index* n_diverged = nullptr);

struct IterationStats {
  int candidates = 0;
  double best_return = 0.0;
  double elite_mean = 0.0;
  double elite_std = 0.0;
};

struct WarmStart {
  Matrix mean;                // already shifted
  std::vector<Matrix> elites; // already shifted
};

struct PlanResult {
  AugmentedPlan best;
  double best_return = 0.0;
  PlanDistribution distribution;
  std::vector<Matrix> elites;
  std::vector<IterationStats> iterations;
  Index diverged = 0;
};

PlanResult icem_plan(const TransitionModel& model, const Eigen::Ref<const Vector>& s0,
                     const BatchReward& reward, const ICEMConfig& cfg,
                     const std::optional<WarmStart>& warm, PlannerMode mode, Rng& rng,
                     Rng* ds_rng = nullptr);

// Drops the first column and repeats the last one.
Matrix shift_plan(const Matrix& m);

struct StepLog {
  int step = 0;
  int iterations = 0;
  double best_return = 0.0;
  double elite_mean = 0.0;
  double elite_std = 0.0;
};

struct MpcResult {
  TransitionDataset transitions;
  Vector rewards;
  double ret = 0.0;
  Vector epistemic_std;  // mean over state dims of sigma(s_t, a_t)
  std::vector<StepLog> log;
};

// Receding-horizon control on the true environment for T steps. Greedy
// rollouts draw their transition noise from `ds_rng` when given, otherwise
// from `rng`.
MpcResult mpc_rollout(const TaskParams& env, const TransitionModel& model,
                      const RewardFunction& reward, const ICEMConfig& cfg, int steps,
                      PlannerMode mode, Rng& rng, const EnvState& initial_state,
                      Rng* ds_rng = nullptr);

}  // namespace pacoh

#endif  // PACOH_CONTROL_HPP_
