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

#include "pacoh/control.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "pacoh/errors.hpp"

namespace pacoh {

ICEMConfig ICEMConfig::paper() { return ICEMConfig{}; }

ICEMConfig ICEMConfig::desk() {
  ICEMConfig cfg;
  cfg.iterations = 3;
  cfg.population = 200;
  cfg.horizon = 25;
  return cfg;
}

void ICEMConfig::validate() const {
  if (iterations < 1) throw ConfigError("planner: iterations must be >= 1");
  if (horizon < 1) throw ConfigError("planner: horizon must be >= 1");
  if (elites < 1) throw ConfigError("planner: elites must be >= 1");
  if (population < 2 * elites) throw ConfigError("planner: population must be >= 2 * elites");
  if (!(reduction >= 1.0)) throw ConfigError("planner: reduction must be >= 1");
  if (!(init_std > 0.0)) throw ConfigError("planner: init_std must be > 0");
  if (!(noise_beta >= 0.0)) throw ConfigError("planner: noise_beta must be >= 0");
  if (!(momentum >= 0.0 && momentum < 1.0)) throw ConfigError("planner: momentum must be in [0, 1)");
  if (!(elite_keep_fraction >= 0.0 && elite_keep_fraction <= 1.0)) {
    throw ConfigError("planner: elite_keep_fraction must be in [0, 1]");
  }
  if (!(optimism >= 0.0)) throw ConfigError("planner: optimism must be >= 0");
  if (!(min_std > 0.0)) throw ConfigError("planner: min_std must be > 0");
}

int population_at(const ICEMConfig& cfg, int iteration) {
  const double n = std::floor(cfg.population * std::pow(cfg.reduction, -iteration));
  return std::max(static_cast<int>(n), 2 * cfg.elites);
}

std::vector<Matrix> colored_noise(double beta, Index dims, Index horizon, Index count, Rng& rng) {
  if (horizon < 1) throw PreconditionError("colored_noise: horizon must be >= 1");
  std::vector<Matrix> out;
  out.reserve(static_cast<std::size_t>(count));
  if (horizon == 1) {
    const Matrix z = standard_normal(dims, count, rng);
    for (Index i = 0; i < count; ++i) out.emplace_back(z.col(i));
    return out;
  }
  // Inverse real DFT written as two small matrix products. Frequency k has
  // amplitude scale f^(-beta/2); the DC bin borrows the scale of the lowest
  // nonzero frequency and the DC/Nyquist bins are purely real.
  const Index h = horizon;
  const Index nf = h / 2 + 1;
  const bool even = h % 2 == 0;
  Vector scale(nf);
  for (Index k = 0; k < nf; ++k) {
    const double f = static_cast<double>(std::max<Index>(k, 1)) / static_cast<double>(h);
    scale(k) = std::pow(f, -beta / 2.0);
  }
  double var = 2.0 * scale(0) * scale(0);
  for (Index k = 1; k < nf; ++k) {
    const bool nyquist = even && k == nf - 1;
    var += (nyquist ? 2.0 : 4.0) * scale(k) * scale(k);
  }
  const double norm = 1.0 / std::sqrt(var);  // the 1/h factors cancel

  Matrix cos_basis = Matrix::Zero(nf, h);
  Matrix sin_basis = Matrix::Zero(nf, h);
  const double two_pi = 2.0 * std::numbers::pi;
  for (Index k = 0; k < nf; ++k) {
    const bool edge = k == 0 || (even && k == nf - 1);
    for (Index t = 0; t < h; ++t) {
      const double phase = two_pi * static_cast<double>(k * t) / static_cast<double>(h);
      if (edge) {
        cos_basis(k, t) = std::sqrt(2.0) * std::cos(phase) * scale(k) * norm;
      } else {
        cos_basis(k, t) = 2.0 * std::cos(phase) * scale(k) * norm;
        sin_basis(k, t) = -2.0 * std::sin(phase) * scale(k) * norm;
      }
    }
  }
  const Matrix re = standard_normal(count * dims, nf, rng);
  const Matrix im = standard_normal(count * dims, nf, rng);
  const Matrix y = re * cos_basis + im * sin_basis;
  for (Index i = 0; i < count; ++i) out.emplace_back(y.middleRows(i * dims, dims));
  return out;
}

PredictiveBatch TrueDynamicsModel::predict(const Eigen::Ref<const Matrix>& states,
                                           const Eigen::Ref<const Matrix>& actions) const {
  const EnvId env = env_of(params_);
  PredictiveBatch out{Matrix(states.rows(), states.cols()),
                      Matrix::Zero(states.rows(), states.cols())};
  for (Index i = 0; i < states.rows(); ++i) {
    const EnvState s = state_from_observation(env, states.row(i).transpose());
    out.mean.row(i) = observe(env, env_step(params_, s, actions.row(i).transpose())).transpose();
  }
  return out;
}

BatchReward batch_reward(const RewardFunction& reward) {
  return [reward](const Eigen::Ref<const Matrix>& s, const Eigen::Ref<const Matrix>& a) {
    return reward.batch(s, a);
  };
}

Matrix AugmentedPlan::stacked() const {
  Matrix m(actions.rows() + halluc.rows(), actions.cols());
  m << actions, halluc;
  return m;
}

AugmentedPlan AugmentedPlan::from_stacked(const Eigen::Ref<const Matrix>& stacked,
                                          Index action_dim) {
  if (action_dim > stacked.rows()) throw ShapeError("AugmentedPlan: action_dim exceeds rows");
  return {stacked.topRows(action_dim), stacked.bottomRows(stacked.rows() - action_dim)};
}

namespace {

struct BatchRollout {
  Vector returns;
  Matrix first_states;  // trajectory of candidate 0, (h + 1) x d_s
  std::vector<bool> diverged;
};

BatchRollout rollout_batch(const TransitionModel& model, const Eigen::Ref<const Vector>& s0,
                           const BatchReward& reward, const std::vector<Matrix>& cands,
                           double nu, PlannerMode mode, Rng* rng, bool record) {
  const Index ds = model.state_dim();
  const Index da = model.action_dim();
  if (s0.size() != ds) throw ShapeError("rollout: start state has wrong dimension");
  const auto n = static_cast<Index>(cands.size());
  BatchRollout out;
  out.returns = Vector::Zero(n);
  out.diverged.assign(static_cast<std::size_t>(n), false);
  if (n == 0) return out;
  const Index h = cands.front().cols();
  const Index rows_needed = mode == PlannerMode::kOptimistic ? da + ds : da;
  for (const Matrix& c : cands) {
    if (c.cols() != h || c.rows() < rows_needed) throw ShapeError("rollout: candidate shape mismatch");
  }
  Matrix states = s0.transpose().replicate(n, 1);
  Matrix actions(n, da);
  Matrix eta(n, ds);
  if (record) {
    out.first_states.resize(h + 1, ds);
    out.first_states.row(0) = s0.transpose();
  }
  for (Index t = 0; t < h; ++t) {
    for (Index i = 0; i < n; ++i) {
      const Matrix& c = cands[static_cast<std::size_t>(i)];
      actions.row(i) = c.block(0, t, da, 1).transpose();
      if (mode == PlannerMode::kOptimistic) eta.row(i) = c.block(da, t, ds, 1).transpose();
    }
    out.returns += reward(states, actions);
    PredictiveBatch pred = model.predict(states, actions);
    if (mode == PlannerMode::kOptimistic) {
      states = pred.mean + nu * eta.cwiseProduct(pred.epistemic_std);
    } else {
      states = pred.mean + pred.epistemic_std.cwiseProduct(standard_normal(n, ds, *rng));
    }
    for (Index i = 0; i < n; ++i) {
      const auto k = static_cast<std::size_t>(i);
      if (!out.diverged[k] && !(states.row(i).allFinite() && std::isfinite(out.returns(i)))) {
        out.diverged[k] = true;
      }
      if (out.diverged[k]) states.row(i) = s0.transpose();
    }
    if (record) out.first_states.row(t + 1) = states.row(0);
  }
  for (Index i = 0; i < n; ++i) {
    if (out.diverged[static_cast<std::size_t>(i)] || !std::isfinite(out.returns(i))) {
      out.diverged[static_cast<std::size_t>(i)] = true;
      out.returns(i) = kDivergedReturn;
    }
  }
  return out;
}

Trajectory to_trajectory(BatchRollout&& r) {
  Trajectory t;
  t.states = std::move(r.first_states);
  t.ret = r.returns(0);
  t.diverged = r.diverged[0];
  return t;
}

}  // namespace

Trajectory simulate_optimistic(const TransitionModel& model, const Eigen::Ref<const Vector>& s0,
                               const BatchReward& reward, const AugmentedPlan& plan, double nu) {
  if (plan.halluc.rows() != model.state_dim() || plan.actions.rows() != model.action_dim() ||
      plan.halluc.cols() != plan.actions.cols()) {
    throw ShapeError("simulate_optimistic: plan shape does not match the model");
  }
  return to_trajectory(rollout_batch(model, s0, reward, {plan.stacked()}, nu,
                                     PlannerMode::kOptimistic, nullptr, true));
}

Trajectory simulate_ds(const TransitionModel& model, const Eigen::Ref<const Vector>& s0,
                       const BatchReward& reward, const Eigen::Ref<const Matrix>& actions,
                       Rng& rng) {
  if (actions.rows() != model.action_dim()) throw ShapeError("simulate_ds: action dimension mismatch");
  return to_trajectory(rollout_batch(model, s0, reward, {Matrix(actions)}, 0.0,
                                     PlannerMode::kGreedy, &rng, true));
}

Vector rollout_returns(const TransitionModel& model, const Eigen::Ref<const Vector>& s0,
                       const BatchReward& reward, const std::vector<Matrix>& candidates,
                       double nu, PlannerMode mode, Rng& rng, Index* n_diverged) {
  BatchRollout r = rollout_batch(model, s0, reward, candidates, nu, mode, &rng, false);
  if (n_diverged) {
    *n_diverged = static_cast<Index>(std::count(r.diverged.begin(), r.diverged.end(), true));
  }
  return r.returns;
}

Matrix shift_plan(const Matrix& m) {
  if (m.cols() == 0) return m;
  Matrix out(m.rows(), m.cols());
  out.leftCols(m.cols() - 1) = m.rightCols(m.cols() - 1);
  out.col(m.cols() - 1) = m.col(m.cols() - 1);
  return out;
}

PlanResult icem_plan(const TransitionModel& model, const Eigen::Ref<const Vector>& s0,
                     const BatchReward& reward, const ICEMConfig& cfg,
                     const std::optional<WarmStart>& warm, PlannerMode mode, Rng& rng,
                     Rng* ds_rng) {
  cfg.validate();
  const Index da = model.action_dim();
  const Index dim = da + model.state_dim();
  const Index h = cfg.horizon;
  Matrix mean = Matrix::Zero(dim, h);
  if (warm) {
    if (warm->mean.rows() != dim || warm->mean.cols() != h) {
      throw ShapeError("icem_plan: warm-start mean has wrong shape");
    }
    mean = warm->mean;
  }
  Matrix std = Matrix::Constant(dim, h, cfg.init_std);
  const auto keep = static_cast<std::size_t>(std::floor(cfg.elite_keep_fraction * cfg.elites));

  PlanResult result;
  std::vector<Matrix> elites;
  Vector elite_returns;
  for (int it = 0; it < cfg.iterations; ++it) {
    const int n = population_at(cfg, it);
    std::vector<Matrix> cands = colored_noise(cfg.noise_beta, dim, h, n, rng);
    // Perturbations are scaled by the squared fitted spread.
    const Matrix scale = std.cwiseAbs2();
    for (Matrix& c : cands) c = (mean + c.cwiseProduct(scale)).cwiseMax(-1.0).cwiseMin(1.0);
    const std::vector<Matrix>& carried = it == 0 && warm ? warm->elites : elites;
    for (std::size_t j = 0; j < std::min(keep, carried.size()); ++j) {
      if (carried[j].rows() != dim || carried[j].cols() != h) {
        throw ShapeError("icem_plan: warm-start elite has wrong shape");
      }
      cands.push_back(carried[j].cwiseMax(-1.0).cwiseMin(1.0));
    }
    if (it == cfg.iterations - 1) cands.push_back(mean.cwiseMax(-1.0).cwiseMin(1.0));

    Index n_bad = 0;
    const Vector returns = rollout_returns(model, s0, reward, cands, cfg.optimism, mode,
                                          ds_rng ? *ds_rng : rng, &n_bad);
    result.diverged += n_bad;
    if (n_bad == static_cast<Index>(cands.size())) {
      throw DivergenceError("icem_plan: every candidate rollout diverged at iteration " +
                            std::to_string(it));
    }
    std::vector<Index> order(cands.size());
    std::iota(order.begin(), order.end(), Index{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](Index a, Index b) { return returns(a) > returns(b); });
    const auto n_e = std::min<std::size_t>(static_cast<std::size_t>(cfg.elites), cands.size());
    elites.clear();
    elite_returns.resize(static_cast<Index>(n_e));
    for (std::size_t j = 0; j < n_e; ++j) {
      elites.push_back(cands[static_cast<std::size_t>(order[j])]);
      elite_returns(static_cast<Index>(j)) = returns(order[j]);
    }

    Matrix e_mean = Matrix::Zero(dim, h);
    for (const Matrix& e : elites) e_mean += e;
    e_mean /= static_cast<double>(n_e);
    Matrix e_var = Matrix::Zero(dim, h);
    for (const Matrix& e : elites) e_var += (e - e_mean).cwiseAbs2();
    e_var /= static_cast<double>(n_e);
    mean = cfg.momentum * mean + (1.0 - cfg.momentum) * e_mean;
    std = (cfg.momentum * std + (1.0 - cfg.momentum) * e_var.cwiseSqrt()).cwiseMax(cfg.min_std);

    IterationStats stats;
    stats.candidates = static_cast<int>(cands.size());
    stats.best_return = elite_returns(0);
    stats.elite_mean = elite_returns.mean();
    stats.elite_std = std::sqrt((elite_returns.array() - stats.elite_mean).square().mean());
    result.iterations.push_back(stats);
  }
  result.best = AugmentedPlan::from_stacked(elites.front(), da);
  result.best_return = elite_returns(0);
  result.distribution = {mean, std};
  result.elites = std::move(elites);
  return result;
}

MpcResult mpc_rollout(const TaskParams& env, const TransitionModel& model,
                      const RewardFunction& reward, const ICEMConfig& cfg, int steps,
                      PlannerMode mode, Rng& rng, const EnvState& initial_state,
                      Rng* ds_rng) {
  if (steps < 1) throw PreconditionError("mpc_rollout: steps must be >= 1");
  const EnvId id = env_of(env);
  const EnvSpec spec = env_spec(id);
  if (model.state_dim() != spec.state_dim || model.action_dim() != spec.action_dim) {
    throw ShapeError("mpc_rollout: model dimensions do not match the environment");
  }
  const BatchReward batch = batch_reward(reward);
  MpcResult out{TransitionDataset(spec.state_dim, spec.action_dim), Vector(steps), 0.0,
                Vector(steps), {}};
  EnvState state = initial_state;
  std::optional<WarmStart> warm;
  for (int t = 0; t < steps; ++t) {
    const Vector obs = observe(id, state);
    PlanResult plan = icem_plan(model, obs, batch, cfg, warm, mode, rng, ds_rng);
    const Vector action = plan.best.actions.col(0);
    const PredictiveBatch here = model.predict(obs.transpose(), action.transpose());
    out.epistemic_std(t) = here.epistemic_std.mean();
    out.rewards(t) = reward(obs, action);
    state = env_step(env, state, action);
    out.transitions.add(obs, action, observe(id, state));

    StepLog line;
    line.step = t;
    line.iterations = static_cast<int>(plan.iterations.size());
    line.best_return = plan.best_return;
    line.elite_mean = plan.iterations.back().elite_mean;
    line.elite_std = plan.iterations.back().elite_std;
    out.log.push_back(line);

    WarmStart next{shift_plan(plan.distribution.mean), {}};
    for (const Matrix& e : plan.elites) next.elites.push_back(shift_plan(e));
    warm = std::move(next);
  }
  out.ret = out.rewards.sum();
  return out;
}

}  // namespace pacoh
