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

#include "pacoh/meta.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <string>

#include "pacoh/errors.hpp"
#include "pacoh/json_io.hpp"

namespace pacoh {

Vector HyperPrior::means(const MLPArchitecture& arch) const {
  const Index p = arch.param_count();
  const Index o = arch.output_dim();
  Vector m(2 * (p + o));
  m << Vector::Constant(p, weight_mean.mean), Vector::Constant(o, lik_mean.mean),
      Vector::Constant(p, weight_log_std.mean), Vector::Constant(o, lik_log_std.mean);
  return m;
}

Vector HyperPrior::stds(const MLPArchitecture& arch) const {
  const Index p = arch.param_count();
  const Index o = arch.output_dim();
  Vector s(2 * (p + o));
  s << Vector::Constant(p, weight_mean.std), Vector::Constant(o, lik_mean.std),
      Vector::Constant(p, weight_log_std.std), Vector::Constant(o, lik_log_std.std);
  return s;
}

double hyper_prior_log_density(const HyperPrior& hp, const MLPArchitecture& arch,
                               const Eigen::Ref<const Vector>& phi) {
  if (phi.size() != 2 * arch.particle_dim()) throw ShapeError("hyper prior: phi length mismatch");
  const Vector s = hp.stds(arch);
  const Eigen::ArrayXd z = (phi - hp.means(arch)).array() / s.array();
  return -0.5 * z.square().sum() - s.array().log().sum() -
         0.5 * static_cast<double>(phi.size()) * std::log(2.0 * M_PI);
}

Vector hyper_prior_score(const HyperPrior& hp, const MLPArchitecture& arch,
                         const Eigen::Ref<const Vector>& phi) {
  if (phi.size() != 2 * arch.particle_dim()) throw ShapeError("hyper prior: phi length mismatch");
  return (-(phi - hp.means(arch)).array() / hp.stds(arch).array().square()).matrix();
}

GaussianPrior sample_hyper_prior(const HyperPrior& hp, const MLPArchitecture& arch, Rng& rng) {
  const Vector eps = standard_normal(2 * arch.particle_dim(), 1, rng);
  const Vector phi = hp.means(arch) + (hp.stds(arch).array() * eps.array()).matrix();
  return GaussianPrior::from_flat(phi);
}

MllEstimate mll_estimate(const MLPArchitecture& arch, const GaussianPrior& prior,
                         const Eigen::Ref<const Matrix>& x, const Eigen::Ref<const Matrix>& y,
                         double beta, const Eigen::Ref<const Matrix>& eps) {
  const Index d = arch.particle_dim();
  const Index p = arch.param_count();
  const Index n_samples = eps.cols();
  if (n_samples < 1) throw PreconditionError("mll_estimate: need at least one model sample");
  if (prior.dim() != d || eps.rows() != d) throw ShapeError("mll_estimate: dimension mismatch");

  const Vector sigma = prior.log_sigma.array().exp().matrix();
  Vector log_terms(n_samples);
  Matrix theta_grads(d, n_samples);
  for (Index l = 0; l < n_samples; ++l) {
    const Vector theta = sample_nn_from_prior(prior, eps.col(l));
    const GaussianLikelihood lik{theta.tail(arch.output_dim())};
    const LikelihoodGradient g = avg_log_likelihood_grad(arch, theta.head(p), lik, x, y);
    if (!std::isfinite(g.value)) {
      throw DivergenceError("mll_estimate: non-finite log-likelihood for model sample " +
                            std::to_string(l));
    }
    log_terms(l) = beta * g.value;
    theta_grads.col(l) << g.d_params, g.d_log_sigma;
  }
  const double max_term = log_terms.maxCoeff();
  const Vector w_unnorm = (log_terms.array() - max_term).exp().matrix();
  const double z = w_unnorm.sum();
  const Vector weights = w_unnorm / z;

  MllEstimate out;
  out.value = max_term + std::log(z) - std::log(static_cast<double>(n_samples));
  // d/dtheta of the LSE is the softmax-weighted per-sample gradient; the
  // reparameterization maps it to mu directly and to log_sigma via sigma * eps.
  const Matrix weighted = beta * (theta_grads * weights.asDiagonal());
  out.grad.resize(2 * d);
  out.grad.head(d) = weighted.rowwise().sum();
  out.grad.tail(d) = (weighted.array() * eps.array()).rowwise().sum().matrix().cwiseProduct(sigma);
  return out;
}

HyperScore hyper_posterior_score(const MLPArchitecture& arch, const Eigen::Ref<const Vector>& phi,
                                 std::span<const TaskBatch> batches, const HyperPrior& hp,
                                 Index n_tasks, const Eigen::Ref<const Matrix>& eps,
                                 std::optional<double> beta_override) {
  HyperScore out{hyper_prior_score(hp, arch, phi), 0.0};
  if (batches.empty()) return out;
  if (n_tasks < static_cast<Index>(batches.size())) {
    throw PreconditionError("hyper_posterior_score: batch larger than the task count");
  }
  const GaussianPrior prior = GaussianPrior::from_flat(phi);
  const double n = static_cast<double>(n_tasks);
  const double batch_factor = n / static_cast<double>(batches.size());
  for (const TaskBatch& b : batches) {
    const double m_i = static_cast<double>(b.full_size);
    const double beta = beta_override ? *beta_override : std::sqrt(m_i);
    const MllEstimate mll = mll_estimate(arch, prior, b.x, b.y, beta, eps);
    out.score += batch_factor / (std::sqrt(n * m_i) + 1.0) * mll.grad;
    out.mean_log_z += mll.value;
  }
  out.mean_log_z /= static_cast<double>(batches.size());
  return out;
}

namespace {

// First k entries of a partial Fisher-Yates shuffle of 0..n-1.
std::vector<Index> sample_without_replacement(Index n, Index k, Rng& rng) {
  std::vector<Index> idx(static_cast<std::size_t>(n));
  std::iota(idx.begin(), idx.end(), Index{0});
  k = std::min(k, n);
  for (Index i = 0; i < k; ++i) {
    std::uniform_int_distribution<Index> pick(i, n - 1);
    std::swap(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(pick(rng))]);
  }
  idx.resize(static_cast<std::size_t>(k));
  return idx;
}

}  // namespace

MetaLearnResult pacoh_meta_learn(const MLPArchitecture& arch,
                                 std::span<const RegressionData> datasets, const HyperPrior& hp,
                                 const MetaBatchPlan& plan, std::uint64_t seed) {
  const Index n = static_cast<Index>(datasets.size());
  if (n < 1) throw PreconditionError("pacoh_meta_learn: need at least one dataset");
  if (plan.n_priors < 1 || plan.n_model_samples < 1 || plan.tasks_per_batch < 1 ||
      plan.points_per_task < 1 || plan.steps < 0) {
    throw ConfigError("pacoh_meta_learn: invalid batch plan");
  }
  for (const RegressionData& d : datasets) {
    if (d.empty()) throw PreconditionError("pacoh_meta_learn: empty meta-training dataset");
    if (d.x.cols() != arch.input_dim() || d.y.cols() != arch.output_dim()) {
      throw ShapeError("pacoh_meta_learn: dataset dimensions do not match the architecture");
    }
  }

  Rng init_rng = child_rng(seed, "meta-init");
  Rng batch_rng = child_rng(seed, "meta-batch");
  Rng eps_rng = child_rng(seed, "meta-eps");

  const Index d = arch.particle_dim();
  const Index k_priors = plan.n_priors;
  Matrix phis(2 * d, k_priors);
  for (Index k = 0; k < k_priors; ++k) phis.col(k) = sample_hyper_prior(hp, arch, init_rng).flat();

  ParticleOptimizer optimizer(plan.update, plan.step_size, 2 * d, k_priors);
  MetaLearnResult result;
  result.mean_log_z.reserve(static_cast<std::size_t>(plan.steps));
  std::vector<TaskBatch> batches;
  for (int step = 0; step < plan.steps; ++step) {
    batches.clear();
    for (Index t : sample_without_replacement(n, plan.tasks_per_batch, batch_rng)) {
      const RegressionData& data = datasets[static_cast<std::size_t>(t)];
      const auto rows = sample_without_replacement(data.size(), plan.points_per_task, batch_rng);
      TaskBatch b{Matrix(static_cast<Index>(rows.size()), data.x.cols()),
                  Matrix(static_cast<Index>(rows.size()), data.y.cols()), data.size()};
      for (std::size_t r = 0; r < rows.size(); ++r) {
        b.x.row(static_cast<Index>(r)) = data.x.row(rows[r]);
        b.y.row(static_cast<Index>(r)) = data.y.row(rows[r]);
      }
      batches.push_back(std::move(b));
    }

    Matrix scores(2 * d, k_priors);
    double log_z = 0.0;
    for (Index k = 0; k < k_priors; ++k) {
      // Fresh reparameterization noise per particle, shared across the batch.
      const Matrix eps = standard_normal(d, plan.n_model_samples, eps_rng);
      HyperScore hs;
      try {
        hs = hyper_posterior_score(arch, phis.col(k), batches, hp, n, eps, plan.beta_override);
      } catch (const DivergenceError& e) {
        throw DivergenceError("pacoh_meta_learn: step " + std::to_string(step) + ", prior " +
                              std::to_string(k) + ": " + e.what());
      }
      if (!hs.score.allFinite()) {
        throw DivergenceError("pacoh_meta_learn: non-finite score at step " +
                              std::to_string(step) + ", prior " + std::to_string(k));
      }
      scores.col(k) = hs.score;
      log_z += hs.mean_log_z;
    }
    result.mean_log_z.push_back(log_z / static_cast<double>(k_priors));
    optimizer.apply(phis, svgd_direction(phis, scores, plan.bandwidth));
    if (!phis.allFinite()) {
      throw DivergenceError("pacoh_meta_learn: non-finite prior particle at step " +
                            std::to_string(step));
    }
  }
  for (Index k = 0; k < k_priors; ++k) result.priors.push_back(GaussianPrior::from_flat(phis.col(k)));
  return result;
}

PriorSet default_prior_set(const MLPArchitecture& arch, int n_priors) {
  PriorSet set{arch, {}, std::nullopt, std::nullopt, std::log(0.1)};
  for (int k = 0; k < n_priors; ++k) set.priors.push_back(default_prior(arch));
  return set;
}

namespace {

constexpr const char* kPriorFormat = "pacoh-priors";
constexpr int kPriorVersion = 1;

json_io::Json block_json(const GaussianBlock& b) { return {{"mean", b.mean}, {"std", b.std}}; }
GaussianBlock block_from(const json_io::Json& j) {
  GaussianBlock b{j.at("mean").get<double>(), j.at("std").get<double>()};
  if (!(b.std > 0.0)) throw ConfigError("hyper prior: block std must be positive");
  return b;
}

}  // namespace

void save_prior_set(const PriorSet& set, const std::filesystem::path& path) {
  using json_io::Json;
  Json priors = Json::array();
  for (const GaussianPrior& p : set.priors) {
    priors.push_back({{"mu", json_io::to_json(p.mu)}, {"log_sigma", json_io::to_json(p.log_sigma)}});
  }
  Json j{{"format", kPriorFormat},
         {"version", kPriorVersion},
         {"architecture", json_io::to_json(set.arch)},
         {"priors", std::move(priors)}};
  j["normalizer"] = set.normalizer ? json_io::to_json(*set.normalizer) : Json(nullptr);
  j["fixed_log_sigma"] = set.fixed_log_sigma ? Json(*set.fixed_log_sigma) : Json(nullptr);
  if (set.hyper_prior) {
    j["hyper_prior"] = {{"weight_mean", block_json(set.hyper_prior->weight_mean)},
                        {"weight_log_std", block_json(set.hyper_prior->weight_log_std)},
                        {"lik_mean", block_json(set.hyper_prior->lik_mean)},
                        {"lik_log_std", block_json(set.hyper_prior->lik_log_std)}};
  } else {
    j["hyper_prior"] = nullptr;
  }
  json_io::write_file(path, j);
}

PriorSet load_prior_set(const std::filesystem::path& path) {
  const json_io::Json j = json_io::read_file(path);
  json_io::expect_container(j, kPriorFormat, kPriorVersion);
  try {
    PriorSet set{json_io::architecture_from_json(j.at("architecture")), {}, std::nullopt,
                 std::nullopt, std::nullopt};
    for (const auto& p : j.at("priors")) {
      GaussianPrior prior{json_io::vector_from_json(p.at("mu")),
                          json_io::vector_from_json(p.at("log_sigma"))};
      if (prior.mu.size() != set.arch.particle_dim() ||
          prior.log_sigma.size() != set.arch.particle_dim()) {
        throw ShapeError(path.string() + ": prior length does not match the architecture");
      }
      set.priors.push_back(std::move(prior));
    }
    if (set.priors.empty()) throw ConfigError(path.string() + ": no priors");
    if (!j.at("normalizer").is_null()) set.normalizer = json_io::normalizer_from_json(j["normalizer"]);
    if (!j.at("fixed_log_sigma").is_null()) set.fixed_log_sigma = j["fixed_log_sigma"].get<double>();
    if (!j.at("hyper_prior").is_null()) {
      const auto& h = j["hyper_prior"];
      set.hyper_prior = HyperPrior{block_from(h.at("weight_mean")), block_from(h.at("weight_log_std")),
                                   block_from(h.at("lik_mean")), block_from(h.at("lik_log_std"))};
    }
    return set;
  } catch (const json_io::Json::exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

}  // namespace pacoh
