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

#include "pacoh/inference.hpp"

#include <cmath>
#include <numeric>
#include <string>

#include "pacoh/errors.hpp"
#include "pacoh/json_io.hpp"
#include "pacoh/random.hpp"

namespace pacoh {

Normalizer Normalizer::identity(Index input_dim, Index output_dim) {
  return Normalizer{Vector::Zero(input_dim), Vector::Ones(input_dim), Vector::Zero(output_dim),
                    Vector::Ones(output_dim)};
}

namespace {

void column_stats(const Matrix& m, Vector& mean, Vector& std) {
  mean = m.colwise().mean().transpose();
  const Matrix centered = m.rowwise() - mean.transpose();
  std = (centered.colwise().squaredNorm().transpose() / static_cast<double>(m.rows()))
            .cwiseSqrt();
  std = (std.array() < 1e-6).select(1.0, std.array()).matrix();
}

}  // namespace

Normalizer Normalizer::fit(const TransitionDataset& data) {
  if (data.empty()) throw PreconditionError("Normalizer::fit: empty dataset");
  Normalizer n;
  column_stats(data.inputs(), n.x_mean, n.x_std);
  column_stats(data.deltas(), n.y_mean, n.y_std);
  return n;
}

Matrix Normalizer::normalize_inputs(const Matrix& x) const {
  return ((x.rowwise() - x_mean.transpose()).array().rowwise() / x_std.transpose().array())
      .matrix();
}

Matrix Normalizer::normalize_targets(const Matrix& y) const {
  return ((y.rowwise() - y_mean.transpose()).array().rowwise() / y_std.transpose().array())
      .matrix();
}

RegressionData make_regression(const TransitionDataset& data, const Normalizer& normalizer) {
  if (data.empty()) {
    return RegressionData{Matrix(0, data.state_dim() + data.action_dim()),
                          Matrix(0, data.state_dim())};
  }
  return RegressionData{normalizer.normalize_inputs(data.inputs()),
                        normalizer.normalize_targets(data.deltas())};
}

Vector bnn_posterior_score(const MLPArchitecture& arch, const Eigen::Ref<const Vector>& particle,
                           const GaussianPrior& prior, const Eigen::Ref<const Matrix>& x,
                           const Eigen::Ref<const Matrix>& y, double beta,
                           bool learn_likelihood) {
  if (particle.size() != arch.particle_dim() || prior.dim() != arch.particle_dim()) {
    throw ShapeError("bnn_posterior_score: particle or prior length mismatch");
  }
  if (beta < 0.0) throw PreconditionError("bnn_posterior_score: beta must be nonnegative");
  const Index p = arch.param_count();
  Vector score = prior.score(particle);
  if (x.rows() > 0) {
    const GaussianLikelihood lik{particle.tail(arch.output_dim())};
    const LikelihoodGradient g = avg_log_likelihood_grad(arch, particle.head(p), lik, x, y);
    score.head(p) += beta * g.d_params;
    score.tail(arch.output_dim()) += beta * g.d_log_sigma;
  }
  if (!learn_likelihood) score.tail(arch.output_dim()).setZero();
  return score;
}

Matrix bnn_svgd_fit(const MLPArchitecture& arch, const GaussianPrior& prior,
                    const RegressionData& data, const BnnFitConfig& cfg, std::uint64_t seed) {
  if (cfg.n_particles < 1 || cfg.steps < 0 || cfg.batch_size < 1) {
    throw ConfigError("bnn_svgd_fit: need n_particles >= 1, steps >= 0, batch_size >= 1");
  }
  if (prior.dim() != arch.particle_dim()) throw ShapeError("bnn_svgd_fit: prior length mismatch");
  const Index dim = arch.particle_dim();
  const Index out = arch.output_dim();
  const Index m = data.size();

  Rng init_rng = child_rng(seed, "bnn-init");
  Rng batch_rng = child_rng(seed, "bnn-batch");

  Matrix particles(dim, cfg.n_particles);
  for (Index l = 0; l < cfg.n_particles; ++l) {
    particles.col(l) = sample_nn_from_prior(prior, init_rng);
    if (cfg.fixed_log_sigma) particles.col(l).tail(out).setConstant(*cfg.fixed_log_sigma);
  }

  // Without data the posterior is the prior, and the draws above are exact.
  if (m == 0) return particles;

  const double beta = cfg.beta ? *cfg.beta : std::sqrt(static_cast<double>(m));
  const bool learn_lik = !cfg.fixed_log_sigma.has_value();
  const bool full_batch = m <= cfg.batch_size;
  std::vector<Index> order(static_cast<std::size_t>(m));
  std::iota(order.begin(), order.end(), Index{0});
  Matrix xb = full_batch ? data.x : Matrix(cfg.batch_size, data.x.cols());
  Matrix yb = full_batch ? data.y : Matrix(cfg.batch_size, data.y.cols());

  ParticleOptimizer optimizer(cfg.update, cfg.step_size, dim, cfg.n_particles);
  for (int step = 0; step < cfg.steps; ++step) {
    if (!full_batch) {
      // Partial Fisher-Yates: the first batch_size entries become a uniform
      // sample without replacement.
      for (Index i = 0; i < cfg.batch_size; ++i) {
        std::uniform_int_distribution<Index> pick(i, m - 1);
        std::swap(order[static_cast<std::size_t>(i)], order[static_cast<std::size_t>(pick(batch_rng))]);
        const Index row = order[static_cast<std::size_t>(i)];
        xb.row(i) = data.x.row(row);
        yb.row(i) = data.y.row(row);
      }
    }
    const Matrix scores = evaluate_scores(particles, [&](Index, const Eigen::Ref<const Vector>& th) {
      return bnn_posterior_score(arch, th, prior, xb, yb, beta, learn_lik);
    });
    Matrix direction = svgd_direction(particles, scores, cfg.bandwidth);
    // Round-off in the repulsion term would otherwise be amplified by Adam.
    if (!learn_lik) direction.bottomRows(out).setZero();
    optimizer.apply(particles, direction);
    if (!particles.allFinite()) {
      throw DivergenceError("bnn_svgd_fit: non-finite particle at step " + std::to_string(step));
    }
  }
  return particles;
}

Index ParticleEnsemble::n_networks() const {
  Index n = 0;
  for (const Matrix& g : groups) n += g.cols();
  return n;
}

Matrix ParticleEnsemble::pooled() const {
  Matrix all(arch.particle_dim(), n_networks());
  Index c = 0;
  for (const Matrix& g : groups) {
    all.middleCols(c, g.cols()) = g;
    c += g.cols();
  }
  return all;
}

PredictiveBatch predict_batch(const ParticleEnsemble& ens, const Eigen::Ref<const Matrix>& states,
                              const Eigen::Ref<const Matrix>& actions) {
  const Index n = states.rows();
  const Index ds = ens.arch.output_dim();
  if (states.cols() != ds || actions.rows() != n ||
      states.cols() + actions.cols() != ens.arch.input_dim()) {
    throw ShapeError("predict: state/action widths do not match the ensemble");
  }
  const Index n_nets = ens.n_networks();
  if (n_nets == 0) throw PreconditionError("predict: empty ensemble");

  Matrix x(n, ens.arch.input_dim());
  x << states, actions;
  const Matrix xn = ens.normalizer.normalize_inputs(x);

  std::vector<Matrix> outputs;
  outputs.reserve(static_cast<std::size_t>(n_nets));
  PredictiveBatch out{Matrix::Zero(n, ds), Matrix::Zero(n, ds)};
  for (const Matrix& g : ens.groups) {
    for (Index l = 0; l < g.cols(); ++l) {
      Matrix y = mlp_forward(ens.arch, g.col(l), xn);
      y.array().rowwise() *= ens.normalizer.y_std.transpose().array();
      y.rowwise() += ens.normalizer.y_mean.transpose();
      y += states;
      out.mean += y;
      outputs.push_back(std::move(y));
    }
  }
  const double inv = 1.0 / static_cast<double>(n_nets);
  out.mean *= inv;
  for (const Matrix& y : outputs) out.epistemic_std += (y - out.mean).cwiseAbs2();
  out.epistemic_std = (out.epistemic_std * inv).cwiseSqrt();
  return out;
}

PredictiveDist predict(const ParticleEnsemble& ens, const Eigen::Ref<const Vector>& s,
                       const Eigen::Ref<const Vector>& a) {
  const PredictiveBatch b = predict_batch(ens, s.transpose(), a.transpose());
  return PredictiveDist{b.mean.row(0).transpose(), b.epistemic_std.row(0).transpose()};
}

namespace {
constexpr const char* kEnsembleFormat = "pacoh-ensemble";
constexpr int kEnsembleVersion = 1;
}  // namespace

void save_ensemble(const ParticleEnsemble& ens, const std::filesystem::path& path) {
  using json_io::Json;
  Json groups = Json::array();
  for (const Matrix& g : ens.groups) {
    Json particles = Json::array();
    for (Index l = 0; l < g.cols(); ++l) particles.push_back(json_io::to_json(Vector(g.col(l))));
    groups.push_back(std::move(particles));
  }
  json_io::write_file(path, Json{{"format", kEnsembleFormat},
                                 {"version", kEnsembleVersion},
                                 {"architecture", json_io::to_json(ens.arch)},
                                 {"normalizer", json_io::to_json(ens.normalizer)},
                                 {"groups", std::move(groups)}});
}

ParticleEnsemble load_ensemble(const std::filesystem::path& path) {
  const json_io::Json j = json_io::read_file(path);
  json_io::expect_container(j, kEnsembleFormat, kEnsembleVersion);
  ParticleEnsemble ens{json_io::architecture_from_json(j.at("architecture")),
                       json_io::normalizer_from_json(j.at("normalizer")),
                       {}};
  for (const auto& group : j.at("groups")) {
    Matrix g(ens.arch.particle_dim(), static_cast<Index>(group.size()));
    Index l = 0;
    for (const auto& p : group) {
      const Vector v = json_io::vector_from_json(p);
      if (v.size() != g.rows()) throw ShapeError(path.string() + ": particle length mismatch");
      g.col(l++) = v;
    }
    ens.groups.push_back(std::move(g));
  }
  if (ens.groups.empty()) throw ConfigError(path.string() + ": ensemble has no groups");
  return ens;
}

}  // namespace pacoh
