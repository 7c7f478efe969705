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

#ifndef PACOH_INFERENCE_HPP_
#define PACOH_INFERENCE_HPP_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include "pacoh/nn.hpp"
#include "pacoh/prior.hpp"
#include "pacoh/svgd.hpp"
#include "pacoh/transitions.hpp"

namespace pacoh {

// Per-dimension z-scoring of model inputs [s || a] and targets s' - s.
struct Normalizer {
  Vector x_mean;
  Vector x_std;
  Vector y_mean;
  Vector y_std;

  static Normalizer identity(Index input_dim, Index output_dim);
  // Statistics of the dataset; std entries below 1e-6 are replaced by 1.
  static Normalizer fit(const TransitionDataset& data);

  Matrix normalize_inputs(const Matrix& x) const;
  Matrix normalize_targets(const Matrix& y) const;
};

// Normalized regression pairs: rows of x are model inputs, rows of y targets.
struct RegressionData {
  Matrix x;
  Matrix y;

  Index size() const { return x.rows(); }
  bool empty() const { return x.rows() == 0; }
};

RegressionData make_regression(const TransitionDataset& data, const Normalizer& normalizer);

// grad ln P(theta) + beta * grad L(theta, data) over the full particle
// [params || log_sigma]. With `learn_likelihood` false the log-sigma block of
// the score is zero. Empty data reduces to the prior score.
Vector bnn_posterior_score(const MLPArchitecture& arch, const Eigen::Ref<const Vector>& particle,
                           const GaussianPrior& prior, const Eigen::Ref<const Matrix>& x,
                           const Eigen::Ref<const Matrix>& y, double beta,
                           bool learn_likelihood = true);

struct BnnFitConfig {
  int steps = 2000;
  int batch_size = 32;
  double step_size = 1e-3;
  int n_particles = 3;
  // nullopt selects the median heuristic.
  std::optional<double> bandwidth = 10.0;
  SvgdUpdate update = SvgdUpdate::kAdam;
  // Likelihood tempering; nullopt means sqrt(m*) with m* the dataset size.
  std::optional<double> beta;
  // When set, every particle's log-sigma block is pinned to this value.
  std::optional<double> fixed_log_sigma;
};

// Approximates the tempered posterior under `prior` with L SVGD particles,
// returned as the columns of a (particle_dim x L) matrix.
Matrix bnn_svgd_fit(const MLPArchitecture& arch, const GaussianPrior& prior,
                    const RegressionData& data, const BnnFitConfig& cfg, std::uint64_t seed);

// K groups of L particles plus the normalization they were fitted under.
struct ParticleEnsemble {
  MLPArchitecture arch;
  Normalizer normalizer;
  std::vector<Matrix> groups;

  Index n_networks() const;
  // All particles as columns, group by group.
  Matrix pooled() const;
};

struct PredictiveDist {
  Vector mean;
  Vector epistemic_std;
};

struct PredictiveBatch {
  Matrix mean;
  Matrix epistemic_std;
};

// Next-state prediction: mean of the K*L network outputs and their
// population standard deviation.
PredictiveDist predict(const ParticleEnsemble& ens, const Eigen::Ref<const Vector>& s,
                       const Eigen::Ref<const Vector>& a);
PredictiveBatch predict_batch(const ParticleEnsemble& ens, const Eigen::Ref<const Matrix>& states,
                              const Eigen::Ref<const Matrix>& actions);

void save_ensemble(const ParticleEnsemble& ens, const std::filesystem::path& path);
ParticleEnsemble load_ensemble(const std::filesystem::path& path);

}  // namespace pacoh

#endif  // PACOH_INFERENCE_HPP_
