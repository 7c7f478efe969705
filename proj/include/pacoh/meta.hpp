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

#ifndef PACOH_META_HPP_
#define PACOH_META_HPP_

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include "pacoh/inference.hpp"
#include "pacoh/nn.hpp"
#include "pacoh/prior.hpp"
#include "pacoh/random.hpp"
#include "pacoh/svgd.hpp"

namespace pacoh {

struct GaussianBlock {
  double mean = 0.0;
  double std = 1.0;
};

// Block-diagonal Gaussian over hyper-particles
// phi = [mu_params || mu_loglik || logsig_params || logsig_loglik].
// Defaults are stated on the log-variance scale and converted to log-std,
// which halves every log-variance mean and width: weight spread N(-3, 0.4)
// becomes N(-1.5, 0.2), noise scale N(-8, 1) becomes N(-4, 0.5), and the
// noise spread exp(-4) becomes exp(-4) / 2, i.e. -4 - ln 2. Widths are
// standard deviations.
struct HyperPrior {
  GaussianBlock weight_mean{0.0, 0.4};
  GaussianBlock weight_log_std{-1.5, 0.2};
  GaussianBlock lik_mean{-4.0, 0.5};
  GaussianBlock lik_log_std{-4.693, 0.2};

  // Per-coordinate means and stds laid out like phi.
  Vector means(const MLPArchitecture& arch) const;
  Vector stds(const MLPArchitecture& arch) const;
};

double hyper_prior_log_density(const HyperPrior& hp, const MLPArchitecture& arch,
                               const Eigen::Ref<const Vector>& phi);
Vector hyper_prior_score(const HyperPrior& hp, const MLPArchitecture& arch,
                         const Eigen::Ref<const Vector>& phi);
GaussianPrior sample_hyper_prior(const HyperPrior& hp, const MLPArchitecture& arch, Rng& rng);

struct MetaBatchPlan {
  int tasks_per_batch = 4;   // n_b
  int points_per_task = 8;   // m_b
  int steps = 100000;        // n_it
  double step_size = 8e-4;
  int n_priors = 3;          // K
  int n_model_samples = 3;   // L
  std::optional<double> bandwidth = 10.0;
  SvgdUpdate update = SvgdUpdate::kAdam;
  // Overrides the tempering sqrt(m_i); 0 ablates the likelihood.
  std::optional<double> beta_override;
};

struct MllEstimate {
  double value = 0.0;  // ln Z~
  Vector grad;         // d ln Z~ / d phi
};

// Generalized marginal log-likelihood estimate
//   ln Z~ = LSE_l(beta * L(theta_l, batch)) - ln L,  theta_l = mu + sigma * eps_l,
// with the reparameterization noise given as the columns of `eps`.
MllEstimate mll_estimate(const MLPArchitecture& arch, const GaussianPrior& prior,
                         const Eigen::Ref<const Matrix>& x, const Eigen::Ref<const Matrix>& y,
                         double beta, const Eigen::Ref<const Matrix>& eps);

// One task's subsampled data plus the size m_i of its full dataset.
struct TaskBatch {
  Matrix x;
  Matrix y;
  Index full_size = 0;
};

struct HyperScore {
  Vector score;
  double mean_log_z = 0.0;
};

// grad ln P(phi) + (n / n_b) sum_i 1 / (sqrt(n m_i) + 1) grad ln Z~(batch_i, P_phi).
HyperScore hyper_posterior_score(const MLPArchitecture& arch, const Eigen::Ref<const Vector>& phi,
                                 std::span<const TaskBatch> batches, const HyperPrior& hp,
                                 Index n_tasks, const Eigen::Ref<const Matrix>& eps,
                                 std::optional<double> beta_override = std::nullopt);

struct MetaLearnResult {
  std::vector<GaussianPrior> priors;
  std::vector<double> mean_log_z;  // one entry per meta step
};

MetaLearnResult pacoh_meta_learn(const MLPArchitecture& arch,
                                 std::span<const RegressionData> datasets, const HyperPrior& hp,
                                 const MetaBatchPlan& plan, std::uint64_t seed);

// Priors consumed by the target-task phase, with the normalization they were
// learned under. Without a normalizer the fit-time dataset statistics are
// used; with fixed_log_sigma the likelihood scale is not learned.
struct PriorSet {
  MLPArchitecture arch;
  std::vector<GaussianPrior> priors;
  std::optional<Normalizer> normalizer;
  std::optional<HyperPrior> hyper_prior;
  std::optional<double> fixed_log_sigma;
};

// K copies of the default N(0, 0.1 I) prior with a fixed sigma_y = 0.1.
PriorSet default_prior_set(const MLPArchitecture& arch, int n_priors);

void save_prior_set(const PriorSet& set, const std::filesystem::path& path);
PriorSet load_prior_set(const std::filesystem::path& path);

}  // namespace pacoh

#endif  // PACOH_META_HPP_
