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

#ifndef PACOH_PRIOR_HPP_
#define PACOH_PRIOR_HPP_

#include "pacoh/nn.hpp"
#include "pacoh/random.hpp"
#include "pacoh/types.hpp"

namespace pacoh {

// Diagonal Gaussian over particle vectors, phi = (mu_P, ln sigma_P).
struct GaussianPrior {
  Vector mu;
  Vector log_sigma;

  Index dim() const { return mu.size(); }

  // Hyper-particle representation [mu || log_sigma].
  Vector flat() const;
  static GaussianPrior from_flat(const Eigen::Ref<const Vector>& phi);

  double log_density(const Eigen::Ref<const Vector>& theta) const;
  // grad_theta ln P(theta) = -(theta - mu) / sigma^2.
  Vector score(const Eigen::Ref<const Vector>& theta) const;
};

// theta = mu + exp(log_sigma) * eps. Differentiable in phi for fixed eps.
ParamVector sample_nn_from_prior(const GaussianPrior& prior, const Eigen::Ref<const Vector>& eps);
ParamVector sample_nn_from_prior(const GaussianPrior& prior, Rng& rng);

// Non-meta-learned prior: weights ~ N(0, weight_var), log-sigma ~ N(lik_mean, lik_var).
GaussianPrior default_prior(const MLPArchitecture& arch, double weight_var = 0.1,
                            double lik_mean = -2.302585092994046, double lik_var = 1.0);

}  // namespace pacoh

#endif  // PACOH_PRIOR_HPP_
