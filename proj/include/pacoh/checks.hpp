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

#ifndef PACOH_CHECKS_HPP_
#define PACOH_CHECKS_HPP_

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "pacoh/types.hpp"

namespace pacoh::checks {

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
  double seconds = 0.0;
};

// Fourth-order central difference of f along coordinate i.
double finite_difference(const std::function<double(const Vector&)>& f, const Vector& x, Index i,
                         double h = 1e-3);

// Largest |fd - analytic| / max(|fd|, |analytic|, floor) over `n_coords`
// coordinates drawn without replacement, with stencil step h.
double max_gradient_error(const std::function<double(const Vector&)>& f, const Vector& x,
                          const Vector& analytic, int n_coords, std::uint64_t seed,
                          double floor = 1e-6, double h = 1e-3);

// Analytic gradients of the likelihood, prior, hyper-prior, marginal
// log-likelihood estimate, posterior score and hyper-posterior score against
// finite differences on 50 random coordinates each.
CheckResult gradient_integrity(std::uint64_t seed = 0);

// 50 particles pushed toward N(0, 1) for 2000 steps.
CheckResult svgd_standard_normal(std::uint64_t seed = 0);

// Bias-only network with a Gaussian prior and likelihood against the tempered
// conjugate posterior.
CheckResult conjugate_bias_posterior(std::uint64_t seed = 0);

// Periodogram slope of beta = 2 noise and lag-1 autocorrelation of beta = 0 noise.
CheckResult colored_noise_spectrum(std::uint64_t seed = 0);

// Ensemble prediction against an explicit loop over every network.
CheckResult predictive_aggregation(std::uint64_t seed = 0);

// Receding-horizon planning on a per-step quadratic objective with a known optimum.
CheckResult icem_quadratic(std::uint64_t seed = 0);

// Every check above, in order.
std::vector<CheckResult> run_all(std::uint64_t seed = 0);

}  // namespace pacoh::checks

#endif  // PACOH_CHECKS_HPP_
