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

#include "pacoh/prior.hpp"

#include <cmath>

#include "pacoh/errors.hpp"

namespace pacoh {

Vector GaussianPrior::flat() const {
  Vector phi(2 * dim());
  phi << mu, log_sigma;
  return phi;
}

GaussianPrior GaussianPrior::from_flat(const Eigen::Ref<const Vector>& phi) {
  if (phi.size() % 2 != 0) throw ShapeError("GaussianPrior::from_flat: odd length");
  const Index d = phi.size() / 2;
  return GaussianPrior{phi.head(d), phi.tail(d)};
}

double GaussianPrior::log_density(const Eigen::Ref<const Vector>& theta) const {
  if (theta.size() != dim()) throw ShapeError("GaussianPrior: dimension mismatch");
  const Eigen::ArrayXd z = (theta - mu).array() * (-log_sigma.array()).exp();
  return -0.5 * z.square().sum() - log_sigma.sum() -
         0.5 * static_cast<double>(dim()) * std::log(2.0 * M_PI);
}

Vector GaussianPrior::score(const Eigen::Ref<const Vector>& theta) const {
  if (theta.size() != dim()) throw ShapeError("GaussianPrior: dimension mismatch");
  return (-(theta - mu).array() * (-2.0 * log_sigma.array()).exp()).matrix();
}

ParamVector sample_nn_from_prior(const GaussianPrior& prior, const Eigen::Ref<const Vector>& eps) {
  if (eps.size() != prior.dim()) throw ShapeError("sample_nn_from_prior: noise length mismatch");
  return prior.mu + (prior.log_sigma.array().exp() * eps.array()).matrix();
}

ParamVector sample_nn_from_prior(const GaussianPrior& prior, Rng& rng) {
  const Vector eps = standard_normal(prior.dim(), 1, rng);
  return sample_nn_from_prior(prior, eps);
}

GaussianPrior default_prior(const MLPArchitecture& arch, double weight_var, double lik_mean,
                            double lik_var) {
  const Index p = arch.param_count();
  const Index o = arch.output_dim();
  GaussianPrior prior{Vector::Zero(p + o), Vector::Zero(p + o)};
  prior.mu.tail(o).setConstant(lik_mean);
  prior.log_sigma.head(p).setConstant(0.5 * std::log(weight_var));
  prior.log_sigma.tail(o).setConstant(0.5 * std::log(lik_var));
  return prior;
}

}  // namespace pacoh
