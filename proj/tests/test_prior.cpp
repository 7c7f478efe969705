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


#include <doctest.h>

#include <cmath>

#include "pacoh/prior.hpp"
#include "pacoh/random.hpp"

using namespace pacoh;

TEST_CASE("flat layout round-trips") {
  GaussianPrior p{(Vector(3) << 1, 2, 3).finished(), (Vector(3) << -1, -2, -3).finished()};
  const Vector phi = p.flat();
  CHECK(phi.size() == 6);
  const GaussianPrior q = GaussianPrior::from_flat(phi);
  CHECK(q.mu == p.mu);
  CHECK(q.log_sigma == p.log_sigma);
  CHECK_THROWS_AS(GaussianPrior::from_flat(Vector::Zero(5)), ShapeError);
}

TEST_CASE("zero noise returns the prior mean") {
  Rng rng = child_rng(1, "prior");
  GaussianPrior p{standard_normal(8, 1, rng), standard_normal(8, 1, rng)};
  CHECK(sample_nn_from_prior(p, Vector::Zero(8)) == p.mu);
}

TEST_CASE("tiny spread collapses onto the mean") {
  Rng rng = child_rng(2, "prior");
  GaussianPrior p{standard_normal(8, 1, rng), Vector::Constant(8, -60.0)};
  const Vector theta = sample_nn_from_prior(p, rng);
  CHECK((theta - p.mu).cwiseAbs().maxCoeff() <= 1e-15 * (1.0 + p.mu.cwiseAbs().maxCoeff()));
}

TEST_CASE("sample moments agree with the prior within three standard errors") {
  GaussianPrior p{(Vector(2) << 0.5, -1.0).finished(), (Vector(2) << std::log(0.3), std::log(2.0)).finished()};
  Rng rng = child_rng(3, "prior");
  constexpr int n = 10000;
  Matrix s(2, n);
  for (int i = 0; i < n; ++i) s.col(i) = sample_nn_from_prior(p, rng);
  for (Index d = 0; d < 2; ++d) {
    const double sigma = std::exp(p.log_sigma[d]);
    const double mean = s.row(d).mean();
    const double sd = std::sqrt((s.row(d).array() - mean).square().sum() / (n - 1));
    CHECK(std::abs(mean - p.mu[d]) <= 3.0 * sigma / std::sqrt(n));
    // Standard error of the sample std is about sigma / sqrt(2n).
    CHECK(std::abs(sd - sigma) <= 3.0 * sigma / std::sqrt(2.0 * n));
  }
}

TEST_CASE("score and density of a standard normal") {
  GaussianPrior p{Vector::Zero(3), Vector::Zero(3)};
  Vector theta(3);
  theta << 0.5, -2.0, 1.0;
  CHECK(p.score(theta) == -theta);
  CHECK(p.score(p.mu).isZero(0.0));
  CHECK(p.log_density(theta) ==
        doctest::Approx(-1.5 * std::log(2.0 * M_PI) - 0.5 * theta.squaredNorm()));
}

TEST_CASE("default prior has the documented weight and noise blocks") {
  MLPArchitecture arch(3, 2, {4});
  const GaussianPrior p = default_prior(arch);
  CHECK(p.dim() == arch.particle_dim());
  const Index np = arch.param_count();
  CHECK(p.mu.head(np).isZero(0.0));
  CHECK(std::exp(2.0 * p.log_sigma[0]) == doctest::Approx(0.1));
  CHECK(p.mu[np] == doctest::Approx(std::log(0.1)));
  CHECK(p.log_sigma[np] == doctest::Approx(0.0));
}
