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
#include <numbers>

#include "oracles.hpp"
#include "pacoh/checks.hpp"
#include "pacoh/nn.hpp"
#include "pacoh/random.hpp"

using namespace pacoh;
using pacoh::testing::naive_avg_log_likelihood;
using pacoh::testing::naive_forward;

namespace {

Vector random_params(const MLPArchitecture& arch, std::uint64_t seed, double scale = 0.5) {
  Rng rng = child_rng(seed, "test-params");
  return scale * standard_normal(arch.param_count(), 1, rng);
}

}  // namespace

TEST_CASE("param count and particle layout") {
  MLPArchitecture arch(5, 3, {7, 4});
  CHECK(arch.param_count() == (5 + 1) * 7 + (7 + 1) * 4 + (4 + 1) * 3);
  CHECK(arch.particle_dim() == arch.param_count() + 3);
  CHECK(arch.layers().size() == 3);
}

TEST_CASE("zero parameters give zero output") {
  MLPArchitecture arch(3, 2, {8, 8});
  Rng rng = child_rng(1, "x");
  const Matrix x = standard_normal(10, 3, rng);
  const Matrix out = mlp_forward(arch, Vector::Zero(arch.param_count()), x);
  CHECK(out.rows() == 10);
  CHECK(out.cols() == 2);
  CHECK(out.isZero(0.0));
}

TEST_CASE("single linear layer with unit weight is the identity") {
  MLPArchitecture arch(1, 1, {});
  Vector theta(2);
  theta << 1.0, 0.0;
  Matrix x(1, 1);
  x << 0.7;
  CHECK(mlp_forward(arch, theta, x)(0, 0) == doctest::Approx(0.7).epsilon(1e-15));
}

TEST_CASE("forward pass matches a straight-loop reference") {
  for (Activation act : {Activation::kReLU, Activation::kTanh}) {
    MLPArchitecture arch(4, 3, {16, 9}, act);
    const Vector theta = random_params(arch, 7);
    Rng rng = child_rng(2, "x");
    const Matrix x = standard_normal(25, 4, rng);
    const Matrix fast = mlp_forward(arch, theta, x);
    const Matrix ref = naive_forward(arch, theta, x);
    for (Index i = 0; i < fast.size(); ++i) {
      CHECK(testing::rel_err(fast(i), ref(i)) <= 1e-12);
    }
  }
}

TEST_CASE("forward accepts a particle vector and ignores its log-sigma tail") {
  MLPArchitecture arch(2, 2, {5});
  Vector particle = Vector::Zero(arch.particle_dim());
  particle.head(arch.param_count()) = random_params(arch, 3);
  particle.tail(2).setConstant(42.0);
  Rng rng = child_rng(4, "x");
  const Matrix x = standard_normal(6, 2, rng);
  CHECK(mlp_forward(arch, particle, x) == mlp_forward(arch, particle.head(arch.param_count()).eval(), x));
}

TEST_CASE("forward is bit-deterministic") {
  MLPArchitecture arch(3, 2, {32, 32});
  const Vector theta = random_params(arch, 5);
  Rng rng = child_rng(6, "x");
  const Matrix x = standard_normal(50, 3, rng);
  CHECK(mlp_forward(arch, theta, x) == mlp_forward(arch, theta, x));
}

TEST_CASE("forward shape errors") {
  MLPArchitecture arch(3, 2, {4});
  CHECK_THROWS_AS(mlp_forward(arch, Vector::Zero(arch.param_count() + 1), Matrix::Zero(2, 3)), ShapeError);
  CHECK_THROWS_AS(mlp_forward(arch, Vector::Zero(arch.param_count()), Matrix::Zero(2, 4)), ShapeError);
}

TEST_CASE("activation names round-trip") {
  CHECK(activation_from_string(to_string(Activation::kReLU)) == Activation::kReLU);
  CHECK(activation_from_string(to_string(Activation::kTanh)) == Activation::kTanh);
  CHECK_THROWS_AS(activation_from_string("sigmoid"), ConfigError);
}

TEST_CASE("log-likelihood closed forms") {
  MLPArchitecture arch(1, 1, {});
  GaussianLikelihood lik{Vector::Zero(1)};
  Vector theta(2);
  theta << 1.0, 0.0;
  Matrix x(1, 1);
  x << 0.4;
  const double half_log_2pi = 0.5 * std::log(2.0 * std::numbers::pi);

  SUBCASE("zero residual, unit sigma") {
    CHECK(avg_log_likelihood(arch, theta, lik, x, x) == doctest::Approx(-0.9189385332046727));
  }
  SUBCASE("residual r, unit sigma") {
    Matrix y(1, 1);
    y << 0.4 + 0.3;
    CHECK(avg_log_likelihood(arch, theta, lik, x, y) == doctest::Approx(-half_log_2pi - 0.045));
  }
  SUBCASE("log-sigma gradient at zero residual is -1") {
    const LikelihoodGradient g = avg_log_likelihood_grad(arch, theta, lik, x, x);
    CHECK(g.d_log_sigma[0] == doctest::Approx(-1.0));
    CHECK(g.d_params[1] == doctest::Approx(0.0));
  }
  SUBCASE("empty data is a precondition error") {
    CHECK_THROWS_AS(avg_log_likelihood(arch, theta, lik, Matrix(0, 1), Matrix(0, 1)), PreconditionError);
    CHECK_THROWS_AS(avg_log_likelihood_grad(arch, theta, lik, Matrix(0, 1), Matrix(0, 1)),
                    PreconditionError);
  }
}

TEST_CASE("log-likelihood matches a per-point density oracle") {
  MLPArchitecture arch(3, 2, {10, 10});
  const Vector theta = random_params(arch, 11);
  Rng rng = child_rng(12, "data");
  const Matrix x = standard_normal(40, 3, rng);
  const Matrix y = standard_normal(40, 2, rng);
  GaussianLikelihood lik{(Vector(2) << -0.3, 0.2).finished()};
  const double value = avg_log_likelihood(arch, theta, lik, x, y);
  const double ref = naive_avg_log_likelihood(naive_forward(arch, theta, x), y, lik.log_sigma);
  CHECK(testing::rel_err(value, ref) <= 1e-10);
  CHECK(avg_log_likelihood_grad(arch, theta, lik, x, y).value == doctest::Approx(value).epsilon(1e-14));
}

TEST_CASE("likelihood gradient matches finite differences on 50 coordinates") {
  for (Activation act : {Activation::kTanh, Activation::kReLU}) {
    MLPArchitecture arch(3, 2, {12, 12}, act);
    const Vector theta = random_params(arch, 21);
    Rng rng = child_rng(22, "data");
    const Matrix x = standard_normal(30, 3, rng);
    const Matrix y = standard_normal(30, 2, rng);
    GaussianLikelihood lik{(Vector(2) << -0.5, 0.1).finished()};

    Vector full(arch.particle_dim());
    full << theta, lik.log_sigma;
    const LikelihoodGradient g = avg_log_likelihood_grad(arch, theta, lik, x, y);
    Vector analytic(arch.particle_dim());
    analytic << g.d_params, g.d_log_sigma;
    auto f = [&](const Vector& p) {
      return avg_log_likelihood(arch, p.head(arch.param_count()), GaussianLikelihood{p.tail(2)}, x, y);
    };
    // A narrow stencil keeps ReLU pre-activations on one side of their kink.
    const double h = act == Activation::kReLU ? 1e-6 : 1e-3;
    CHECK(checks::max_gradient_error(f, full, analytic, 50, 23, 1e-6, h) <= 1e-5);
  }
}

TEST_CASE("duplicating the dataset leaves value and gradient unchanged") {
  MLPArchitecture arch(2, 1, {6});
  const Vector theta = random_params(arch, 31);
  Rng rng = child_rng(32, "data");
  const Matrix x = standard_normal(9, 2, rng);
  const Matrix y = standard_normal(9, 1, rng);
  Matrix x2(18, 2), y2(18, 1);
  x2 << x, x;
  y2 << y, y;
  GaussianLikelihood lik{Vector::Constant(1, -0.2)};
  const LikelihoodGradient a = avg_log_likelihood_grad(arch, theta, lik, x, y);
  const LikelihoodGradient b = avg_log_likelihood_grad(arch, theta, lik, x2, y2);
  CHECK(a.value == doctest::Approx(b.value).epsilon(1e-14));
  CHECK((a.d_params - b.d_params).cwiseAbs().maxCoeff() <= 1e-13);
  CHECK((a.d_log_sigma - b.d_log_sigma).cwiseAbs().maxCoeff() <= 1e-13);
}

TEST_CASE("gradient does not depend on row order") {
  MLPArchitecture arch(2, 2, {6});
  const Vector theta = random_params(arch, 41);
  Rng rng = child_rng(42, "data");
  const Matrix x = standard_normal(8, 2, rng);
  const Matrix y = standard_normal(8, 2, rng);
  const Matrix xr = x.colwise().reverse();
  const Matrix yr = y.colwise().reverse();
  GaussianLikelihood lik{Vector::Zero(2)};
  const LikelihoodGradient a = avg_log_likelihood_grad(arch, theta, lik, x, y);
  const LikelihoodGradient b = avg_log_likelihood_grad(arch, theta, lik, xr, yr);
  CHECK((a.d_params - b.d_params).cwiseAbs().maxCoeff() <= 1e-13);
}
