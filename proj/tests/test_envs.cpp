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
#include <filesystem>
#include <numbers>

#include "pacoh/envs.hpp"
#include "pacoh/errors.hpp"
#include "pacoh/random.hpp"

using namespace pacoh;

namespace {

constexpr double kPi = std::numbers::pi;

Vector act(double a) { return Vector::Constant(1, a); }

EnvState pendulum_state(double theta, double omega) {
  EnvState s(2);
  s << theta, omega;
  return s;
}

}  // namespace

TEST_CASE("pendulum equilibria") {
  const PendulumParams p;
  SUBCASE("hanging at rest stays at rest") {
    const EnvState s0 = rest_down_state(EnvId::kPendulum);
    EnvState s = s0;
    for (int t = 0; t < 100; ++t) s = env_step(p, s, act(0.0));
    CHECK(std::abs(std::abs(s(0)) - kPi) <= 1e-12);
    CHECK(std::abs(s(1)) <= 1e-12);
  }
  SUBCASE("upright at rest stays upright") {
    EnvState s = pendulum_state(0.0, 0.0);
    for (int t = 0; t < 100; ++t) s = env_step(p, s, act(0.0));
    CHECK(s(0) == 0.0);
    CHECK(s(1) == 0.0);
  }
}

TEST_CASE("undamped pendulum conserves energy within 2 percent") {
  const PendulumParams p;
  for (double theta0 : {0.5, 1.5, 2.5}) {
    EnvState s = pendulum_state(theta0, 0.0);
    const double e0 = pendulum_energy(p, s);
    double worst = 0.0;
    for (int t = 0; t < 200; ++t) {
      s = env_step(p, s, act(0.0));
      worst = std::max(worst, std::abs(pendulum_energy(p, s) - e0) / e0);
    }
    CHECK(worst <= 0.02);
  }
}

TEST_CASE("pendulum depends on torque over mass") {
  PendulumParams a;
  a.damping = 0.01;
  PendulumParams b = a;
  b.mass *= 2.0;
  b.max_torque *= 2.0;
  b.damping *= 2.0;
  EnvState sa = pendulum_state(2.0, -0.5), sb = sa;
  Rng rng = child_rng(1, "actions");
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int t = 0; t < 100; ++t) {
    const double action = u(rng);
    sa = env_step(a, sa, act(action));
    sb = env_step(b, sb, act(action));
    REQUIRE((sa - sb).cwiseAbs().maxCoeff() <= 1e-12);
  }
}

TEST_CASE("angles stay wrapped and actions are clipped") {
  const PendulumParams p;
  Rng rng = child_rng(2, "wrap");
  EnvState s = random_state(EnvId::kPendulum, rng);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  for (int t = 0; t < 500; ++t) {
    s = env_step(p, s, act(u(rng)));
    CHECK(s(0) > -kPi);
    CHECK(s(0) <= kPi);
  }
  const EnvState s0 = pendulum_state(0.3, 0.1);
  CHECK(env_step(p, s0, act(5.0)) == env_step(p, s0, act(1.0)));

  CartpoleParams c;
  EnvState x = rest_down_state(EnvId::kCartpole);
  for (int t = 0; t < 500; ++t) {
    x = env_step(c, x, act(u(rng)));
    CHECK(x(2) > -kPi);
    CHECK(x(2) <= kPi);
  }
  CHECK(wrap_angle(kPi) == doctest::Approx(kPi));
  CHECK(wrap_angle(-kPi) == doctest::Approx(kPi));
  CHECK(wrap_angle(3.0 * kPi / 2.0) == doctest::Approx(-kPi / 2.0));
}

TEST_CASE("cartpole equilibria") {
  const CartpoleParams p;
  EnvState down = rest_down_state(EnvId::kCartpole);
  EnvState up = EnvState::Zero(4);
  for (int t = 0; t < 100; ++t) {
    down = env_step(p, down, act(0.0));
    up = env_step(p, up, act(0.0));
  }
  CHECK(down.cwiseAbs()(1) <= 1e-12);
  CHECK(std::abs(std::abs(down(2)) - kPi) <= 1e-12);
  CHECK(up.isZero(0.0));
}

TEST_CASE("env_step rejects wrong shapes") {
  CHECK_THROWS_AS(env_step(PendulumParams{}, EnvState::Zero(4), act(0.0)), ShapeError);
  CHECK_THROWS_AS(env_step(CartpoleParams{}, EnvState::Zero(4), Vector::Zero(2)), ShapeError);
}

TEST_CASE("observation round-trip") {
  Rng rng = child_rng(3, "obs");
  for (EnvId env : {EnvId::kPendulum, EnvId::kCartpole}) {
    const EnvState s = random_state(env, rng);
    const Vector obs = observe(env, s);
    CHECK(obs.size() == env_spec(env).state_dim);
    CHECK((state_from_observation(env, obs) - s).cwiseAbs().maxCoeff() <= 1e-14);
  }
}

TEST_CASE("tolerance shape") {
  const ToleranceSpec spec{0.95, 1.0, 0.3, 0.1};
  CHECK(tolerance(0.97, spec) == 1.0);
  CHECK(tolerance(0.95, spec) == 1.0);
  CHECK(tolerance(0.65, spec) == doctest::Approx(0.1));
  CHECK(tolerance(1.3, spec) == doctest::Approx(0.1));
  CHECK(tolerance(0.80, spec) == doctest::Approx(std::exp(std::log(0.1) * 0.25)));
  CHECK(tolerance(0.80, spec) == doctest::Approx(0.5623413251903491));
  CHECK(tolerance(0.5, ToleranceSpec{0.995, 1.0, 0.0, 0.1}) == 0.0);

  // Continuous at the bounds and non-increasing with distance.
  CHECK(tolerance(0.95 - 1e-9, spec) == doctest::Approx(1.0));
  double prev = 1.0;
  for (double d = 0.0; d <= 2.0; d += 0.01) {
    const double v = tolerance(0.95 - d, spec);
    CHECK(v <= prev);
    CHECK(v >= 0.0);
    prev = v;
  }
}

TEST_CASE("reward examples") {
  const RewardFunction dense(EnvId::kPendulum, RewardVariant::kDense);
  const RewardFunction sparse(EnvId::kPendulum, RewardVariant::kSparse);
  CHECK(dense(observe(EnvId::kPendulum, pendulum_state(0.0, 0.0)), act(0.0)) == 0.0);
  CHECK(dense(observe(EnvId::kPendulum, pendulum_state(kPi / 2.0, 1.0)), act(0.0)) ==
        doctest::Approx(-(kPi / 2.0) * (kPi / 2.0) - 0.1));
  CHECK(dense(observe(EnvId::kPendulum, pendulum_state(kPi / 2.0, 1.0)), act(0.0)) ==
        doctest::Approx(-2.5674).epsilon(1e-4));
  CHECK(dense(observe(EnvId::kPendulum, pendulum_state(0.0, 0.0)), act(1.0)) == doctest::Approx(-0.001));
  CHECK(sparse(observe(EnvId::kPendulum, pendulum_state(0.0, 0.0)), act(0.0)) == 2.0);

  const RewardFunction cart_sparse(EnvId::kCartpole, RewardVariant::kSparse);
  const Vector down = observe(EnvId::kCartpole, rest_down_state(EnvId::kCartpole));
  CHECK(cart_sparse(down, act(0.5)) == doctest::Approx(-0.01 * 0.25));
  CHECK(cart_sparse(observe(EnvId::kCartpole, EnvState::Zero(4)), act(0.0)) == 1.0);

  const RewardFunction cart_dense(CartpoleParams{}, RewardVariant::kDense);
  CHECK(cart_dense(observe(EnvId::kCartpole, EnvState::Zero(4)), act(0.0)) == 0.0);
  // Hanging down, the tip is 2l below the goal.
  CHECK(cart_dense(down, act(0.0)) == doctest::Approx(-4.0));
}

TEST_CASE("rewards are bounded above") {
  Rng rng = child_rng(4, "rewards");
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (EnvId env : {EnvId::kPendulum, EnvId::kCartpole}) {
    const RewardFunction dense(env, RewardVariant::kDense);
    const RewardFunction sparse(env, RewardVariant::kSparse);
    for (int i = 0; i < 2000; ++i) {
      const Vector obs = observe(env, random_state(env, rng));
      CHECK(dense(obs, act(0.0)) <= 0.0);
      CHECK(sparse(obs, act(u(rng))) <= (env == EnvId::kPendulum ? 2.0 : 1.0));
    }
  }
}

TEST_CASE("batch rewards match the scalar form") {
  Rng rng = child_rng(5, "batch");
  const RewardFunction r(EnvId::kPendulum, RewardVariant::kSparse);
  Matrix s(20, 3), a = standard_normal(20, 1, rng);
  for (Index i = 0; i < 20; ++i) s.row(i) = observe(EnvId::kPendulum, random_state(EnvId::kPendulum, rng)).transpose();
  const Vector b = r.batch(s, a);
  for (Index i = 0; i < 20; ++i) CHECK(b(i) == r(s.row(i).transpose(), a.row(i).transpose()));
}

TEST_CASE("task sampling") {
  CHECK(sample_tasks(EnvId::kPendulum, 0, 1).empty());
  const auto a = sample_tasks(EnvId::kCartpole, 5, 7);
  const auto b = sample_tasks(EnvId::kCartpole, 5, 7);
  REQUIRE(a.size() == 5);
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(describe(a[i]) == describe(b[i]));
  CHECK(describe(sample_tasks(EnvId::kCartpole, 1, 8)[0]) != describe(a[0]));

  const auto many = sample_tasks(EnvId::kPendulum, 10000, 9);
  double mass = 0.0, length = 0.0, damping = 0.0;
  for (const TaskParams& t : many) {
    const auto& p = std::get<PendulumParams>(t);
    CHECK(p.mass >= 0.5);
    CHECK(p.mass <= 1.5);
    mass += p.mass;
    length += p.length;
    damping += p.damping;
  }
  CHECK(std::abs(mass / 1e4 - 1.0) <= 0.02);
  CHECK(std::abs(length / 1e4 - 1.0) <= 0.02);
  CHECK(std::abs(damping / 1e4 - 0.0275) <= 0.02 * 0.0275);

  const auto carts = sample_tasks(EnvId::kCartpole, 10000, 10);
  double pole = 0.0;
  for (const TaskParams& t : carts) pole += std::get<CartpoleParams>(t).pole_length;
  CHECK(std::abs(pole / 1e4 - 1.0) <= 0.02);
}

TEST_CASE("meta dataset collection") {
  const PendulumParams p;
  Rng rng = child_rng(11, "collect");
  SUBCASE("counting") {
    CHECK(collect_meta_dataset(p, 1, 10, uniform_random_policy(1), InitialState::kRandom, rng).size() == 10);
    CHECK(collect_meta_dataset(p, 3, 7, uniform_random_policy(1), InitialState::kRandom, rng).size() == 21);
  }
  SUBCASE("zero policy from rest is an equilibrium rollout") {
    const TransitionDataset d = collect_meta_dataset(p, 2, 50, zero_policy(1), InitialState::kRestDown, rng);
    CHECK((d.next_states() - d.states()).cwiseAbs().maxCoeff() <= 1e-12);
  }
  SUBCASE("fixed seed gives a stable hash") {
    Rng r1 = child_rng(12, "collect");
    Rng r2 = child_rng(12, "collect");
    const TransitionDataset a = collect_meta_dataset(p, 2, 30, uniform_random_policy(1), InitialState::kRandom, r1);
    const TransitionDataset b = collect_meta_dataset(p, 2, 30, uniform_random_policy(1), InitialState::kRandom, r2);
    CHECK(a.hash() == b.hash());
    CHECK(a == b);
  }
  SUBCASE("invalid counts") {
    CHECK_THROWS_AS(collect_meta_dataset(p, 0, 10, zero_policy(1), InitialState::kRandom, rng), PreconditionError);
  }
}

TEST_CASE("dataset file round-trip preserves every bit") {
  Rng rng = child_rng(13, "file");
  const CartpoleParams c{0.12, 0.9, 1.1, 10.0};
  DatasetFile f{collect_meta_dataset(c, 2, 20, uniform_random_policy(1), InitialState::kRandom, rng), c, 42};
  const auto path = std::filesystem::temp_directory_path() / "pacoh_test_dataset.csv";
  write_dataset(path, f);
  const DatasetFile back = read_dataset(path);
  CHECK(back.data == f.data);
  CHECK(back.data.hash() == f.data.hash());
  CHECK(back.seed == 42);
  CHECK(describe(back.params) == describe(f.params));
  std::filesystem::remove(path);
  CHECK_THROWS_AS(read_dataset(path), IoError);
}

TEST_CASE("transition dataset views") {
  TransitionDataset d(2, 1);
  d.add((Vector(2) << 1, 2).finished(), act(0.5), (Vector(2) << 1.5, 1.0).finished());
  CHECK(d.inputs() == (Matrix(1, 3) << 1, 2, 0.5).finished());
  CHECK(d.deltas() == (Matrix(1, 2) << 0.5, -1.0).finished());
  TransitionDataset e(2, 1);
  e.append(d);
  e.append(d);
  CHECK(e.size() == 2);
  CHECK(e.hash() != d.hash());
}

TEST_CASE("names round-trip and unknown names are config errors") {
  CHECK(env_from_string("cartpole") == EnvId::kCartpole);
  CHECK(variant_from_string(to_string(RewardVariant::kSparse)) == RewardVariant::kSparse);
  CHECK_THROWS_AS(env_from_string("acrobot"), ConfigError);
  CHECK_THROWS_AS(variant_from_string("shaped"), ConfigError);
}
