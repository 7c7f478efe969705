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

#include "pacoh/checks.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <optional>
#include <random>

#include "pacoh/control.hpp"
#include "pacoh/inference.hpp"
#include "pacoh/meta.hpp"
#include "pacoh/nn.hpp"
#include "pacoh/prior.hpp"
#include "pacoh/random.hpp"
#include "pacoh/svgd.hpp"

namespace pacoh::checks {

namespace {

template <typename Body>
CheckResult timed(const std::string& name, Body body) {
  const auto start = std::chrono::steady_clock::now();
  CheckResult r{name, false, "", 0.0};
  try {
    body(r);
  } catch (const std::exception& e) {
    r.passed = false;
    r.detail = std::string("exception: ") + e.what();
  }
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return r;
}

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0, double d = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c, d);
  return buf;
}

Vector uniform_vector(Index n, double lo, double hi, Rng& rng) {
  std::uniform_real_distribution<double> u(lo, hi);
  Vector v(n);
  for (Index i = 0; i < n; ++i) v(i) = u(rng);
  return v;
}

}  // namespace

double finite_difference(const std::function<double(const Vector&)>& f, const Vector& x, Index i,
                         double h) {
  Vector p1 = x, m1 = x, p2 = x, m2 = x;
  p1(i) += h;
  m1(i) -= h;
  p2(i) += 2 * h;
  m2(i) -= 2 * h;
  return (8.0 * (f(p1) - f(m1)) - (f(p2) - f(m2))) / (12.0 * h);
}

double max_gradient_error(const std::function<double(const Vector&)>& f, const Vector& x,
                          const Vector& analytic, int n_coords, std::uint64_t seed, double floor,
                          double h) {
  std::vector<Index> idx(static_cast<std::size_t>(x.size()));
  std::iota(idx.begin(), idx.end(), Index{0});
  Rng rng = child_rng(seed, "fd-coords");
  std::shuffle(idx.begin(), idx.end(), rng);
  idx.resize(std::min<std::size_t>(idx.size(), static_cast<std::size_t>(n_coords)));
  double worst = 0.0;
  for (Index i : idx) {
    const double fd = finite_difference(f, x, i, h);
    const double denom = std::max({std::abs(fd), std::abs(analytic(i)), floor});
    worst = std::max(worst, std::abs(fd - analytic(i)) / denom);
  }
  return worst;
}

CheckResult gradient_integrity(std::uint64_t seed) {
  return timed("gradient integrity", [&](CheckResult& r) {
    // Smooth activation so central differences are exact up to O(h^4).
    const MLPArchitecture arch(3, 2, {12, 12}, Activation::kTanh);
    const Index p = arch.param_count();
    const Index dim = arch.particle_dim();
    Rng rng = child_rng(seed, "gradient-check");
    const Matrix x = standard_normal(10, 3, rng);
    const Matrix y = standard_normal(10, 2, rng);
    const Vector theta = 0.5 * standard_normal(dim, 1, rng);
    const GaussianLikelihood lik{uniform_vector(2, -0.5, 0.5, rng)};
    const GaussianPrior prior{0.3 * standard_normal(dim, 1, rng), uniform_vector(dim, -1.0, 0.0, rng)};
    constexpr int kCoords = 50;
    std::vector<std::pair<std::string, double>> errs;

    {  // likelihood w.r.t. [params || log_sigma]
      Vector z(p + 2);
      z << theta.head(p), lik.log_sigma;
      auto f = [&](const Vector& v) {
        return avg_log_likelihood(arch, v.head(p), GaussianLikelihood{v.tail(2)}, x, y);
      };
      const LikelihoodGradient g = avg_log_likelihood_grad(arch, theta.head(p), lik, x, y);
      Vector a(p + 2);
      a << g.d_params, g.d_log_sigma;
      errs.emplace_back("likelihood", max_gradient_error(f, z, a, kCoords, seed));
    }
    {
      auto f = [&](const Vector& v) { return prior.log_density(v); };
      errs.emplace_back("prior", max_gradient_error(f, theta, prior.score(theta), kCoords, seed));
    }
    const HyperPrior hp;
    GaussianPrior phi_prior = sample_hyper_prior(hp, arch, rng);
    phi_prior.log_sigma.head(p).setConstant(-1.5);
    phi_prior.mu.tail(2).setConstant(-0.5);
    phi_prior.log_sigma.tail(2).setConstant(-1.0);
    phi_prior.mu.head(p) *= 0.5;
    const Vector phi = phi_prior.flat();
    {
      auto f = [&](const Vector& v) { return hyper_prior_log_density(hp, arch, v); };
      errs.emplace_back("hyper-prior",
                        max_gradient_error(f, phi, hyper_prior_score(hp, arch, phi), kCoords, seed));
    }
    const Matrix eps = standard_normal(dim, 3, rng);
    {
      const double beta = std::sqrt(40.0);
      auto f = [&](const Vector& v) {
        return mll_estimate(arch, GaussianPrior::from_flat(v), x, y, beta, eps).value;
      };
      const MllEstimate m = mll_estimate(arch, phi_prior, x, y, beta, eps);
      errs.emplace_back("marginal log-likelihood", max_gradient_error(f, phi, m.grad, kCoords, seed));
    }
    {
      const double beta = std::sqrt(10.0);
      auto f = [&](const Vector& v) {
        return prior.log_density(v) +
               beta * avg_log_likelihood(arch, v.head(p), GaussianLikelihood{v.tail(2)}, x, y);
      };
      const Vector s = bnn_posterior_score(arch, theta, prior, x, y, beta, true);
      errs.emplace_back("posterior score", max_gradient_error(f, theta, s, kCoords, seed));
    }
    {
      std::vector<TaskBatch> batches;
      for (int i = 0; i < 2; ++i) {
        batches.push_back({standard_normal(6, 3, rng), standard_normal(6, 2, rng), 30 + 20 * i});
      }
      const Index n_tasks = 5;
      auto f = [&](const Vector& v) {
        const GaussianPrior pv = GaussianPrior::from_flat(v);
        double total = hyper_prior_log_density(hp, arch, v);
        const double scale = static_cast<double>(n_tasks) / static_cast<double>(batches.size());
        for (const TaskBatch& b : batches) {
          const double m = static_cast<double>(b.full_size);
          total += scale / (std::sqrt(n_tasks * m) + 1.0) *
                   mll_estimate(arch, pv, b.x, b.y, std::sqrt(m), eps).value;
        }
        return total;
      };
      const HyperScore s = hyper_posterior_score(arch, phi, batches, hp, n_tasks, eps);
      errs.emplace_back("hyper-posterior score", max_gradient_error(f, phi, s.score, kCoords, seed));
    }
    double worst = 0.0;
    for (const auto& [name, e] : errs) {
      worst = std::max(worst, e);
      r.detail += name + fmt(" %.2e; ", e);
    }
    r.passed = worst <= 1e-5;
    r.detail += fmt("max relative error %.2e (limit 1e-5)", worst);
  });
}

CheckResult svgd_standard_normal(std::uint64_t seed) {
  return timed("svgd standard normal", [&](CheckResult& r) {
    Rng rng = child_rng(seed, "svgd-check");
    Matrix particles = (standard_normal(1, 50, rng).array() * 0.5 - 2.0).matrix();
    const ScoreFn score = [](Index, const Eigen::Ref<const Vector>& x) { return Vector(-x); };
    for (int step = 0; step < 2000; ++step) {
      particles = svgd_step(particles, score, std::nullopt, 0.05);
    }
    const double mean = particles.mean();
    const double sd = std::sqrt((particles.array() - mean).square().mean());
    r.passed = std::abs(mean) <= 0.05 && sd >= 0.85 && sd <= 1.15;
    r.detail = fmt("mean %.4f (|.| <= 0.05), std %.4f (in [0.85, 1.15])", mean, sd);
  });
}

CheckResult conjugate_bias_posterior(std::uint64_t seed) {
  return timed("conjugate bias posterior", [&](CheckResult& r) {
    // A single linear unit fed x = 0: only the bias sees the data.
    const MLPArchitecture arch(1, 1, {}, Activation::kTanh);
    const Index m = 16;
    Rng rng = child_rng(seed, "conjugate-check");
    RegressionData data{Matrix::Zero(m, 1), (standard_normal(m, 1, rng).array() + 2.0).matrix()};
    const double prior_mean = 0.0, prior_std = 1.0, noise_std = 1.0;
    GaussianPrior prior{Vector::Constant(arch.particle_dim(), prior_mean),
                        Vector::Constant(arch.particle_dim(), std::log(prior_std))};
    BnnFitConfig cfg;
    cfg.steps = 3000;
    cfg.n_particles = 200;
    cfg.batch_size = m;
    cfg.bandwidth = std::nullopt;
    cfg.update = SvgdUpdate::kPlain;
    cfg.step_size = 0.02;
    cfg.fixed_log_sigma = std::log(noise_std);
    const Matrix particles = bnn_svgd_fit(arch, prior, data, cfg, seed);

    const double beta = std::sqrt(static_cast<double>(m));
    const double precision = 1.0 / (prior_std * prior_std) + beta / (noise_std * noise_std);
    const double exact_mean =
        (prior_mean / (prior_std * prior_std) + beta * data.y.mean() / (noise_std * noise_std)) /
        precision;
    const double exact_std = 1.0 / std::sqrt(precision);
    const Eigen::RowVectorXd bias = particles.row(arch.layers()[0].bias_offset);
    const double mean = bias.mean();
    const double sd = std::sqrt((bias.array() - mean).square().mean());
    const double mean_err = std::abs(mean - exact_mean) / std::abs(exact_mean);
    const double std_err = std::abs(sd - exact_std) / exact_std;
    r.passed = mean_err <= 0.1 && std_err <= 0.1;
    r.detail = fmt("mean %.4f vs %.4f, std %.4f vs %.4f", mean, exact_mean, sd, exact_std) +
               fmt(" (relative errors %.3f, %.3f; limit 0.1)", mean_err, std_err);
  });
}

CheckResult colored_noise_spectrum(std::uint64_t seed) {
  return timed("colored noise spectrum", [&](CheckResult& r) {
    Rng rng = child_rng(seed, "noise-check");
    const Index h = 256;
    const std::vector<Matrix> pink = colored_noise(2.0, 1, h, 1000, rng);
    // Averaged periodogram at frequencies 1..h/2 via a direct DFT.
    const Index nf = h / 2;
    Vector power = Vector::Zero(nf);
    Matrix cos_b(h, nf), sin_b(h, nf);
    for (Index t = 0; t < h; ++t) {
      for (Index k = 1; k <= nf; ++k) {
        const double w = 2.0 * M_PI * static_cast<double>(k * t) / static_cast<double>(h);
        cos_b(t, k - 1) = std::cos(w);
        sin_b(t, k - 1) = std::sin(w);
      }
    }
    for (const Matrix& s : pink) {
      const Eigen::RowVectorXd re = s.row(0) * cos_b;
      const Eigen::RowVectorXd im = s.row(0) * sin_b;
      power += (re.array().square() + im.array().square()).matrix().transpose();
    }
    Vector lx(nf), ly(nf);
    for (Index k = 0; k < nf; ++k) {
      lx(k) = std::log(static_cast<double>(k + 1) / static_cast<double>(h));
      ly(k) = std::log(power(k) / static_cast<double>(pink.size()));
    }
    const double mx = lx.mean(), my = ly.mean();
    const double slope = ((lx.array() - mx) * (ly.array() - my)).sum() / (lx.array() - mx).square().sum();

    const Index hw = 64;
    const std::vector<Matrix> white = colored_noise(0.0, 1, hw, 10000, rng);
    double acf = 0.0;
    for (const Matrix& s : white) {
      const Eigen::RowVectorXd v = s.row(0).array() - s.row(0).mean();
      const double denom = v.squaredNorm();
      acf += denom > 0 ? v.head(hw - 1).dot(v.tail(hw - 1)) / denom : 0.0;
    }
    acf /= static_cast<double>(white.size());
    r.passed = std::abs(slope + 2.0) <= 0.3 && std::abs(acf) <= 0.05;
    r.detail = fmt("beta=2 slope %.3f (-2 +- 0.3); beta=0 mean lag-1 autocorrelation %.4f (|.| <= 0.05)",
                   slope, acf);
  });
}

CheckResult predictive_aggregation(std::uint64_t seed) {
  return timed("predictive aggregation", [&](CheckResult& r) {
    const MLPArchitecture arch(4, 3, {16, 16}, Activation::kReLU);
    Rng rng = child_rng(seed, "aggregation-check");
    Normalizer norm{standard_normal(4, 1, rng), uniform_vector(4, 0.5, 2.0, rng),
                    standard_normal(3, 1, rng), uniform_vector(3, 0.1, 1.0, rng)};
    ParticleEnsemble ens{arch, norm, {}};
    for (int k = 0; k < 3; ++k) ens.groups.push_back(0.4 * standard_normal(arch.particle_dim(), 4, rng));
    const Matrix s = standard_normal(25, 3, rng);
    const Matrix a = standard_normal(25, 1, rng);
    const PredictiveBatch fast = predict_batch(ens, s, a);

    double worst = 0.0;
    for (Index row = 0; row < s.rows(); ++row) {
      std::vector<Vector> outs;
      for (const Matrix& g : ens.groups) {
        for (Index l = 0; l < g.cols(); ++l) {
          Matrix xin(1, 4);
          xin << s.row(row), a.row(row);
          for (Index j = 0; j < 4; ++j) xin(0, j) = (xin(0, j) - norm.x_mean(j)) / norm.x_std(j);
          const Matrix o = mlp_forward(arch, g.col(l), xin);
          Vector next(3);
          for (Index j = 0; j < 3; ++j) next(j) = s(row, j) + o(0, j) * norm.y_std(j) + norm.y_mean(j);
          outs.push_back(next);
        }
      }
      for (Index j = 0; j < 3; ++j) {
        double mean = 0.0;
        for (const Vector& o : outs) mean += o(j);
        mean /= static_cast<double>(outs.size());
        double var = 0.0;
        for (const Vector& o : outs) var += (o(j) - mean) * (o(j) - mean);
        const double sd = std::sqrt(var / static_cast<double>(outs.size()));
        worst = std::max({worst, std::abs(mean - fast.mean(row, j)), std::abs(sd - fast.epistemic_std(row, j))});
      }
    }
    ParticleEnsemble single{arch, norm, {ens.groups[0].leftCols(1)}};
    const double single_std = predict_batch(single, s, a).epistemic_std.cwiseAbs().maxCoeff();
    r.passed = worst <= 1e-12 && single_std == 0.0;
    r.detail = fmt("max deviation from explicit loop %.2e (limit 1e-12); single-network std %.1e", worst,
                   single_std);
  });
}

namespace {

// State never changes; the planner only sees the action cost.
class StaticModel final : public TransitionModel {
 public:
  explicit StaticModel(Index action_dim) : action_dim_(action_dim) {}
  Index state_dim() const override { return 1; }
  Index action_dim() const override { return action_dim_; }
  PredictiveBatch predict(const Eigen::Ref<const Matrix>& states,
                          const Eigen::Ref<const Matrix>&) const override {
    return {states, Matrix::Zero(states.rows(), 1)};
  }

 private:
  Index action_dim_;
};

}  // namespace

CheckResult icem_quadratic(std::uint64_t seed) {
  return timed("icem quadratic optimum", [&](CheckResult& r) {
    const Vector target = Vector::Constant(1, 0.3);
    const StaticModel model(target.size());
    const BatchReward reward = [&](const Eigen::Ref<const Matrix>&, const Eigen::Ref<const Matrix>& a) {
      return Vector(-(a.rowwise() - target.transpose()).rowwise().squaredNorm());
    };
    const ICEMConfig cfg = ICEMConfig::desk();
    constexpr int kCalls = 40;
    constexpr int kRuns = 5;
    double worst = 0.0;
    for (int run = 0; run < kRuns; ++run) {
      Rng rng = child_rng(seed, "icem-check", static_cast<std::uint64_t>(run));
      std::optional<WarmStart> warm;
      PlanResult plan;
      for (int call = 0; call < kCalls; ++call) {
        plan = icem_plan(model, Vector::Zero(1), reward, cfg, warm, PlannerMode::kOptimistic, rng);
        WarmStart next{shift_plan(plan.distribution.mean), {}};
        for (const Matrix& e : plan.elites) next.elites.push_back(shift_plan(e));
        warm = std::move(next);
      }
      const Matrix dev = plan.best.actions.colwise() - target;
      worst = std::max(worst, dev.cwiseAbs().maxCoeff());
    }
    r.passed = worst <= 0.02;
    r.detail = fmt("max |a - a*| over %g runs x horizon %g after %g receding-horizon calls: %.4f (limit 0.02)",
                   kRuns, cfg.horizon, kCalls, worst);
  });
}

std::vector<CheckResult> run_all(std::uint64_t seed) {
  return {gradient_integrity(seed),     svgd_standard_normal(seed),  conjugate_bias_posterior(seed),
          colored_noise_spectrum(seed), predictive_aggregation(seed), icem_quadratic(seed)};
}

}  // namespace pacoh::checks
