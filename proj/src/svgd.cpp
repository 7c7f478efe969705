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

#include "pacoh/svgd.hpp"

#include <algorithm>
#include <string>
#include <vector>

namespace pacoh {
namespace {

Matrix pairwise_sq_dists(const Matrix& x) {
  const Vector sq = x.colwise().squaredNorm().transpose();
  Matrix d = (-2.0 * x.transpose() * x).colwise() + sq;
  d.rowwise() += sq.transpose();
  return d.cwiseMax(0.0);
}

}  // namespace

double median_bandwidth(const Matrix& particles) {
  const Index p = particles.cols();
  if (p < 2) return 1.0;
  std::vector<double> d;
  d.reserve(static_cast<std::size_t>(p * (p - 1) / 2));
  for (Index i = 0; i < p; ++i) {
    for (Index j = i + 1; j < p; ++j) d.push_back((particles.col(i) - particles.col(j)).squaredNorm());
  }
  const auto mid = d.begin() + static_cast<std::ptrdiff_t>(d.size() / 2);
  std::nth_element(d.begin(), mid, d.end());
  double median = *mid;
  if (d.size() % 2 == 0) median = 0.5 * (median + *std::max_element(d.begin(), mid));
  if (!(median > 1e-12)) return 1.0;
  return median / (2.0 * std::log(static_cast<double>(p)));
}

Matrix svgd_direction(const Matrix& particles, const Matrix& scores,
                      std::optional<double> bandwidth) {
  if (particles.rows() != scores.rows() || particles.cols() != scores.cols()) {
    throw ShapeError("svgd_direction: particles and scores differ in shape");
  }
  const Index p = particles.cols();
  if (p == 0) throw PreconditionError("svgd_direction: no particles");
  const double ell = bandwidth ? *bandwidth : median_bandwidth(particles);
  if (!(ell > 0.0)) throw PreconditionError("svgd_direction: bandwidth must be positive");
  const Matrix k = (-pairwise_sq_dists(particles) / (2.0 * ell)).array().exp().matrix();
  // Repulsion: sum_j (x_i - x_j) / l * k_ji.
  const Vector k_colsum = k.colwise().sum().transpose();
  Matrix repulsion = particles * k_colsum.asDiagonal();
  repulsion -= particles * k;
  return (scores * k + repulsion / ell) / static_cast<double>(p);
}

Matrix evaluate_scores(const Matrix& particles, const ScoreFn& score) {
  Matrix scores(particles.rows(), particles.cols());
  for (Index i = 0; i < particles.cols(); ++i) {
    Vector s = score(i, particles.col(i));
    if (s.size() != particles.rows()) throw ShapeError("svgd: score has wrong length");
    if (!s.allFinite()) {
      throw DivergenceError("svgd: non-finite score for particle " + std::to_string(i));
    }
    scores.col(i) = s;
  }
  return scores;
}

Matrix svgd_step(const Matrix& particles, const ScoreFn& score, std::optional<double> bandwidth,
                 double step_size) {
  const Matrix scores = evaluate_scores(particles, score);
  return particles + step_size * svgd_direction(particles, scores, bandwidth);
}

ParticleOptimizer::ParticleOptimizer(SvgdUpdate rule, double step_size, Index dim,
                                     Index n_particles)
    : rule_(rule), step_size_(step_size) {
  if (rule_ == SvgdUpdate::kAdam) {
    m_ = Matrix::Zero(dim, n_particles);
    v_ = Matrix::Zero(dim, n_particles);
  }
}

void ParticleOptimizer::apply(Matrix& particles, const Matrix& direction) {
  if (rule_ == SvgdUpdate::kPlain) {
    particles += step_size_ * direction;
    return;
  }
  constexpr double kBeta1 = 0.9;
  constexpr double kBeta2 = 0.999;
  constexpr double kEps = 1e-8;
  ++t_;
  m_ = kBeta1 * m_ + (1.0 - kBeta1) * direction;
  v_ = kBeta2 * v_ + (1.0 - kBeta2) * direction.cwiseAbs2();
  const double c1 = 1.0 - std::pow(kBeta1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(kBeta2, static_cast<double>(t_));
  particles.array() +=
      step_size_ * (m_.array() / c1) / ((v_.array() / c2).sqrt() + kEps);
}

}  // namespace pacoh
