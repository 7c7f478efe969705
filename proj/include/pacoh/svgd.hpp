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

#ifndef PACOH_SVGD_HPP_
#define PACOH_SVGD_HPP_

#include <cmath>
#include <functional>
#include <optional>

#include "pacoh/errors.hpp"
#include "pacoh/types.hpp"

namespace pacoh {

// Squared-exponential kernel k(u, v) = exp(-|u - v|^2 / (2 l)).
template <typename DerivedU, typename DerivedV>
double rbf_kernel(const Eigen::MatrixBase<DerivedU>& u, const Eigen::MatrixBase<DerivedV>& v,
                  double bandwidth) {
  if (u.size() != v.size()) throw ShapeError("rbf_kernel: length mismatch");
  return std::exp(-(u - v).squaredNorm() / (2.0 * bandwidth));
}

// Gradient of k(u, v) with respect to u: -(u - v) / l * k.
template <typename DerivedU, typename DerivedV>
Vector rbf_kernel_grad(const Eigen::MatrixBase<DerivedU>& u, const Eigen::MatrixBase<DerivedV>& v,
                       double bandwidth) {
  const double k = rbf_kernel(u, v, bandwidth);
  return -(u - v) / bandwidth * k;
}

// Median heuristic over the particle columns: l = median(|xi - xj|^2) / (2 ln P).
// Falls back to 1 for fewer than two particles or coincident particles.
double median_bandwidth(const Matrix& particles);

// Stein direction for every particle (columns of `particles`):
//   psi(x_i) = 1/P sum_j [k(x_j, x_i) score_j + grad_{x_j} k(x_j, x_i)].
// A nullopt bandwidth selects the median heuristic.
Matrix svgd_direction(const Matrix& particles, const Matrix& scores,
                      std::optional<double> bandwidth);

// Score callback; receives the particle index so errors can name it.
using ScoreFn = std::function<Vector(Index, const Eigen::Ref<const Vector>&)>;

// Evaluates every score, checks finiteness, and returns all scores as columns.
Matrix evaluate_scores(const Matrix& particles, const ScoreFn& score);

// One plain SVGD update x_i <- x_i + step * psi(x_i).
Matrix svgd_step(const Matrix& particles, const ScoreFn& score, std::optional<double> bandwidth,
                 double step_size);

enum class SvgdUpdate { kPlain, kAdam };

// Applies the Stein direction either as a plain ascent step or through an
// Adam-preconditioned step (per-coordinate moment estimates).
class ParticleOptimizer {
 public:
  ParticleOptimizer(SvgdUpdate rule, double step_size, Index dim, Index n_particles);

  void apply(Matrix& particles, const Matrix& direction);

 private:
  SvgdUpdate rule_;
  double step_size_;
  Matrix m_;
  Matrix v_;
  long t_ = 0;
};

}  // namespace pacoh

#endif  // PACOH_SVGD_HPP_
