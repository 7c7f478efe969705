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


#ifndef PACOH_TESTS_ORACLES_HPP_
#define PACOH_TESTS_ORACLES_HPP_

#include <cmath>
#include <numbers>
#include <vector>

#include "pacoh/nn.hpp"
#include "pacoh/random.hpp"

namespace pacoh::testing {

// Straight-loop forward pass, no Eigen expressions.
inline Matrix naive_forward(const MLPArchitecture& arch, const Vector& theta, const Matrix& x) {
  Matrix out(x.rows(), arch.output_dim());
  for (Index n = 0; n < x.rows(); ++n) {
    std::vector<double> h(x.cols());
    for (Index i = 0; i < x.cols(); ++i) h[i] = x(n, i);
    const auto layers = arch.layers();
    for (std::size_t l = 0; l < layers.size(); ++l) {
      const LayerSlice& s = layers[l];
      std::vector<double> z(s.fan_out);
      for (Index j = 0; j < s.fan_out; ++j) {
        double acc = theta[s.bias_offset + j];
        for (Index i = 0; i < s.fan_in; ++i) acc += h[i] * theta[s.weight_offset + j * s.fan_in + i];
        if (l + 1 < layers.size()) {
          acc = arch.activation() == Activation::kReLU ? (acc > 0 ? acc : 0.0) : std::tanh(acc);
        }
        z[j] = acc;
      }
      h = z;
    }
    for (Index j = 0; j < arch.output_dim(); ++j) out(n, j) = h[j];
  }
  return out;
}

// Sum of per-point, per-dimension Gaussian log densities divided by the count.
inline double naive_avg_log_likelihood(const Matrix& pred, const Matrix& y, const Vector& log_sigma) {
  double total = 0.0;
  for (Index n = 0; n < y.rows(); ++n) {
    for (Index d = 0; d < y.cols(); ++d) {
      const double s = std::exp(log_sigma[d]);
      const double r = y(n, d) - pred(n, d);
      total += -0.5 * std::log(2.0 * std::numbers::pi) - std::log(s) - r * r / (2.0 * s * s);
    }
  }
  return total / static_cast<double>(y.rows());
}

inline double rel_err(double a, double b, double floor = 1e-12) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), floor});
}

}  // namespace pacoh::testing

#endif  // PACOH_TESTS_ORACLES_HPP_
