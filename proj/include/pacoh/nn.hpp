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

#ifndef PACOH_NN_HPP_
#define PACOH_NN_HPP_

#include <span>
#include <string>
#include <vector>

#include "pacoh/errors.hpp"
#include "pacoh/types.hpp"

namespace pacoh {

enum class Activation { kReLU, kTanh };

std::string to_string(Activation activation);
Activation activation_from_string(const std::string& name);

// Location of one dense layer inside a flat ParamVector. The weight block is
// stored column-major as a (fan_in x fan_out) matrix, followed by the bias.
struct LayerSlice {
  Index weight_offset;
  Index bias_offset;
  Index fan_in;
  Index fan_out;
};

class MLPArchitecture {
 public:
  MLPArchitecture(Index input_dim, Index output_dim, std::vector<Index> hidden_sizes,
                  Activation activation = Activation::kReLU);

  Index input_dim() const { return input_dim_; }
  Index output_dim() const { return output_dim_; }
  const std::vector<Index>& hidden_sizes() const { return hidden_sizes_; }
  Activation activation() const { return activation_; }
  std::span<const LayerSlice> layers() const { return layers_; }

  // Sum over layers of (fan_in + 1) * fan_out.
  Index param_count() const { return param_count_; }

  // Network parameters followed by one log-sigma per output dimension.
  Index particle_dim() const { return param_count_ + output_dim_; }

  friend bool operator==(const MLPArchitecture& a, const MLPArchitecture& b) {
    return a.input_dim_ == b.input_dim_ && a.output_dim_ == b.output_dim_ &&
           a.hidden_sizes_ == b.hidden_sizes_ && a.activation_ == b.activation_;
  }

 private:
  Index input_dim_;
  Index output_dim_;
  std::vector<Index> hidden_sizes_;
  Activation activation_;
  std::vector<LayerSlice> layers_;
  Index param_count_ = 0;
};

// Aleatoric noise scale per output dimension, stored in log-space.
struct GaussianLikelihood {
  Vector log_sigma;
};

namespace detail {

template <typename Derived>
void apply_activation(Activation activation, Eigen::MatrixBase<Derived>& z) {
  using Scalar = typename Derived::Scalar;
  if (activation == Activation::kReLU) {
    z = z.cwiseMax(Scalar(0));
  } else {
    z = z.array().tanh().matrix();
  }
}

inline void check_forward_shapes(const MLPArchitecture& arch, Index params, Index cols) {
  if (params != arch.param_count() && params != arch.particle_dim()) {
    throw ShapeError("mlp_forward: parameter vector has length " + std::to_string(params) +
                     ", architecture needs " + std::to_string(arch.param_count()));
  }
  if (cols != arch.input_dim()) {
    throw ShapeError("mlp_forward: input width " + std::to_string(cols) + " != input_dim " +
                     std::to_string(arch.input_dim()));
  }
}

}  // namespace detail

// Evaluates the network on a (batch x input_dim) input. A particle vector
// (parameters plus trailing log-sigma) is accepted; the tail is ignored.
template <typename DerivedP, typename DerivedX>
MatrixX<typename DerivedX::Scalar> mlp_forward(const MLPArchitecture& arch,
                                               const Eigen::MatrixBase<DerivedP>& params,
                                               const Eigen::MatrixBase<DerivedX>& x) {
  using Scalar = typename DerivedX::Scalar;
  detail::check_forward_shapes(arch, params.size(), x.cols());
  const VectorX<Scalar> theta = params.template cast<Scalar>();
  MatrixX<Scalar> h = x;
  const auto layers = arch.layers();
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const LayerSlice& s = layers[l];
    Eigen::Map<const MatrixX<Scalar>> w(theta.data() + s.weight_offset, s.fan_in, s.fan_out);
    Eigen::Map<const VectorX<Scalar>> b(theta.data() + s.bias_offset, s.fan_out);
    MatrixX<Scalar> z = h * w;
    z.rowwise() += b.transpose();
    if (l + 1 < layers.size()) detail::apply_activation(arch.activation(), z);
    h = std::move(z);
  }
  return h;
}

// Average over data points of the diagonal-Gaussian log density of y under
// N(h_theta(x), diag(sigma^2)).
double avg_log_likelihood(const MLPArchitecture& arch, const Eigen::Ref<const Vector>& params,
                          const GaussianLikelihood& lik, const Eigen::Ref<const Matrix>& x,
                          const Eigen::Ref<const Matrix>& y);

struct LikelihoodGradient {
  double value = 0.0;
  ParamVector d_params;
  Vector d_log_sigma;
};

// Value and exact reverse-mode gradient of avg_log_likelihood with respect to
// the network parameters and log_sigma. The ReLU derivative at 0 is 0.
LikelihoodGradient avg_log_likelihood_grad(const MLPArchitecture& arch,
                                           const Eigen::Ref<const Vector>& params,
                                           const GaussianLikelihood& lik,
                                           const Eigen::Ref<const Matrix>& x,
                                           const Eigen::Ref<const Matrix>& y);

}  // namespace pacoh

#endif  // PACOH_NN_HPP_
