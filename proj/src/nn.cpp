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

#include "pacoh/nn.hpp"

#include <cmath>
#include <numbers>

namespace pacoh {

std::string to_string(Activation activation) {
  return activation == Activation::kReLU ? "relu" : "tanh";
}

Activation activation_from_string(const std::string& name) {
  if (name == "relu") return Activation::kReLU;
  if (name == "tanh") return Activation::kTanh;
  throw ConfigError("unknown activation '" + name + "'");
}

MLPArchitecture::MLPArchitecture(Index input_dim, Index output_dim,
                                 std::vector<Index> hidden_sizes, Activation activation)
    : input_dim_(input_dim),
      output_dim_(output_dim),
      hidden_sizes_(std::move(hidden_sizes)),
      activation_(activation) {
  if (input_dim_ <= 0 || output_dim_ <= 0) {
    throw ShapeError("MLPArchitecture: input and output dimensions must be positive");
  }
  Index fan_in = input_dim_;
  auto add_layer = [&](Index fan_out) {
    if (fan_out <= 0) throw ShapeError("MLPArchitecture: hidden sizes must be positive");
    LayerSlice s{param_count_, param_count_ + fan_in * fan_out, fan_in, fan_out};
    layers_.push_back(s);
    param_count_ += (fan_in + 1) * fan_out;
    fan_in = fan_out;
  };
  for (Index width : hidden_sizes_) add_layer(width);
  add_layer(output_dim_);
}

namespace {

void check_data(const MLPArchitecture& arch, Index params, const GaussianLikelihood& lik,
                const Eigen::Ref<const Matrix>& x, const Eigen::Ref<const Matrix>& y) {
  if (params != arch.param_count()) {
    throw ShapeError("likelihood: parameter vector has length " + std::to_string(params) +
                     ", architecture needs " + std::to_string(arch.param_count()));
  }
  if (x.rows() == 0) throw PreconditionError("likelihood: dataset is empty");
  if (x.rows() != y.rows()) throw ShapeError("likelihood: x and y row counts differ");
  if (x.cols() != arch.input_dim() || y.cols() != arch.output_dim() ||
      lik.log_sigma.size() != arch.output_dim()) {
    throw ShapeError("likelihood: data or noise width does not match the architecture");
  }
}

constexpr double kHalfLog2Pi = 0.91893853320467274178;

}  // namespace

double avg_log_likelihood(const MLPArchitecture& arch, const Eigen::Ref<const Vector>& params,
                          const GaussianLikelihood& lik, const Eigen::Ref<const Matrix>& x,
                          const Eigen::Ref<const Matrix>& y) {
  check_data(arch, params.size(), lik, x, y);
  const Matrix residual = y - mlp_forward(arch, params, x);
  const Eigen::ArrayXd inv_var = (-2.0 * lik.log_sigma.array()).exp();
  const double n = static_cast<double>(x.rows());
  const double quad = (residual.array().square().rowwise() * inv_var.transpose()).sum();
  return -static_cast<double>(arch.output_dim()) * kHalfLog2Pi - lik.log_sigma.sum() -
         0.5 * quad / n;
}

LikelihoodGradient avg_log_likelihood_grad(const MLPArchitecture& arch,
                                           const Eigen::Ref<const Vector>& params,
                                           const GaussianLikelihood& lik,
                                           const Eigen::Ref<const Matrix>& x,
                                           const Eigen::Ref<const Matrix>& y) {
  check_data(arch, params.size(), lik, x, y);
  const auto layers = arch.layers();
  const std::size_t n_layers = layers.size();

  // Forward pass keeping every layer's input and pre-activation.
  std::vector<Matrix> inputs(n_layers);
  std::vector<Matrix> pre(n_layers);
  Matrix h = x;
  for (std::size_t l = 0; l < n_layers; ++l) {
    const LayerSlice& s = layers[l];
    Eigen::Map<const Matrix> w(params.data() + s.weight_offset, s.fan_in, s.fan_out);
    Eigen::Map<const Vector> b(params.data() + s.bias_offset, s.fan_out);
    inputs[l] = std::move(h);
    pre[l] = inputs[l] * w;
    pre[l].rowwise() += b.transpose();
    h = pre[l];
    if (l + 1 < n_layers) detail::apply_activation(arch.activation(), h);
  }

  const double n = static_cast<double>(x.rows());
  const Eigen::ArrayXd inv_var = (-2.0 * lik.log_sigma.array()).exp();
  const Matrix residual = y - h;

  LikelihoodGradient out;
  const Eigen::ArrayXd sq_per_dim = residual.array().square().colwise().sum().transpose();
  out.value = -static_cast<double>(arch.output_dim()) * kHalfLog2Pi - lik.log_sigma.sum() -
              0.5 * (sq_per_dim * inv_var).sum() / n;
  // d/dlog_sigma of -log_sigma - r^2 / (2 sigma^2), averaged.
  out.d_log_sigma = (-1.0 + sq_per_dim * inv_var / n).matrix();

  out.d_params = ParamVector::Zero(arch.param_count());
  // dL/d(output) = residual / sigma^2 / n.
  Matrix delta = (residual.array().rowwise() * inv_var.transpose()).matrix() / n;
  for (std::size_t li = n_layers; li-- > 0;) {
    const LayerSlice& s = layers[li];
    Eigen::Map<Matrix> dw(out.d_params.data() + s.weight_offset, s.fan_in, s.fan_out);
    Eigen::Map<Vector> db(out.d_params.data() + s.bias_offset, s.fan_out);
    dw.noalias() = inputs[li].transpose() * delta;
    db = delta.colwise().sum().transpose();
    if (li == 0) break;
    Eigen::Map<const Matrix> w(params.data() + s.weight_offset, s.fan_in, s.fan_out);
    Matrix back = delta * w.transpose();
    const Matrix& z = pre[li - 1];
    if (arch.activation() == Activation::kReLU) {
      back = (z.array() > 0.0).select(back, 0.0);
    } else {
      back.array() *= 1.0 - z.array().tanh().square();
    }
    delta = std::move(back);
  }
  return out;
}

}  // namespace pacoh
