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

#include "pacoh/transitions.hpp"

#include <cstring>

#include "pacoh/errors.hpp"

namespace pacoh {

TransitionDataset::TransitionDataset(Index state_dim, Index action_dim)
    : state_dim_(state_dim), action_dim_(action_dim) {
  if (state_dim <= 0 || action_dim <= 0) {
    throw ShapeError("TransitionDataset: dimensions must be positive");
  }
}

void TransitionDataset::add(const Eigen::Ref<const Vector>& s, const Eigen::Ref<const Vector>& a,
                            const Eigen::Ref<const Vector>& s_next) {
  if (s.size() != state_dim_ || s_next.size() != state_dim_ || a.size() != action_dim_) {
    throw ShapeError("TransitionDataset::add: triple does not match dataset dimensions");
  }
  data_.insert(data_.end(), s.data(), s.data() + s.size());
  data_.insert(data_.end(), a.data(), a.data() + a.size());
  data_.insert(data_.end(), s_next.data(), s_next.data() + s_next.size());
  ++size_;
}

void TransitionDataset::append(const TransitionDataset& other) {
  if (other.state_dim_ != state_dim_ || other.action_dim_ != action_dim_) {
    throw ShapeError("TransitionDataset::append: dimension mismatch");
  }
  data_.insert(data_.end(), other.data_.begin(), other.data_.end());
  size_ += other.size_;
}

Eigen::Map<const TransitionDataset::RowMatrix> TransitionDataset::rows() const {
  return Eigen::Map<const RowMatrix>(data_.data(), size_, row_width());
}

Matrix TransitionDataset::states() const { return rows().leftCols(state_dim_); }
Matrix TransitionDataset::actions() const { return rows().middleCols(state_dim_, action_dim_); }
Matrix TransitionDataset::next_states() const { return rows().rightCols(state_dim_); }
Matrix TransitionDataset::inputs() const { return rows().leftCols(state_dim_ + action_dim_); }
Matrix TransitionDataset::deltas() const {
  return rows().rightCols(state_dim_) - rows().leftCols(state_dim_);
}

std::uint64_t TransitionDataset::hash() const {
  std::uint64_t h = 1469598103934665603ULL;
  const auto* bytes = reinterpret_cast<const unsigned char*>(data_.data());
  for (std::size_t i = 0; i < data_.size() * sizeof(double); ++i) {
    h ^= bytes[i];
    h *= 1099511628211ULL;
  }
  return h;
}

}  // namespace pacoh
