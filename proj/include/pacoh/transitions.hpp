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

#ifndef PACOH_TRANSITIONS_HPP_
#define PACOH_TRANSITIONS_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "pacoh/types.hpp"

namespace pacoh {

// Set of (s, a, s') triples for one task, stored as contiguous rows
// [s || a || s'].
class TransitionDataset {
 public:
  using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

  TransitionDataset(Index state_dim, Index action_dim);

  void add(const Eigen::Ref<const Vector>& s, const Eigen::Ref<const Vector>& a,
           const Eigen::Ref<const Vector>& s_next);
  void append(const TransitionDataset& other);

  Index size() const { return size_; }
  bool empty() const { return size_ == 0; }
  Index state_dim() const { return state_dim_; }
  Index action_dim() const { return action_dim_; }
  Index row_width() const { return 2 * state_dim_ + action_dim_; }

  Eigen::Map<const RowMatrix> rows() const;
  Matrix states() const;
  Matrix actions() const;
  Matrix next_states() const;
  // Model inputs [s || a] and regression targets s' - s.
  Matrix inputs() const;
  Matrix deltas() const;

  // FNV-1a over the raw bytes of every row.
  std::uint64_t hash() const;

  friend bool operator==(const TransitionDataset& a, const TransitionDataset& b) {
    return a.state_dim_ == b.state_dim_ && a.action_dim_ == b.action_dim_ && a.data_ == b.data_;
  }

 private:
  Index state_dim_;
  Index action_dim_;
  Index size_ = 0;
  std::vector<double> data_;
};

}  // namespace pacoh

#endif  // PACOH_TRANSITIONS_HPP_
