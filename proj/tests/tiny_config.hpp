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


#ifndef PACOH_TESTS_TINY_CONFIG_HPP_
#define PACOH_TESTS_TINY_CONFIG_HPP_

#include "pacoh/harness.hpp"

namespace pacoh::testing {

// A configuration small enough to run the whole pipeline in about a second.
inline ExperimentConfig tiny_config() {
  ExperimentConfig c = ExperimentConfig::from_profile("desk");
  c.seeds = {0};
  c.meta_data = {2, 1, 20, InitialState::kRandom};
  c.target_episodes = 3;
  c.target_horizon = 8;
  c.model.hidden = {8};
  c.meta.steps = 20;
  c.meta.tasks_per_batch = 2;
  c.posterior.steps = 20;
  c.planner.iterations = 2;
  c.planner.population = 20;
  c.planner.elites = 5;
  c.planner.horizon = 5;
  return c;
}

}  // namespace pacoh::testing

#endif  // PACOH_TESTS_TINY_CONFIG_HPP_
