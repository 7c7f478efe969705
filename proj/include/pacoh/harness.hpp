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

#ifndef PACOH_HARNESS_HPP_
#define PACOH_HARNESS_HPP_

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "pacoh/control.hpp"
#include "pacoh/envs.hpp"
#include "pacoh/inference.hpp"
#include "pacoh/meta.hpp"

namespace pacoh {

// The four comparison cells: prior source (meta-learned or default) crossed
// with planner mode (optimistic or greedy).
enum class Agent { kPacohRl, kPacohRlGreedy, kHUcrl, kPetsDs };

inline constexpr std::array<Agent, 4> kAllAgents = {Agent::kPacohRl, Agent::kPacohRlGreedy,
                                                    Agent::kHUcrl, Agent::kPetsDs};

std::string to_string(Agent agent);
Agent agent_from_string(const std::string& name);
bool uses_meta_priors(Agent agent);
PlannerMode planner_mode(Agent agent);

struct ModelSettings {
  std::vector<Index> hidden{64, 64};
  Activation activation = Activation::kReLU;
};

struct MetaDataSettings {
  int tasks = 8;
  int episodes = 10;
  int horizon = 200;
  InitialState initial_state = InitialState::kRandom;
};

struct ExperimentConfig {
  std::string profile = "desk";
  EnvId env = EnvId::kPendulum;
  RewardVariant reward = RewardVariant::kDense;
  Agent agent = Agent::kPacohRl;
  std::vector<std::uint64_t> seeds{0, 1, 2, 3, 4};
  MetaDataSettings meta_data;
  int target_episodes = 25;
  int target_horizon = 200;
  ModelSettings model;
  MetaBatchPlan meta;
  HyperPrior hyper_prior;
  BnnFitConfig posterior;
  ICEMConfig planner = ICEMConfig::desk();
  // Prior container for meta agents in `run`; empty means "not given".
  std::string prior_file;

  // Profile defaults: "desk" or "paper".
  static ExperimentConfig from_profile(const std::string& profile, EnvId env = EnvId::kPendulum);
  // Throws ConfigError on unknown keys, wrong types or invalid values.
  static ExperimentConfig from_json(const nlohmann::json& j,
                                    const std::optional<std::string>& profile_override = std::nullopt);
  static ExperimentConfig load(const std::filesystem::path& path,
                               const std::optional<std::string>& profile_override = std::nullopt);
  nlohmann::json to_json() const;
  void validate() const;

  MLPArchitecture architecture() const;
};

struct EpisodeRecord {
  int episode = 0;
  double ret = 0.0;
  Index dataset_size = 0;
  double mean_epistemic_std = 0.0;
  double wall_time_s = 0.0;

  friend bool operator==(const EpisodeRecord&, const EpisodeRecord&) = default;
};

// Meta-training task parameters and evaluation task for a seed, drawn from
// disjoint streams.
std::vector<TaskParams> meta_tasks(const ExperimentConfig& cfg, std::uint64_t seed);
TaskParams eval_task(const ExperimentConfig& cfg, std::uint64_t seed);

// One dataset per meta-training task under the uniform random policy.
std::vector<DatasetFile> generate_meta_data(const ExperimentConfig& cfg, std::uint64_t seed);

// Learns K priors on the meta datasets; the normalizer is fitted to their union.
PriorSet meta_train(const ExperimentConfig& cfg, const std::vector<TransitionDataset>& datasets,
                    std::uint64_t seed, std::vector<double>* mean_log_z = nullptr);

// Fits K groups of L particles to the target data under `priors`.
ParticleEnsemble fit_ensemble(const ExperimentConfig& cfg, const PriorSet& priors,
                              const TransitionDataset& data, std::uint64_t seed, int episode);

struct RunHooks {
  // Called after every episode, before the next one starts.
  std::function<void(const EpisodeRecord&)> on_episode;
  // One line per planning step.
  std::ostream* planning_log = nullptr;
  bool measure_wall_time = false;
};

// The adapt-then-act loop on the seed's evaluation task with the given priors
// and the agent's planner mode.
std::vector<EpisodeRecord> run_agent(const ExperimentConfig& cfg, Agent agent,
                                     const PriorSet& priors, std::uint64_t seed,
                                     const RunHooks& hooks = {});

// Meta-learning followed by the adapt-then-act loop.
std::vector<EpisodeRecord> run_pacoh_rl(const ExperimentConfig& cfg, std::uint64_t seed,
                                        const RunHooks& hooks = {});
// Any grid cell; meta cells meta-train first.
std::vector<EpisodeRecord> run_baseline(const ExperimentConfig& cfg, Agent agent,
                                        std::uint64_t seed, const RunHooks& hooks = {});

// Records CSV: episode,return,dataset_size,mean_epistemic_std,wall_time_s
std::string records_csv_header();
std::string format_record(const EpisodeRecord& r);
void write_records_csv(const std::filesystem::path& path, const std::vector<EpisodeRecord>& records);
std::vector<EpisodeRecord> read_records_csv(const std::filesystem::path& path);

struct SummaryRow {
  int episode = 0;
  double mean_return = 0.0;
  double std_return = 0.0;  // population std across seeds
  int n_seeds = 0;

  friend bool operator==(const SummaryRow&, const SummaryRow&) = default;
};

std::vector<SummaryRow> summarize(const std::vector<std::vector<EpisodeRecord>>& per_seed);
void write_summary_csv(const std::filesystem::path& path, const std::vector<SummaryRow>& rows);
std::vector<SummaryRow> read_summary_csv(const std::filesystem::path& path);
void write_learning_curves_svg(const std::filesystem::path& path,
                               const std::map<Agent, std::vector<SummaryRow>>& curves,
                               const std::string& title);

using GridResults = std::map<Agent, std::map<std::uint64_t, std::vector<EpisodeRecord>>>;

// Writes summary/<agent>.csv and learning_curves.svg under `out`.
void emit_results(const std::filesystem::path& out, const GridResults& results,
                  const std::string& title);

// Output layout of one seed's run of one agent.
std::filesystem::path records_path(const std::filesystem::path& out, Agent agent, std::uint64_t seed);
std::filesystem::path planning_log_path(const std::filesystem::path& out, Agent agent, std::uint64_t seed);
std::filesystem::path prior_path(const std::filesystem::path& out, std::uint64_t seed);
std::filesystem::path meta_data_dir(const std::filesystem::path& out, std::uint64_t seed);

// Writes task_<i>.csv per dataset under meta_data_dir(out, seed).
void save_meta_data(const std::filesystem::path& out, std::uint64_t seed,
                    const std::vector<DatasetFile>& files);
// Reads task_0.csv .. task_<n-1>.csv; IoError names the first missing file.
std::vector<DatasetFile> load_meta_data(const std::filesystem::path& out, std::uint64_t seed,
                                        int n_tasks);
// meta_train, then priors.json and meta_trace.csv next to the seed's data.
PriorSet meta_train_and_save(const ExperimentConfig& cfg, const std::vector<DatasetFile>& files,
                             const std::filesystem::path& out, std::uint64_t seed);

// Data collection, meta-training and all four cells for every seed in
// `cfg.seeds`, followed by emit_results. Per-seed records are written and
// flushed episode by episode.
GridResults run_grid(const ExperimentConfig& cfg, const std::filesystem::path& out,
                     bool measure_wall_time = false, std::ostream* progress = nullptr);

// Reads every records CSV under `out` and regenerates the summaries and plot.
GridResults collect_results(const std::filesystem::path& out);

}  // namespace pacoh

#endif  // PACOH_HARNESS_HPP_
