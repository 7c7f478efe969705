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

#include "pacoh/harness.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <regex>
#include <set>
#include <sstream>

#include "pacoh/errors.hpp"
#include "pacoh/json_io.hpp"

namespace pacoh {

using Json = nlohmann::json;

std::string to_string(Agent agent) {
  switch (agent) {
    case Agent::kPacohRl: return "pacoh-rl";
    case Agent::kPacohRlGreedy: return "pacoh-rl-greedy";
    case Agent::kHUcrl: return "h-ucrl";
    case Agent::kPetsDs: return "pets-ds";
  }
  return "?";
}

Agent agent_from_string(const std::string& name) {
  for (Agent a : kAllAgents) {
    if (to_string(a) == name) return a;
  }
  throw ConfigError("unknown agent '" + name +
                    "' (expected pacoh-rl, pacoh-rl-greedy, h-ucrl or pets-ds)");
}

bool uses_meta_priors(Agent agent) {
  return agent == Agent::kPacohRl || agent == Agent::kPacohRlGreedy;
}

PlannerMode planner_mode(Agent agent) {
  return agent == Agent::kPacohRl || agent == Agent::kHUcrl ? PlannerMode::kOptimistic
                                                            : PlannerMode::kGreedy;
}

// ---------------------------------------------------------------------------
// Configuration

ExperimentConfig ExperimentConfig::from_profile(const std::string& profile, EnvId env) {
  ExperimentConfig c;
  c.profile = profile;
  c.env = env;
  c.meta.n_priors = 2;
  c.meta.n_model_samples = 2;
  c.meta.steps = 5000;
  c.posterior.n_particles = 2;
  if (profile == "desk") {
    c.planner = ICEMConfig::desk();
  } else if (profile == "paper") {
    c.model.hidden = {200, 200, 200, 200};
    c.meta.n_priors = 3;
    c.meta.n_model_samples = 3;
    c.meta.steps = 100000;
    c.posterior.n_particles = 3;
    c.planner = ICEMConfig::paper();
    if (env == EnvId::kPendulum) {
      c.meta_data = {20, 40, 250, InitialState::kRandom};
      c.target_horizon = 250;
    } else {
      c.meta_data = {15, 10, 200, InitialState::kRandom};
    }
  } else {
    throw ConfigError("unknown profile '" + profile + "' (expected desk or paper)");
  }
  return c;
}

namespace {

// A JSON object whose keys must all be consumed.
class Section {
 public:
  Section(const Json& j, std::string name) : j_(j), name_(std::move(name)) {
    if (!j_.is_object()) throw ConfigError(where("") + "expected an object");
  }

  template <typename T>
  void get(const char* key, T& out) {
    used_.insert(key);
    if (!j_.contains(key)) return;
    try {
      out = j_.at(key).get<T>();
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError(where(key) + "wrong type (" + e.what() + ")");
    }
  }

  template <typename E>
  void get_enum(const char* key, E& out, E (*parse)(const std::string&)) {
    std::string s;
    if (!j_.contains(key)) {
      used_.insert(key);
      return;
    }
    get(key, s);
    try {
      out = parse(s);
    } catch (const std::exception& e) {
      throw ConfigError(where(key) + e.what());
    }
  }

  void get_bandwidth(const char* key, std::optional<double>& out) {
    used_.insert(key);
    if (!j_.contains(key)) return;
    const Json& v = j_.at(key);
    if (v.is_string() && v.get<std::string>() == "median") {
      out = std::nullopt;
    } else if (v.is_number()) {
      out = v.get<double>();
    } else {
      throw ConfigError(where(key) + "expected a number or \"median\"");
    }
  }

  std::optional<Section> child(const char* key) {
    used_.insert(key);
    if (!j_.contains(key)) return std::nullopt;
    return Section(j_.at(key), name_.empty() ? key : name_ + "." + key);
  }

  void finish() const {
    for (const auto& [key, value] : j_.items()) {
      if (!used_.contains(key)) throw ConfigError(where(key) + "unknown key");
    }
  }

 private:
  std::string where(const std::string& key) const {
    std::string path = name_.empty() ? key : (key.empty() ? name_ : name_ + "." + key);
    return "config: " + (path.empty() ? std::string() : path + ": ");
  }

  const Json& j_;
  std::string name_;
  std::set<std::string> used_;
};

SvgdUpdate update_from_string(const std::string& s) {
  if (s == "adam") return SvgdUpdate::kAdam;
  if (s == "plain") return SvgdUpdate::kPlain;
  throw ConfigError("unknown update rule '" + s + "' (expected adam or plain)");
}

std::string to_string(SvgdUpdate u) { return u == SvgdUpdate::kAdam ? "adam" : "plain"; }

InitialState initial_state_from_string(const std::string& s) {
  if (s == "random") return InitialState::kRandom;
  if (s == "rest-down") return InitialState::kRestDown;
  throw ConfigError("unknown initial state '" + s + "' (expected random or rest-down)");
}

std::string to_string(InitialState s) { return s == InitialState::kRandom ? "random" : "rest-down"; }

Json bandwidth_json(const std::optional<double>& bw) { return bw ? Json(*bw) : Json("median"); }

void read_block(Section& parent, const char* key, GaussianBlock& b) {
  if (auto s = parent.child(key)) {
    s->get("mean", b.mean);
    s->get("std", b.std);
    s->finish();
  }
}

}  // namespace

ExperimentConfig ExperimentConfig::from_json(const Json& j,
                                             const std::optional<std::string>& profile_override) {
  Section root(j, "");
  std::string profile = "desk";
  root.get("profile", profile);
  if (profile_override) profile = *profile_override;
  EnvId env = EnvId::kPendulum;
  root.get_enum("env", env, env_from_string);

  ExperimentConfig c = from_profile(profile, env);
  root.get_enum("reward", c.reward, variant_from_string);
  root.get_enum("agent", c.agent, agent_from_string);
  root.get("seeds", c.seeds);
  root.get("prior_file", c.prior_file);
  if (auto s = root.child("meta_data")) {
    s->get("tasks", c.meta_data.tasks);
    s->get("episodes", c.meta_data.episodes);
    s->get("horizon", c.meta_data.horizon);
    s->get_enum("initial_state", c.meta_data.initial_state, initial_state_from_string);
    s->finish();
  }
  if (auto s = root.child("target")) {
    s->get("episodes", c.target_episodes);
    s->get("horizon", c.target_horizon);
    s->finish();
  }
  if (auto s = root.child("model")) {
    s->get("hidden", c.model.hidden);
    s->get_enum("activation", c.model.activation, activation_from_string);
    s->finish();
  }
  if (auto s = root.child("meta_learning")) {
    s->get("steps", c.meta.steps);
    s->get("step_size", c.meta.step_size);
    s->get("priors", c.meta.n_priors);
    s->get("model_samples", c.meta.n_model_samples);
    s->get("tasks_per_batch", c.meta.tasks_per_batch);
    s->get("points_per_task", c.meta.points_per_task);
    s->get_bandwidth("bandwidth", c.meta.bandwidth);
    s->get_enum("update", c.meta.update, update_from_string);
    s->finish();
  }
  if (auto s = root.child("hyper_prior")) {
    read_block(*s, "weight_mean", c.hyper_prior.weight_mean);
    read_block(*s, "weight_log_std", c.hyper_prior.weight_log_std);
    read_block(*s, "lik_mean", c.hyper_prior.lik_mean);
    read_block(*s, "lik_log_std", c.hyper_prior.lik_log_std);
    s->finish();
  }
  if (auto s = root.child("posterior")) {
    s->get("steps", c.posterior.steps);
    s->get("batch_size", c.posterior.batch_size);
    s->get("step_size", c.posterior.step_size);
    s->get("particles", c.posterior.n_particles);
    s->get_bandwidth("bandwidth", c.posterior.bandwidth);
    s->get_enum("update", c.posterior.update, update_from_string);
    s->finish();
  }
  if (auto s = root.child("planner")) {
    ICEMConfig& p = c.planner;
    s->get("iterations", p.iterations);
    s->get("population", p.population);
    s->get("horizon", p.horizon);
    s->get("elites", p.elites);
    s->get("reduction", p.reduction);
    s->get("init_std", p.init_std);
    s->get("noise_beta", p.noise_beta);
    s->get("momentum", p.momentum);
    s->get("elite_keep_fraction", p.elite_keep_fraction);
    s->get("optimism", p.optimism);
    s->get("min_std", p.min_std);
    s->finish();
  }
  root.finish();
  c.validate();
  return c;
}

ExperimentConfig ExperimentConfig::load(const std::filesystem::path& path,
                                        const std::optional<std::string>& profile_override) {
  Json j;
  try {
    j = json_io::read_file(path);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config: " + path.string() + ": " + e.what());
  } catch (const IoError& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  return from_json(j, profile_override);
}

Json ExperimentConfig::to_json() const {
  auto block = [](const GaussianBlock& b) { return Json{{"mean", b.mean}, {"std", b.std}}; };
  Json j;
  j["profile"] = profile;
  j["env"] = to_string(env);
  j["reward"] = to_string(reward);
  j["agent"] = to_string(agent);
  j["seeds"] = seeds;
  j["prior_file"] = prior_file;
  j["meta_data"] = {{"tasks", meta_data.tasks},
                    {"episodes", meta_data.episodes},
                    {"horizon", meta_data.horizon},
                    {"initial_state", to_string(meta_data.initial_state)}};
  j["target"] = {{"episodes", target_episodes}, {"horizon", target_horizon}};
  j["model"] = {{"hidden", model.hidden}, {"activation", to_string(model.activation)}};
  j["meta_learning"] = {{"steps", meta.steps},
                        {"step_size", meta.step_size},
                        {"priors", meta.n_priors},
                        {"model_samples", meta.n_model_samples},
                        {"tasks_per_batch", meta.tasks_per_batch},
                        {"points_per_task", meta.points_per_task},
                        {"bandwidth", bandwidth_json(meta.bandwidth)},
                        {"update", to_string(meta.update)}};
  j["hyper_prior"] = {{"weight_mean", block(hyper_prior.weight_mean)},
                      {"weight_log_std", block(hyper_prior.weight_log_std)},
                      {"lik_mean", block(hyper_prior.lik_mean)},
                      {"lik_log_std", block(hyper_prior.lik_log_std)}};
  j["posterior"] = {{"steps", posterior.steps},
                    {"batch_size", posterior.batch_size},
                    {"step_size", posterior.step_size},
                    {"particles", posterior.n_particles},
                    {"bandwidth", bandwidth_json(posterior.bandwidth)},
                    {"update", to_string(posterior.update)}};
  j["planner"] = {{"iterations", planner.iterations},
                  {"population", planner.population},
                  {"horizon", planner.horizon},
                  {"elites", planner.elites},
                  {"reduction", planner.reduction},
                  {"init_std", planner.init_std},
                  {"noise_beta", planner.noise_beta},
                  {"momentum", planner.momentum},
                  {"elite_keep_fraction", planner.elite_keep_fraction},
                  {"optimism", planner.optimism},
                  {"min_std", planner.min_std}};
  return j;
}

void ExperimentConfig::validate() const {
  auto require = [](bool ok, const std::string& msg) {
    if (!ok) throw ConfigError("config: " + msg);
  };
  require(!seeds.empty(), "seeds must be nonempty");
  require(meta_data.tasks >= 1, "meta_data.tasks must be >= 1");
  require(meta_data.episodes >= 1, "meta_data.episodes must be >= 1");
  require(meta_data.horizon >= 1, "meta_data.horizon must be >= 1");
  require(target_episodes >= 0, "target.episodes must be >= 0");
  require(target_horizon >= 1, "target.horizon must be >= 1");
  require(!model.hidden.empty(), "model.hidden must be nonempty");
  for (Index h : model.hidden) require(h >= 1, "model.hidden entries must be >= 1");
  require(meta.steps >= 0, "meta_learning.steps must be >= 0");
  require(meta.step_size > 0.0, "meta_learning.step_size must be > 0");
  require(meta.n_priors >= 1, "meta_learning.priors must be >= 1");
  require(meta.n_model_samples >= 1, "meta_learning.model_samples must be >= 1");
  require(meta.tasks_per_batch >= 1, "meta_learning.tasks_per_batch must be >= 1");
  require(meta.points_per_task >= 1, "meta_learning.points_per_task must be >= 1");
  require(!meta.bandwidth || *meta.bandwidth > 0.0, "meta_learning.bandwidth must be > 0");
  for (const GaussianBlock* b : {&hyper_prior.weight_mean, &hyper_prior.weight_log_std,
                                 &hyper_prior.lik_mean, &hyper_prior.lik_log_std}) {
    require(b->std > 0.0, "hyper_prior block std must be > 0");
  }
  require(posterior.steps >= 0, "posterior.steps must be >= 0");
  require(posterior.batch_size >= 1, "posterior.batch_size must be >= 1");
  require(posterior.step_size > 0.0, "posterior.step_size must be > 0");
  require(posterior.n_particles >= 1, "posterior.particles must be >= 1");
  require(!posterior.bandwidth || *posterior.bandwidth > 0.0, "posterior.bandwidth must be > 0");
  planner.validate();
}

MLPArchitecture ExperimentConfig::architecture() const {
  const EnvSpec spec = env_spec(env);
  return MLPArchitecture(spec.state_dim + spec.action_dim, spec.state_dim, model.hidden,
                         model.activation);
}

// ---------------------------------------------------------------------------
// Pipeline

std::vector<TaskParams> meta_tasks(const ExperimentConfig& cfg, std::uint64_t seed) {
  return sample_tasks(cfg.env, cfg.meta_data.tasks, child_seed(seed, "meta-tasks"));
}

TaskParams eval_task(const ExperimentConfig& cfg, std::uint64_t seed) {
  return sample_tasks(cfg.env, 1, child_seed(seed, "eval-tasks")).front();
}

std::vector<DatasetFile> generate_meta_data(const ExperimentConfig& cfg, std::uint64_t seed) {
  const EnvSpec spec = env_spec(cfg.env);
  std::vector<DatasetFile> out;
  const std::vector<TaskParams> tasks = meta_tasks(cfg, seed);
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    Rng rng = child_rng(seed, "meta-data", i);
    out.push_back({collect_meta_dataset(tasks[i], cfg.meta_data.episodes, cfg.meta_data.horizon,
                                        uniform_random_policy(spec.action_dim),
                                        cfg.meta_data.initial_state, rng),
                   tasks[i], seed});
  }
  return out;
}

PriorSet meta_train(const ExperimentConfig& cfg, const std::vector<TransitionDataset>& datasets,
                    std::uint64_t seed, std::vector<double>* mean_log_z) {
  if (datasets.empty()) throw PreconditionError("meta_train: no datasets");
  const MLPArchitecture arch = cfg.architecture();
  TransitionDataset all(datasets.front().state_dim(), datasets.front().action_dim());
  for (const TransitionDataset& d : datasets) all.append(d);
  const Normalizer normalizer = Normalizer::fit(all);
  std::vector<RegressionData> tasks;
  for (const TransitionDataset& d : datasets) tasks.push_back(make_regression(d, normalizer));
  MetaLearnResult res = pacoh_meta_learn(arch, tasks, cfg.hyper_prior, cfg.meta,
                                         child_seed(seed, "meta-learn"));
  if (mean_log_z) *mean_log_z = std::move(res.mean_log_z);
  return PriorSet{arch, std::move(res.priors), normalizer, cfg.hyper_prior, std::nullopt};
}

ParticleEnsemble fit_ensemble(const ExperimentConfig& cfg, const PriorSet& priors,
                              const TransitionDataset& data, std::uint64_t seed, int episode) {
  const MLPArchitecture& arch = priors.arch;
  Normalizer normalizer = priors.normalizer ? *priors.normalizer
                          : data.empty()    ? Normalizer::identity(arch.input_dim(), arch.output_dim())
                                            : Normalizer::fit(data);
  const RegressionData rd = make_regression(data, normalizer);
  BnnFitConfig fit = cfg.posterior;
  fit.fixed_log_sigma = priors.fixed_log_sigma;
  ParticleEnsemble ens{arch, normalizer, {}};
  const auto k_total = static_cast<std::uint64_t>(priors.priors.size());
  for (std::size_t k = 0; k < priors.priors.size(); ++k) {
    const std::uint64_t index = static_cast<std::uint64_t>(episode) * k_total + k;
    ens.groups.push_back(bnn_svgd_fit(arch, priors.priors[k], rd, fit,
                                      child_seed(seed, "bnn-fit", index)));
  }
  return ens;
}

std::vector<EpisodeRecord> run_agent(const ExperimentConfig& cfg, Agent agent,
                                     const PriorSet& priors, std::uint64_t seed,
                                     const RunHooks& hooks) {
  if (!(priors.arch == cfg.architecture())) {
    throw ConfigError("prior architecture does not match the configured model");
  }
  if (priors.priors.empty()) throw ConfigError("prior set is empty");
  const TaskParams task = eval_task(cfg, seed);
  const RewardFunction reward(task, cfg.reward);
  const EnvSpec spec = env_spec(cfg.env);
  const PlannerMode mode = planner_mode(agent);

  TransitionDataset data(spec.state_dim, spec.action_dim);
  std::vector<EpisodeRecord> records;
  for (int e = 0; e < cfg.target_episodes; ++e) {
    const auto start = std::chrono::steady_clock::now();
    try {
      const ParticleEnsemble ens = fit_ensemble(cfg, priors, data, seed, e);
      const EnsembleModel model(ens);
      Rng planner_rng = child_rng(seed, "planner", static_cast<std::uint64_t>(e));
      Rng ds_rng = child_rng(seed, "ds-sampling", static_cast<std::uint64_t>(e));
      MpcResult mpc = mpc_rollout(task, model, reward, cfg.planner, cfg.target_horizon, mode,
                                  planner_rng, rest_down_state(cfg.env), &ds_rng);
      data.append(mpc.transitions);

      EpisodeRecord rec;
      rec.episode = e + 1;
      rec.ret = mpc.ret;
      rec.dataset_size = data.size();
      rec.mean_epistemic_std = mpc.epistemic_std.mean();
      if (hooks.measure_wall_time) {
        rec.wall_time_s =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      }
      if (hooks.planning_log) {
        char line[256];
        for (const StepLog& s : mpc.log) {
          std::snprintf(line, sizeof line, "%d,%d,%d,%.9g,%.9g,%.9g\n", rec.episode, s.step,
                        s.iterations, s.best_return, s.elite_mean, s.elite_std);
          *hooks.planning_log << line;
        }
        hooks.planning_log->flush();
      }
      records.push_back(rec);
      if (hooks.on_episode) hooks.on_episode(rec);
    } catch (const DivergenceError& err) {
      throw DivergenceError(to_string(agent) + " seed " + std::to_string(seed) + " episode " +
                            std::to_string(e + 1) + ": " + err.what());
    }
  }
  return records;
}

namespace {

std::vector<TransitionDataset> datasets_of(const std::vector<DatasetFile>& files) {
  std::vector<TransitionDataset> out;
  for (const DatasetFile& f : files) out.push_back(f.data);
  return out;
}

}  // namespace

std::vector<EpisodeRecord> run_pacoh_rl(const ExperimentConfig& cfg, std::uint64_t seed,
                                        const RunHooks& hooks) {
  return run_baseline(cfg, Agent::kPacohRl, seed, hooks);
}

std::vector<EpisodeRecord> run_baseline(const ExperimentConfig& cfg, Agent agent,
                                        std::uint64_t seed, const RunHooks& hooks) {
  if (uses_meta_priors(agent)) {
    const PriorSet priors = meta_train(cfg, datasets_of(generate_meta_data(cfg, seed)), seed);
    return run_agent(cfg, agent, priors, seed, hooks);
  }
  return run_agent(cfg, agent, default_prior_set(cfg.architecture(), cfg.meta.n_priors), seed,
                   hooks);
}

// ---------------------------------------------------------------------------
// Results

namespace {

std::string fmt_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

template <typename T>
T parse_number(const std::string& s, const std::filesystem::path& path, int line) {
  T value{};
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw IoError(path.string() + ":" + std::to_string(line) + ": bad number '" + s + "'");
  }
  return value;
}

std::ofstream open_for_write(const std::filesystem::path& path) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  return out;
}

std::vector<std::vector<std::string>> read_table(const std::filesystem::path& path,
                                                 const std::string& header, std::size_t width) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  std::string line;
  if (!std::getline(in, line) || line != header) {
    throw IoError(path.string() + ": expected header '" + header + "'");
  }
  std::vector<std::vector<std::string>> rows;
  int n = 1;
  while (std::getline(in, line)) {
    ++n;
    if (line.empty()) continue;
    auto cells = split_csv(line);
    if (cells.size() != width) {
      throw IoError(path.string() + ":" + std::to_string(n) + ": expected " +
                    std::to_string(width) + " columns");
    }
    rows.push_back(std::move(cells));
  }
  return rows;
}

}  // namespace

std::string records_csv_header() {
  return "episode,return,dataset_size,mean_epistemic_std,wall_time_s";
}

std::string format_record(const EpisodeRecord& r) {
  return std::to_string(r.episode) + "," + fmt_double(r.ret) + "," +
         std::to_string(r.dataset_size) + "," + fmt_double(r.mean_epistemic_std) + "," +
         fmt_double(r.wall_time_s);
}

void write_records_csv(const std::filesystem::path& path, const std::vector<EpisodeRecord>& records) {
  std::ofstream out = open_for_write(path);
  out << records_csv_header() << '\n';
  for (const EpisodeRecord& r : records) out << format_record(r) << '\n';
  if (!out) throw IoError("write failed: " + path.string());
}

std::vector<EpisodeRecord> read_records_csv(const std::filesystem::path& path) {
  std::vector<EpisodeRecord> out;
  int line = 1;
  for (const auto& c : read_table(path, records_csv_header(), 5)) {
    ++line;
    out.push_back({parse_number<int>(c[0], path, line), parse_number<double>(c[1], path, line),
                   parse_number<Index>(c[2], path, line), parse_number<double>(c[3], path, line),
                   parse_number<double>(c[4], path, line)});
  }
  return out;
}

std::vector<SummaryRow> summarize(const std::vector<std::vector<EpisodeRecord>>& per_seed) {
  if (per_seed.empty()) throw PreconditionError("summarize: no record lists");
  const std::size_t n_ep = per_seed.front().size();
  for (const auto& r : per_seed) {
    if (r.size() != n_ep) throw PreconditionError("summarize: seeds have different episode counts");
  }
  std::vector<SummaryRow> rows;
  const double n = static_cast<double>(per_seed.size());
  for (std::size_t e = 0; e < n_ep; ++e) {
    double mean = 0.0;
    for (const auto& r : per_seed) mean += r[e].ret;
    mean /= n;
    double var = 0.0;
    for (const auto& r : per_seed) var += (r[e].ret - mean) * (r[e].ret - mean);
    rows.push_back({per_seed.front()[e].episode, mean, std::sqrt(var / n),
                    static_cast<int>(per_seed.size())});
  }
  return rows;
}

void write_summary_csv(const std::filesystem::path& path, const std::vector<SummaryRow>& rows) {
  std::ofstream out = open_for_write(path);
  out << "episode,mean_return,std_return,n_seeds\n";
  for (const SummaryRow& r : rows) {
    out << r.episode << ',' << fmt_double(r.mean_return) << ',' << fmt_double(r.std_return) << ','
        << r.n_seeds << '\n';
  }
  if (!out) throw IoError("write failed: " + path.string());
}

std::vector<SummaryRow> read_summary_csv(const std::filesystem::path& path) {
  std::vector<SummaryRow> out;
  int line = 1;
  for (const auto& c : read_table(path, "episode,mean_return,std_return,n_seeds", 4)) {
    ++line;
    out.push_back({parse_number<int>(c[0], path, line), parse_number<double>(c[1], path, line),
                   parse_number<double>(c[2], path, line), parse_number<int>(c[3], path, line)});
  }
  return out;
}

void write_learning_curves_svg(const std::filesystem::path& path,
                               const std::map<Agent, std::vector<SummaryRow>>& curves,
                               const std::string& title) {
  constexpr double kW = 760, kH = 460, kLeft = 80, kRight = 190, kTop = 40, kBottom = 50;
  const double pw = kW - kLeft - kRight;
  const double ph = kH - kTop - kBottom;
  double lo = 0.0, hi = 0.0;
  int max_ep = 1;
  bool first = true;
  for (const auto& [agent, rows] : curves) {
    for (const SummaryRow& r : rows) {
      const double a = r.mean_return - r.std_return;
      const double b = r.mean_return + r.std_return;
      lo = first ? a : std::min(lo, a);
      hi = first ? b : std::max(hi, b);
      first = false;
      max_ep = std::max(max_ep, r.episode);
    }
  }
  if (hi - lo < 1e-9) {
    lo -= 1.0;
    hi += 1.0;
  }
  auto px = [&](double ep) { return kLeft + pw * (max_ep > 1 ? (ep - 1) / (max_ep - 1) : 0.5); };
  auto py = [&](double v) { return kTop + ph * (1.0 - (v - lo) / (hi - lo)); };
  const char* colors[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728"};

  std::ofstream out = open_for_write(path);
  char buf[512];
  std::snprintf(buf, sizeof buf,
                "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%g\" height=\"%g\" "
                "font-family=\"sans-serif\" font-size=\"12\">\n",
                kW, kH);
  out << buf << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  std::snprintf(buf, sizeof buf, "<text x=\"%g\" y=\"22\" font-size=\"15\">%s</text>\n", kLeft,
                title.c_str());
  out << buf;
  std::snprintf(buf, sizeof buf,
                "<rect x=\"%g\" y=\"%g\" width=\"%g\" height=\"%g\" fill=\"none\" stroke=\"#444\"/>\n",
                kLeft, kTop, pw, ph);
  out << buf;
  for (int i = 0; i <= 4; ++i) {
    const double v = lo + (hi - lo) * i / 4.0;
    std::snprintf(buf, sizeof buf,
                  "<text x=\"%g\" y=\"%g\" text-anchor=\"end\">%.4g</text>\n"
                  "<line x1=\"%g\" y1=\"%g\" x2=\"%g\" y2=\"%g\" stroke=\"#ddd\"/>\n",
                  kLeft - 6, py(v) + 4, v, kLeft, py(v), kLeft + pw, py(v));
    out << buf;
  }
  for (int ep = 1; ep <= max_ep; ep += std::max(1, max_ep / 5)) {
    std::snprintf(buf, sizeof buf, "<text x=\"%g\" y=\"%g\" text-anchor=\"middle\">%d</text>\n",
                  px(ep), kTop + ph + 18, ep);
    out << buf;
  }
  std::snprintf(buf, sizeof buf,
                "<text x=\"%g\" y=\"%g\" text-anchor=\"middle\">episode</text>\n"
                "<text x=\"18\" y=\"%g\" transform=\"rotate(-90 18 %g)\" "
                "text-anchor=\"middle\">return</text>\n",
                kLeft + pw / 2, kH - 10, kTop + ph / 2, kTop + ph / 2);
  out << buf;

  int idx = 0;
  for (const auto& [agent, rows] : curves) {
    const char* color = colors[idx % 4];
    std::string band, line;
    for (const SummaryRow& r : rows) {
      std::snprintf(buf, sizeof buf, "%.2f,%.2f ", px(r.episode), py(r.mean_return + r.std_return));
      band += buf;
      std::snprintf(buf, sizeof buf, "%.2f,%.2f ", px(r.episode), py(r.mean_return));
      line += buf;
    }
    for (auto it = rows.rbegin(); it != rows.rend(); ++it) {
      std::snprintf(buf, sizeof buf, "%.2f,%.2f ", px(it->episode), py(it->mean_return - it->std_return));
      band += buf;
    }
    out << "<polygon points=\"" << band << "\" fill=\"" << color << "\" fill-opacity=\"0.15\"/>\n";
    out << "<polyline points=\"" << line << "\" fill=\"none\" stroke=\"" << color
        << "\" stroke-width=\"2\"/>\n";
    const double ly = kTop + 10 + 20 * idx;
    std::snprintf(buf, sizeof buf,
                  "<line x1=\"%g\" y1=\"%g\" x2=\"%g\" y2=\"%g\" stroke=\"%s\" stroke-width=\"3\"/>"
                  "<text x=\"%g\" y=\"%g\">%s</text>\n",
                  kLeft + pw + 14, ly, kLeft + pw + 38, ly, color, kLeft + pw + 44, ly + 4,
                  to_string(agent).c_str());
    out << buf;
    ++idx;
  }
  out << "</svg>\n";
  if (!out) throw IoError("write failed: " + path.string());
}

void emit_results(const std::filesystem::path& out, const GridResults& results,
                  const std::string& title) {
  std::map<Agent, std::vector<SummaryRow>> curves;
  for (const auto& [agent, by_seed] : results) {
    if (by_seed.empty()) continue;
    std::vector<std::vector<EpisodeRecord>> lists;
    for (const auto& [seed, recs] : by_seed) lists.push_back(recs);
    curves[agent] = summarize(lists);
    write_summary_csv(out / "summary" / (to_string(agent) + ".csv"), curves[agent]);
  }
  if (curves.empty()) throw PreconditionError("emit_results: no records");
  write_learning_curves_svg(out / "learning_curves.svg", curves, title);
}

std::filesystem::path records_path(const std::filesystem::path& out, Agent agent, std::uint64_t seed) {
  return out / to_string(agent) / ("seed_" + std::to_string(seed) + ".csv");
}

std::filesystem::path planning_log_path(const std::filesystem::path& out, Agent agent,
                                        std::uint64_t seed) {
  return out / to_string(agent) / ("seed_" + std::to_string(seed) + ".log");
}

std::filesystem::path prior_path(const std::filesystem::path& out, std::uint64_t seed) {
  return out / ("seed_" + std::to_string(seed)) / "priors.json";
}

std::filesystem::path meta_data_dir(const std::filesystem::path& out, std::uint64_t seed) {
  return out / ("seed_" + std::to_string(seed)) / "meta_data";
}

void save_meta_data(const std::filesystem::path& out, std::uint64_t seed,
                    const std::vector<DatasetFile>& files) {
  std::filesystem::create_directories(meta_data_dir(out, seed));
  for (std::size_t i = 0; i < files.size(); ++i) {
    write_dataset(meta_data_dir(out, seed) / ("task_" + std::to_string(i) + ".csv"), files[i]);
  }
}

std::vector<DatasetFile> load_meta_data(const std::filesystem::path& out, std::uint64_t seed,
                                        int n_tasks) {
  std::vector<DatasetFile> files;
  for (int i = 0; i < n_tasks; ++i) {
    const auto path = meta_data_dir(out, seed) / ("task_" + std::to_string(i) + ".csv");
    if (!std::filesystem::exists(path)) throw IoError("missing meta-training dataset " + path.string());
    files.push_back(read_dataset(path));
  }
  return files;
}

PriorSet meta_train_and_save(const ExperimentConfig& cfg, const std::vector<DatasetFile>& files,
                             const std::filesystem::path& out, std::uint64_t seed) {
  std::vector<double> trace;
  PriorSet learned = meta_train(cfg, datasets_of(files), seed, &trace);
  std::filesystem::create_directories(prior_path(out, seed).parent_path());
  save_prior_set(learned, prior_path(out, seed));
  std::ofstream t = open_for_write(prior_path(out, seed).parent_path() / "meta_trace.csv");
  t << "step,mean_log_z\n";
  for (std::size_t i = 0; i < trace.size(); ++i) t << i << ',' << fmt_double(trace[i]) << '\n';
  if (!t) throw IoError("write failed: " + (prior_path(out, seed).parent_path() / "meta_trace.csv").string());
  return learned;
}

GridResults run_grid(const ExperimentConfig& cfg, const std::filesystem::path& out,
                     bool measure_wall_time, std::ostream* progress) {
  cfg.validate();
  std::filesystem::create_directories(out);
  json_io::write_file(out / "config.json", cfg.to_json());
  GridResults results;
  for (std::uint64_t seed : cfg.seeds) {
    const std::vector<DatasetFile> files = generate_meta_data(cfg, seed);
    save_meta_data(out, seed, files);
    const PriorSet learned = meta_train_and_save(cfg, files, out, seed);
    const PriorSet defaults = default_prior_set(cfg.architecture(), cfg.meta.n_priors);
    for (Agent agent : kAllAgents) {
      std::ofstream rec = open_for_write(records_path(out, agent, seed));
      rec << records_csv_header() << '\n' << std::flush;
      std::ofstream log = open_for_write(planning_log_path(out, agent, seed));
      log << "episode,step,iterations,best_return,elite_mean,elite_std\n";
      RunHooks hooks;
      hooks.measure_wall_time = measure_wall_time;
      hooks.planning_log = &log;
      hooks.on_episode = [&](const EpisodeRecord& r) {
        rec << format_record(r) << '\n' << std::flush;
        if (progress) {
          *progress << to_string(agent) << " seed " << seed << " episode " << r.episode
                    << " return " << r.ret << " epistemic_std " << r.mean_epistemic_std << '\n'
                    << std::flush;
        }
      };
      results[agent][seed] =
          run_agent(cfg, agent, uses_meta_priors(agent) ? learned : defaults, seed, hooks);
    }
  }
  emit_results(out, results, to_string(cfg.env) + " (" + to_string(cfg.reward) + ")");
  return results;
}

GridResults collect_results(const std::filesystem::path& out) {
  GridResults results;
  const std::regex name(R"(seed_(\d+)\.csv)");
  for (Agent agent : kAllAgents) {
    const std::filesystem::path dir = out / to_string(agent);
    if (!std::filesystem::is_directory(dir)) continue;
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
      std::smatch m;
      const std::string file = entry.path().filename().string();
      if (!std::regex_match(file, m, name)) continue;
      results[agent][std::stoull(m[1].str())] = read_records_csv(entry.path());
    }
  }
  if (results.empty()) throw IoError("no records found under " + out.string());
  std::string title = "learning curves";
  const auto cfg_path = out / "config.json";
  if (std::filesystem::exists(cfg_path)) {
    const Json j = json_io::read_file(cfg_path);
    title = j.value("env", std::string("?")) + " (" + j.value("reward", std::string("?")) + ")";
  }
  emit_results(out, results, title);
  return results;
}

}  // namespace pacoh
