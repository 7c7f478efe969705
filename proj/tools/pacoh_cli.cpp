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


// Command-line driver: data collection, meta-training, single cells, the full
// comparison grid, reporting and the property self-test.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "pacoh/checks.hpp"
#include "pacoh/harness.hpp"

namespace fs = std::filesystem;
using namespace pacoh;

namespace {

constexpr int kUsageError = 2;

struct Options {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string profile;
  std::string out = "runs";
  std::string agent;
  std::string priors;
  bool wall_time = false;
};

ExperimentConfig load_config(const Options& o) {
  std::optional<std::string> profile;
  if (!o.profile.empty()) profile = o.profile;
  ExperimentConfig cfg;
  if (!o.config.empty()) {
    cfg = ExperimentConfig::load(o.config, profile);
  } else {
    cfg = ExperimentConfig::from_json(nlohmann::json::object(), profile);
  }
  if (o.seed) cfg.seeds = {*o.seed};
  if (!o.agent.empty()) cfg.agent = agent_from_string(o.agent);
  if (!o.priors.empty()) cfg.prior_file = o.priors;
  return cfg;
}

int cmd_collect(const Options& o) {
  const ExperimentConfig cfg = load_config(o);
  for (std::uint64_t seed : cfg.seeds) {
    save_meta_data(o.out, seed, generate_meta_data(cfg, seed));
    std::cout << "wrote " << cfg.meta_data.tasks << " datasets to " << meta_data_dir(o.out, seed).string()
              << '\n';
  }
  return 0;
}

int cmd_meta_train(const Options& o) {
  const ExperimentConfig cfg = load_config(o);
  for (std::uint64_t seed : cfg.seeds) {
    const auto files = load_meta_data(o.out, seed, cfg.meta_data.tasks);
    meta_train_and_save(cfg, files, o.out, seed);
    std::cout << "wrote " << prior_path(o.out, seed).string() << '\n';
  }
  return 0;
}

int cmd_run(const Options& o) {
  const ExperimentConfig cfg = load_config(o);
  const Agent agent = cfg.agent;
  for (std::uint64_t seed : cfg.seeds) {
    PriorSet priors = default_prior_set(cfg.architecture(), cfg.meta.n_priors);
    if (uses_meta_priors(agent)) {
      const fs::path file = cfg.prior_file.empty() ? prior_path(o.out, seed) : fs::path(cfg.prior_file);
      if (!fs::exists(file)) {
        throw ConfigError("missing prior file " + file.string() +
                          " (run meta-train first or pass --priors)");
      }
      priors = load_prior_set(file);
    }
    fs::create_directories(records_path(o.out, agent, seed).parent_path());
    std::ofstream rec(records_path(o.out, agent, seed));
    std::ofstream log(planning_log_path(o.out, agent, seed));
    if (!rec || !log) throw IoError("cannot write under " + o.out);
    rec << records_csv_header() << '\n' << std::flush;
    log << "episode,step,iterations,best_return,elite_mean,elite_std\n";
    RunHooks hooks;
    hooks.measure_wall_time = o.wall_time;
    hooks.planning_log = &log;
    hooks.on_episode = [&](const EpisodeRecord& r) {
      rec << format_record(r) << '\n' << std::flush;
      std::cerr << to_string(agent) << " seed " << seed << " episode " << r.episode << " return "
                << r.ret << '\n';
    };
    run_agent(cfg, agent, priors, seed, hooks);
    std::cout << "wrote " << records_path(o.out, agent, seed).string() << '\n';
  }
  return 0;
}

int cmd_grid(const Options& o) {
  const ExperimentConfig cfg = load_config(o);
  run_grid(cfg, o.out, o.wall_time, &std::cerr);
  std::cout << "wrote results under " << o.out << '\n';
  return 0;
}

int cmd_report(const Options& o) {
  const GridResults results = collect_results(o.out);
  std::printf("%-16s %8s %14s %14s\n", "agent", "seeds", "mean_return", "final_return");
  for (const auto& [agent, per_seed] : results) {
    std::vector<std::vector<EpisodeRecord>> runs;
    for (const auto& [seed, records] : per_seed) runs.push_back(records);
    const auto rows = summarize(runs);
    double total = 0.0;
    for (const SummaryRow& r : rows) total += r.mean_return;
    std::printf("%-16s %8zu %14.2f %14.2f\n", to_string(agent).c_str(), runs.size(),
                rows.empty() ? 0.0 : total / static_cast<double>(rows.size()),
                rows.empty() ? 0.0 : rows.back().mean_return);
  }
  std::cout << "wrote " << (fs::path(o.out) / "summary").string() << " and "
            << (fs::path(o.out) / "learning_curves.svg").string() << '\n';
  return 0;
}

int cmd_selftest(const Options& o) {
  bool ok = true;
  for (const checks::CheckResult& r : checks::run_all(o.seed.value_or(0))) {
    std::printf("[%s] %-26s %6.1fs  %s\n", r.passed ? "PASS" : "FAIL", r.name.c_str(), r.seconds,
                r.detail.c_str());
    ok = ok && r.passed;
  }
  return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Meta-learned model-based reinforcement learning experiments"};
  app.require_subcommand(1);
  Options o;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--config", o.config, "JSON experiment configuration");
    sub->add_option("--seed", o.seed, "Run this seed only");
    sub->add_option("--profile", o.profile, "Default profile")->check(CLI::IsMember({"paper", "desk"}));
    sub->add_option("--out", o.out, "Output directory")->capture_default_str();
  };
  auto* collect = app.add_subcommand("collect", "Generate meta-training datasets");
  auto* meta = app.add_subcommand("meta-train", "Meta-learn priors from collected datasets");
  auto* run = app.add_subcommand("run", "Run one agent");
  auto* grid = app.add_subcommand("grid", "Collect, meta-train and run all four agents");
  auto* report = app.add_subcommand("report", "Summarize records under --out");
  auto* selftest = app.add_subcommand("selftest", "Run the oracle property checks");
  for (auto* sub : {collect, meta, run, grid, report, selftest}) common(sub);
  run->add_option("--agent", o.agent, "pacoh-rl, pacoh-rl-greedy, h-ucrl or pets-ds");
  run->add_option("--priors", o.priors, "Prior file for meta agents");
  for (auto* sub : {run, grid}) sub->add_flag("--wall-time", o.wall_time, "Record wall-clock time per episode");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsageError;
  }

  try {
    if (*collect) return cmd_collect(o);
    if (*meta) return cmd_meta_train(o);
    if (*run) return cmd_run(o);
    if (*grid) return cmd_grid(o);
    if (*report) return cmd_report(o);
    return cmd_selftest(o);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n\n" << app.help();
    return kUsageError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
