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

#include "pacoh/envs.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "pacoh/errors.hpp"

namespace pacoh {
namespace {

constexpr double kGravity = 10.0;
constexpr double kPendulumMaxSpeed = 8.0;

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

double clip_unit(double a) { return std::clamp(a, -1.0, 1.0); }

void check_finite(const EnvState& s, int substep) {
  if (!s.allFinite()) {
    throw DivergenceError("env_step: non-finite state at integration substep " +
                          std::to_string(substep));
  }
}

EnvState step_pendulum(const PendulumParams& p, const EnvState& s, double action) {
  const EnvSpec spec = env_spec(EnvId::kPendulum);
  const double h = spec.dt / spec.substeps;
  const double torque = clip_unit(action) * p.max_torque;
  const double inertia = p.mass * p.length * p.length / 3.0;
  double theta = s(0);
  double omega = s(1);
  for (int i = 0; i < spec.substeps; ++i) {
    const double acc = 1.5 * kGravity / p.length * std::sin(theta) +
                       (torque - p.damping * omega) / inertia;
    omega = std::clamp(omega + acc * h, -kPendulumMaxSpeed, kPendulumMaxSpeed);
    theta += omega * h;
  }
  EnvState next(2);
  next << wrap_angle(theta), omega;
  check_finite(next, spec.substeps);
  return next;
}

EnvState step_cartpole(const CartpoleParams& p, const EnvState& s, double action) {
  const EnvSpec spec = env_spec(EnvId::kCartpole);
  const double h = spec.dt / spec.substeps;
  const double force = clip_unit(action) * p.max_force;
  const double total = p.pole_mass + p.cart_mass;
  const double half = 0.5 * p.pole_length;
  double x = s(0), x_dot = s(1), theta = s(2), omega = s(3);
  for (int i = 0; i < spec.substeps; ++i) {
    const double sin_t = std::sin(theta);
    const double cos_t = std::cos(theta);
    const double temp = (force + p.pole_mass * half * omega * omega * sin_t) / total;
    const double theta_acc = (kGravity * sin_t - cos_t * temp) /
                             (half * (4.0 / 3.0 - p.pole_mass * cos_t * cos_t / total));
    const double x_acc = temp - p.pole_mass * half * theta_acc * cos_t / total;
    x_dot += x_acc * h;
    x += x_dot * h;
    omega += theta_acc * h;
    theta += omega * h;
  }
  EnvState next(4);
  next << x, x_dot, wrap_angle(theta), omega;
  check_finite(next, spec.substeps);
  return next;
}

// Cosine of the angle encoded by a (cos, sin) pair that may be off the unit circle.
double unit_cos(double c, double s) {
  const double r = std::hypot(c, s);
  return r > 0.0 ? c / r : 1.0;
}

}  // namespace

std::string to_string(EnvId env) { return env == EnvId::kPendulum ? "pendulum" : "cartpole"; }
std::string to_string(RewardVariant v) { return v == RewardVariant::kDense ? "dense" : "sparse"; }

EnvId env_from_string(const std::string& name) {
  if (name == "pendulum") return EnvId::kPendulum;
  if (name == "cartpole") return EnvId::kCartpole;
  throw ConfigError("unknown environment '" + name + "'");
}

RewardVariant variant_from_string(const std::string& name) {
  if (name == "dense") return RewardVariant::kDense;
  if (name == "sparse") return RewardVariant::kSparse;
  throw ConfigError("unknown reward variant '" + name + "'");
}

EnvId env_of(const TaskParams& params) {
  return std::holds_alternative<PendulumParams>(params) ? EnvId::kPendulum : EnvId::kCartpole;
}

std::string describe(const TaskParams& params) {
  char buf[256];
  std::visit(Overloaded{
                 [&](const PendulumParams& p) {
                   std::snprintf(buf, sizeof buf,
                                 "pendulum mass=%.17g length=%.17g damping=%.17g max_torque=%.17g",
                                 p.mass, p.length, p.damping, p.max_torque);
                 },
                 [&](const CartpoleParams& p) {
                   std::snprintf(buf, sizeof buf,
                                 "cartpole pole_mass=%.17g pole_length=%.17g cart_mass=%.17g "
                                 "max_force=%.17g",
                                 p.pole_mass, p.pole_length, p.cart_mass, p.max_force);
                 }},
             params);
  return buf;
}

EnvSpec env_spec(EnvId env) {
  if (env == EnvId::kPendulum) return EnvSpec{2, 3, 1, 0.05, 10};
  return EnvSpec{4, 5, 1, 0.02, 5};
}

double wrap_angle(double theta) {
  double x = std::fmod(theta + M_PI, 2.0 * M_PI);
  if (x <= 0.0) x += 2.0 * M_PI;
  return x - M_PI;
}

EnvState env_step(const TaskParams& params, const EnvState& state,
                  const Eigen::Ref<const Vector>& action) {
  const EnvSpec spec = env_spec(env_of(params));
  if (state.size() != spec.physical_dim || action.size() != spec.action_dim) {
    throw ShapeError("env_step: state or action has the wrong dimension");
  }
  return std::visit(Overloaded{[&](const PendulumParams& p) { return step_pendulum(p, state, action(0)); },
                               [&](const CartpoleParams& p) { return step_cartpole(p, state, action(0)); }},
                    params);
}

Vector observe(EnvId env, const EnvState& s) {
  Vector obs(env_spec(env).state_dim);
  if (env == EnvId::kPendulum) {
    obs << std::cos(s(0)), std::sin(s(0)), s(1);
  } else {
    obs << s(0), s(1), std::cos(s(2)), std::sin(s(2)), s(3);
  }
  return obs;
}

EnvState state_from_observation(EnvId env, const Eigen::Ref<const Vector>& obs) {
  if (obs.size() != env_spec(env).state_dim) throw ShapeError("observation has wrong dimension");
  EnvState s(env_spec(env).physical_dim);
  if (env == EnvId::kPendulum) {
    s << std::atan2(obs(1), obs(0)), obs(2);
  } else {
    s << obs(0), obs(1), std::atan2(obs(3), obs(2)), obs(4);
  }
  return s;
}

EnvState rest_down_state(EnvId env) {
  EnvState s = EnvState::Zero(env_spec(env).physical_dim);
  s(env == EnvId::kPendulum ? 0 : 2) = M_PI;
  return s;
}

EnvState random_state(EnvId env, Rng& rng) {
  std::uniform_real_distribution<double> angle(-M_PI, M_PI);
  std::uniform_real_distribution<double> small(-1.0, 1.0);
  EnvState s(env_spec(env).physical_dim);
  if (env == EnvId::kPendulum) {
    const double theta = angle(rng);
    s << wrap_angle(theta), small(rng);
  } else {
    const double x = 0.5 * small(rng);
    const double x_dot = 0.5 * small(rng);
    const double theta = angle(rng);
    s << x, x_dot, wrap_angle(theta), small(rng);
  }
  return s;
}

double pendulum_energy(const PendulumParams& p, const EnvState& s) {
  const double inertia = p.mass * p.length * p.length / 3.0;
  return 0.5 * inertia * s(1) * s(1) + 0.5 * p.mass * kGravity * p.length * (1.0 + std::cos(s(0)));
}

double tolerance(double x, const ToleranceSpec& spec) {
  if (x >= spec.lower && x <= spec.upper) return 1.0;
  if (spec.margin <= 0.0) return 0.0;
  const double d = (x < spec.lower ? spec.lower - x : x - spec.upper) / spec.margin;
  return std::exp(std::log(spec.value_at_margin) * d * d);
}

RewardFunction::RewardFunction(EnvId env, RewardVariant variant, double pole_length)
    : env_(env), variant_(variant), pole_length_(pole_length) {}

RewardFunction::RewardFunction(const TaskParams& params, RewardVariant variant)
    : env_(env_of(params)), variant_(variant), pole_length_(1.0) {
  if (const auto* c = std::get_if<CartpoleParams>(&params)) pole_length_ = c->pole_length;
}

double RewardFunction::operator()(const Eigen::Ref<const Vector>& s,
                                  const Eigen::Ref<const Vector>& a) const {
  const double action_sq = a.cwiseMax(-1.0).cwiseMin(1.0).squaredNorm();
  if (env_ == EnvId::kPendulum) {
    const double omega = s(2);
    if (variant_ == RewardVariant::kDense) {
      const double theta = std::atan2(s(1), s(0));
      return -theta * theta - 0.1 * omega * omega - 0.001 * action_sq;
    }
    static const ToleranceSpec kAngle{0.95, 1.0, 0.3, 0.1};
    static const ToleranceSpec kVelocity{-0.5, 0.5, 0.5, 0.1};
    return tolerance(unit_cos(s(0), s(1)), kAngle) + tolerance(omega, kVelocity) -
           0.001 * action_sq;
  }
  const double cos_t = unit_cos(s(2), s(3));
  if (variant_ == RewardVariant::kDense) {
    const double sin_t = std::sin(std::atan2(s(3), s(2)));
    const double l = pole_length_;
    const double dx = s(0) + l * sin_t;
    const double dy = l * cos_t - l;
    return -(dx * dx + dy * dy) / (l * l) - 0.01 * action_sq;
  }
  static const ToleranceSpec kUpright{0.995, 1.0, 0.0, 0.1};
  return tolerance(cos_t, kUpright) - 0.01 * action_sq;
}

Vector RewardFunction::batch(const Eigen::Ref<const Matrix>& states,
                             const Eigen::Ref<const Matrix>& actions) const {
  Vector r(states.rows());
  for (Index i = 0; i < states.rows(); ++i) {
    r(i) = (*this)(states.row(i).transpose(), actions.row(i).transpose());
  }
  return r;
}

std::vector<TaskParams> sample_tasks(EnvId env, int n, std::uint64_t seed) {
  Rng rng = child_rng(seed, "tasks");
  std::vector<TaskParams> tasks;
  if (n <= 0) return tasks;
  auto scaled = [&](double nominal, double lo, double hi) {
    return nominal * std::uniform_real_distribution<double>(lo, hi)(rng);
  };
  for (int i = 0; i < n; ++i) {
    if (env == EnvId::kPendulum) {
      PendulumParams p;
      p.mass = scaled(p.mass, 0.5, 1.5);
      p.length = scaled(p.length, 0.5, 1.5);
      p.damping = std::uniform_real_distribution<double>(0.005, 0.05)(rng);
      tasks.emplace_back(p);
    } else {
      CartpoleParams p;
      p.pole_mass = scaled(p.pole_mass, 0.6, 1.4);
      p.pole_length = scaled(p.pole_length, 0.6, 1.4);
      p.cart_mass = scaled(p.cart_mass, 0.6, 1.4);
      tasks.emplace_back(p);
    }
  }
  return tasks;
}

BehaviorPolicy uniform_random_policy(Index action_dim) {
  return [action_dim](const Eigen::Ref<const Vector>&, Rng& rng) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Vector a(action_dim);
    for (Index i = 0; i < action_dim; ++i) a(i) = u(rng);
    return a;
  };
}

BehaviorPolicy zero_policy(Index action_dim) {
  return [action_dim](const Eigen::Ref<const Vector>&, Rng&) { return Vector::Zero(action_dim); };
}

TransitionDataset collect_meta_dataset(const TaskParams& params, int episodes, int horizon,
                                       const BehaviorPolicy& policy, InitialState init,
                                       Rng& rng) {
  if (episodes < 1 || horizon < 1) {
    throw PreconditionError("collect_meta_dataset: episodes and horizon must be >= 1");
  }
  const EnvId env = env_of(params);
  const EnvSpec spec = env_spec(env);
  TransitionDataset data(spec.state_dim, spec.action_dim);
  for (int e = 0; e < episodes; ++e) {
    EnvState s = init == InitialState::kRestDown ? rest_down_state(env) : random_state(env, rng);
    Vector obs = observe(env, s);
    for (int t = 0; t < horizon; ++t) {
      const Vector a = policy(obs, rng).cwiseMax(-1.0).cwiseMin(1.0);
      s = env_step(params, s, a);
      Vector next_obs = observe(env, s);
      data.add(obs, a, next_obs);
      obs = std::move(next_obs);
    }
  }
  return data;
}

namespace {

constexpr const char* kDatasetFormat = "pacoh-transitions v1";

TaskParams parse_task(const std::string& text) {
  std::istringstream in(text);
  std::string name;
  in >> name;
  std::map<std::string, double> kv;
  std::string token;
  while (in >> token) {
    const auto eq = token.find('=');
    if (eq == std::string::npos) throw ConfigError("dataset header: malformed task field '" + token + "'");
    kv[token.substr(0, eq)] = std::stod(token.substr(eq + 1));
  }
  auto get = [&](const char* key) {
    const auto it = kv.find(key);
    if (it == kv.end()) throw ConfigError(std::string("dataset header: missing task field ") + key);
    return it->second;
  };
  if (env_from_string(name) == EnvId::kPendulum) {
    return PendulumParams{get("mass"), get("length"), get("damping"), get("max_torque")};
  }
  return CartpoleParams{get("pole_mass"), get("pole_length"), get("cart_mass"), get("max_force")};
}

}  // namespace

void write_dataset(const std::filesystem::path& path, const DatasetFile& file) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  const TransitionDataset& d = file.data;
  out << "# format: " << kDatasetFormat << '\n'
      << "# env: " << to_string(env_of(file.params)) << '\n'
      << "# d_s: " << d.state_dim() << '\n'
      << "# d_a: " << d.action_dim() << '\n'
      << "# task: " << describe(file.params) << '\n'
      << "# seed: " << file.seed << '\n';
  for (Index i = 0; i < d.state_dim(); ++i) out << (i ? "," : "") << "s" << i;
  for (Index i = 0; i < d.action_dim(); ++i) out << ",a" << i;
  for (Index i = 0; i < d.state_dim(); ++i) out << ",sp" << i;
  out << '\n';
  const auto rows = d.rows();
  char buf[32];
  for (Index r = 0; r < rows.rows(); ++r) {
    for (Index c = 0; c < rows.cols(); ++c) {
      std::snprintf(buf, sizeof buf, "%.17g", rows(r, c));
      out << (c ? "," : "") << buf;
    }
    out << '\n';
  }
  if (!out) throw IoError("write failed: " + path.string());
}

DatasetFile read_dataset(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::map<std::string, std::string> header;
  std::string line;
  while (in.peek() == '#' && std::getline(in, line)) {
    const auto colon = line.find(':');
    if (colon == std::string::npos) continue;
    std::string key = line.substr(2, colon - 2);
    std::string value = line.substr(colon + 1);
    value.erase(0, value.find_first_not_of(' '));
    header[key] = value;
  }
  for (const char* key : {"format", "d_s", "d_a", "task", "seed"}) {
    if (!header.count(key)) throw ConfigError(path.string() + ": missing header field " + key);
  }
  if (header["format"] != kDatasetFormat) throw ConfigError(path.string() + ": unknown format");
  const Index ds = std::stoll(header["d_s"]);
  const Index da = std::stoll(header["d_a"]);
  DatasetFile file{TransitionDataset(ds, da), parse_task(header["task"]),
                   std::stoull(header["seed"])};
  std::getline(in, line);  // column names
  const Index width = 2 * ds + da;
  Vector row(width);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream fields(line);
    std::string cell;
    Index c = 0;
    while (std::getline(fields, cell, ',')) {
      if (c >= width) throw ConfigError(path.string() + ": too many columns");
      row(c++) = std::stod(cell);
    }
    if (c != width) throw ConfigError(path.string() + ": too few columns");
    file.data.add(row.head(ds), row.segment(ds, da), row.tail(ds));
  }
  return file;
}

}  // namespace pacoh
