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

#include "pacoh/json_io.hpp"

#include <fstream>
#include <vector>

#include "pacoh/errors.hpp"

namespace pacoh::json_io {

Json to_json(const Vector& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

Vector vector_from_json(const Json& j) {
  const auto values = j.get<std::vector<double>>();
  return Eigen::Map<const Vector>(values.data(), static_cast<Index>(values.size()));
}

Json to_json(const MLPArchitecture& arch) {
  return Json{{"input_dim", arch.input_dim()},
              {"output_dim", arch.output_dim()},
              {"hidden_sizes", arch.hidden_sizes()},
              {"activation", to_string(arch.activation())}};
}

MLPArchitecture architecture_from_json(const Json& j) {
  return MLPArchitecture(j.at("input_dim").get<Index>(), j.at("output_dim").get<Index>(),
                         j.at("hidden_sizes").get<std::vector<Index>>(),
                         activation_from_string(j.at("activation").get<std::string>()));
}

Json to_json(const Normalizer& n) {
  return Json{{"x_mean", to_json(n.x_mean)},
              {"x_std", to_json(n.x_std)},
              {"y_mean", to_json(n.y_mean)},
              {"y_std", to_json(n.y_std)}};
}

Normalizer normalizer_from_json(const Json& j) {
  Normalizer n{vector_from_json(j.at("x_mean")), vector_from_json(j.at("x_std")),
               vector_from_json(j.at("y_mean")), vector_from_json(j.at("y_std"))};
  if ((n.x_std.array() <= 0.0).any() || (n.y_std.array() <= 0.0).any()) {
    throw ConfigError("normalizer: std entries must be strictly positive");
  }
  return n;
}

void expect_container(const Json& j, const std::string& format, int version) {
  if (!j.is_object() || j.value("format", "") != format) {
    throw ConfigError("expected a '" + format + "' container");
  }
  if (j.value("version", -1) != version) {
    throw ConfigError("unsupported '" + format + "' version");
  }
}

Json read_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  try {
    return Json::parse(in);
  } catch (const Json::exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

void write_file(const std::filesystem::path& path, const Json& j) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << j.dump(1) << '\n';
  if (!out) throw IoError("write failed: " + path.string());
}

}  // namespace pacoh::json_io
