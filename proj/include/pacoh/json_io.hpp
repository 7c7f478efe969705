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

#ifndef PACOH_JSON_IO_HPP_
#define PACOH_JSON_IO_HPP_

#include <filesystem>

#include <json.hpp>

#include "pacoh/inference.hpp"
#include "pacoh/nn.hpp"
#include "pacoh/types.hpp"

namespace pacoh::json_io {

using Json = nlohmann::json;

Json to_json(const Vector& v);
Vector vector_from_json(const Json& j);

Json to_json(const MLPArchitecture& arch);
MLPArchitecture architecture_from_json(const Json& j);

Json to_json(const Normalizer& n);
Normalizer normalizer_from_json(const Json& j);

// Checks the container's "format" tag and "version" field.
void expect_container(const Json& j, const std::string& format, int version);

Json read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, const Json& j);

}  // namespace pacoh::json_io

#endif  // PACOH_JSON_IO_HPP_
