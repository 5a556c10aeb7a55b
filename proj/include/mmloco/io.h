// Copyright 2026 The mmloco Authors
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

#ifndef MMLOCO_IO_H_
#define MMLOCO_IO_H_

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>
#include "json.hpp"

namespace mmloco {

using Json = nlohmann::json;

// Every artifact carries {"tool", "version", "kind", "config_hash"}.
Json MakeHeader(std::string_view kind, std::uint64_t config_hash);
// Throws InvalidInput when the header is missing or of another kind.
void CheckHeader(const Json& doc, std::string_view kind);
// One-line CSV comment with the same information.
std::string CsvHeaderComment(std::string_view kind, std::uint64_t config_hash);

// Matrices are stored as {"rows", "cols", "data"} in row-major order.
Json MatrixToJson(const Eigen::MatrixXd& m);
Eigen::MatrixXd MatrixFromJson(const Json& j);
Json VectorToJson(const Eigen::VectorXd& v);
Eigen::VectorXd VectorFromJson(const Json& j);
// Vector with an explicit expected length; throws InvalidInput on mismatch.
Eigen::VectorXd VectorFromJson(const Json& j, Eigen::Index expected_size);

Json ReadJsonFile(const std::filesystem::path& path);
// Writes with a fixed indent and trailing newline so reruns are
// byte-identical.
void WriteJsonFile(const std::filesystem::path& path, const Json& doc);
void WriteTextFile(const std::filesystem::path& path, std::string_view text);

}  // namespace mmloco

#endif  // MMLOCO_IO_H_
