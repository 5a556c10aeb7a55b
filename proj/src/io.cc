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

#include "mmloco/io.h"

#include <fstream>
#include <sstream>

#include "mmloco/common.h"

namespace mmloco {

Json MakeHeader(std::string_view kind, std::uint64_t config_hash) {
  Json h;
  h["tool"] = std::string(kToolName);
  h["version"] = std::string(kToolVersion);
  h["kind"] = std::string(kind);
  h["config_hash"] = HexDigest(config_hash);
  return h;
}

void CheckHeader(const Json& doc, std::string_view kind) {
  if (!doc.is_object() || !doc.contains("header")) {
    throw InvalidInput("missing file header (expected kind '" +
                       std::string(kind) + "')");
  }
  const Json& h = doc.at("header");
  if (h.value("tool", "") != kToolName) {
    throw InvalidInput("file was not written by " + std::string(kToolName));
  }
  if (h.value("kind", "") != kind) {
    throw InvalidInput("expected a '" + std::string(kind) + "' file, got '" +
                       h.value("kind", "") + "'");
  }
}

std::string CsvHeaderComment(std::string_view kind, std::uint64_t config_hash) {
  std::ostringstream os;
  os << "# " << kToolName << " " << kToolVersion << " kind=" << kind
     << " config_hash=" << HexDigest(config_hash) << "\n";
  return os.str();
}

Json MatrixToJson(const Eigen::MatrixXd& m) {
  Json j;
  j["rows"] = m.rows();
  j["cols"] = m.cols();
  std::vector<double> data;
  data.reserve(static_cast<std::size_t>(m.size()));
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) data.push_back(m(r, c));
  }
  j["data"] = std::move(data);
  return j;
}

Eigen::MatrixXd MatrixFromJson(const Json& j) {
  const auto rows = j.at("rows").get<Eigen::Index>();
  const auto cols = j.at("cols").get<Eigen::Index>();
  const auto data = j.at("data").get<std::vector<double>>();
  if (rows < 0 || cols < 0 ||
      static_cast<std::size_t>(rows * cols) != data.size()) {
    throw InvalidInput("matrix shape header does not match data length");
  }
  Eigen::MatrixXd m(rows, cols);
  std::size_t k = 0;
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = data[k++];
  }
  return m;
}

Json VectorToJson(const Eigen::VectorXd& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

Eigen::VectorXd VectorFromJson(const Json& j) {
  const auto data = j.get<std::vector<double>>();
  return Eigen::Map<const Eigen::VectorXd>(data.data(),
                                           static_cast<Eigen::Index>(data.size()));
}

Eigen::VectorXd VectorFromJson(const Json& j, Eigen::Index expected_size) {
  Eigen::VectorXd v = VectorFromJson(j);
  if (v.size() != expected_size) {
    throw InvalidInput("vector length " + std::to_string(v.size()) +
                       " does not match expected " +
                       std::to_string(expected_size));
  }
  return v;
}

Json ReadJsonFile(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open '" + path.string() + "'");
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw InvalidInput("cannot parse '" + path.string() + "': " + e.what());
  }
}

void WriteJsonFile(const std::filesystem::path& path, const Json& doc) {
  WriteTextFile(path, doc.dump(1) + "\n");
}

void WriteTextFile(const std::filesystem::path& path, std::string_view text) {
  if (path.has_parent_path()) {
    std::filesystem::create_directories(path.parent_path());
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  out << text;
}

}  // namespace mmloco
