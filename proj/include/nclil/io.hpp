// Copyright 2026 The nclil Authors

// Licensed under the Apache License, Version 2.0 (the License);
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at

// http://www.apache.org/licenses/LICENSE-2.0

// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an AS IS BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
#pragma once

// JSON and CSV surfaces: operators, model descriptors, report tables.

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "nclil/filtration.hpp"
#include "nclil/operator.hpp"

namespace nclil::io {

using Json = nlohmann::ordered_json;

/// {dim, re: row-major array, im: row-major array, hermitian}
Json to_json(const Operator& x);
Operator operator_from_json(const Json& j);

/// {kind, m, n}
Json to_json(const AlgebraModel& model);
AlgebraModel model_from_json(const Json& j, std::size_t dense_cap = kDefaultDenseCap);

/// Minimal CSV writer: a header row, then rows of already-formatted cells.
class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header);
  CsvWriter& cell(const std::string& s);
  CsvWriter& cell(double v);
  CsvWriter& cell(long long v);
  CsvWriter& cell(int v) { return cell(static_cast<long long>(v)); }
  CsvWriter& cell(std::size_t v) { return cell(static_cast<long long>(v)); }
  CsvWriter& cell(bool v) { return cell(std::string(v ? "true" : "false")); }
  void end_row();

 private:
  std::ofstream out_;
  std::size_t columns_;
  std::size_t in_row_ = 0;
};

/// Shortest round-trip decimal representation.
std::string format_double(double v);

void write_json(const std::filesystem::path& path, const Json& j);
Json read_json(const std::filesystem::path& path);

}  // namespace nclil::io
