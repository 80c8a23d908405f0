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
#include "nclil/io.hpp"

#include <charconv>
#include <cmath>

#include "nclil/error.hpp"

namespace nclil::io {

Json to_json(const Operator& x) {
  Json re = Json::array();
  Json im = Json::array();
  for (Index i = 0; i < x.dim(); ++i)
    for (Index j = 0; j < x.dim(); ++j) {
      re.push_back(x.matrix()(i, j).real());
      im.push_back(x.matrix()(i, j).imag());
    }
  return Json{{"dim", x.dim()}, {"re", std::move(re)}, {"im", std::move(im)}, {"hermitian", x.hermitian()}};
}

Operator operator_from_json(const Json& j) {
  try {
    const auto dim = j.at("dim").get<Index>();
    if (dim < 1) throw ConfigError("operator dim must be >= 1");
    const auto& re = j.at("re");
    const auto& im = j.at("im");
    const auto n = static_cast<std::size_t>(dim * dim);
    if (re.size() != n || im.size() != n)
      throw ConfigError("operator arrays must hold dim*dim = " + std::to_string(n) + " entries");
    Matrix m(dim, dim);
    for (Index i = 0; i < dim; ++i)
      for (Index c = 0; c < dim; ++c) {
        const auto k = static_cast<std::size_t>(i * dim + c);
        m(i, c) = Complex(re[k].get<double>(), im[k].get<double>());
      }
    return Operator(std::move(m), j.value("hermitian", false));
  } catch (const Json::exception& e) {
    throw ConfigError(std::string("malformed operator JSON: ") + e.what());
  }
}

Json to_json(const AlgebraModel& model) {
  return Json{{"kind", std::string(to_string(model.kind()))}, {"m", model.site_dim()}, {"n", model.depth()}};
}

AlgebraModel model_from_json(const Json& j, std::size_t dense_cap) {
  try {
    return AlgebraModel::make(parse_model_kind(j.at("kind").get<std::string>()), j.at("m").get<int>(),
                              j.at("n").get<int>(), dense_cap);
  } catch (const Json::exception& e) {
    throw ConfigError(std::string("malformed model descriptor: ") + e.what());
  }
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

CsvWriter::CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header)
    : out_(path), columns_(header.size()) {
  if (!out_) throw Error("cannot open " + path.string() + " for writing");
  for (std::size_t i = 0; i < header.size(); ++i) out_ << (i ? "," : "") << header[i];
  out_ << '\n';
}

CsvWriter& CsvWriter::cell(const std::string& s) {
  out_ << (in_row_++ ? "," : "") << s;
  return *this;
}

CsvWriter& CsvWriter::cell(double v) { return cell(format_double(v)); }

CsvWriter& CsvWriter::cell(long long v) { return cell(std::to_string(v)); }

void CsvWriter::end_row() {
  if (in_row_ != columns_) throw Error("CSV row has " + std::to_string(in_row_) + " cells, expected " + std::to_string(columns_));
  out_ << '\n';
  in_row_ = 0;
}

void write_json(const std::filesystem::path& path, const Json& j) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  out << j.dump(2) << '\n';
}

Json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read " + path.string());
  try {
    return Json::parse(in);
  } catch (const Json::exception& e) {
    throw ConfigError("invalid JSON in " + path.string() + ": " + e.what());
  }
}

}  // namespace nclil::io
