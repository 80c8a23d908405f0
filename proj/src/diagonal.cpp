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
#include "nclil/diagonal.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "nclil/error.hpp"
#include "nclil/simd/kernels.hpp"

namespace nclil {

DiagonalOperator::DiagonalOperator(std::vector<double> values) : v_(std::move(values)) {
  if (v_.empty()) throw DimensionError("diagonal operator needs at least one sample point");
}

DiagonalOperator DiagonalOperator::constant(std::size_t n, double c) {
  return DiagonalOperator(std::vector<double>(n, c));
}

namespace {
void require_same_size(const DiagonalOperator& a, const DiagonalOperator& b) {
  if (a.size() != b.size()) throw DimensionError("diagonal operator sizes differ");
}
}  // namespace

DiagonalOperator DiagonalOperator::operator+(const DiagonalOperator& o) const {
  require_same_size(*this, o);
  DiagonalOperator out = *this;
  simd::active().add(out.v_.data(), o.v_.data(), v_.size());
  return out;
}

DiagonalOperator DiagonalOperator::operator-(const DiagonalOperator& o) const {
  require_same_size(*this, o);
  DiagonalOperator out = *this;
  simd::active().axpy(-1.0, o.v_.data(), out.v_.data(), v_.size());
  return out;
}

DiagonalOperator DiagonalOperator::operator*(const DiagonalOperator& o) const {
  require_same_size(*this, o);
  DiagonalOperator out = *this;
  for (std::size_t i = 0; i < v_.size(); ++i) out.v_[i] *= o.v_[i];
  return out;
}

DiagonalOperator DiagonalOperator::operator*(double s) const {
  DiagonalOperator out = *this;
  for (double& v : out.v_) v *= s;
  return out;
}

Operator DiagonalOperator::to_operator() const { return Operator::diagonal(v_); }

double normalized_trace(const DiagonalOperator& x) {
  return simd::sum(x.values()) / static_cast<double>(x.size());
}

double lp_norm(const DiagonalOperator& x, double p) {
  if (!(p >= 1.0)) throw DomainError("L_p norm requires p >= 1");
  const double top = simd::max_abs(x.values());
  if (std::isinf(p) || top == 0.0) return top;
  const auto& k = simd::active();
  double acc = 0.0;
  if (p == 2.0) {
    acc = k.dot(x.values().data(), x.values().data(), x.size()) / (top * top);
  } else {
    for (double v : x.values()) acc += std::pow(std::abs(v) / top, p);
  }
  return top * std::pow(acc / static_cast<double>(x.size()), 1.0 / p);
}

double operator_norm(const DiagonalOperator& x) { return simd::max_abs(x.values()); }

double min_eigenvalue(const DiagonalOperator& x) {
  return *std::min_element(x.values().begin(), x.values().end());
}

DiagonalOperator apply_function(const DiagonalOperator& x, const RealFunction& f) {
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    out[i] = f(x[i]);
    if (!std::isfinite(out[i]))
      throw DomainError("function undefined at eigenvalue " + std::to_string(x[i]));
  }
  return DiagonalOperator(std::move(out));
}

DiagonalOperator spectral_projection(const DiagonalOperator& x, const Interval& iv) {
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = in_interval(x[i], iv) ? 1.0 : 0.0;
  return DiagonalOperator(std::move(out));
}

std::vector<double> singular_values(const DiagonalOperator& x) {
  std::vector<double> s(x.values().begin(), x.values().end());
  for (double& v : s) v = std::abs(v);
  std::sort(s.begin(), s.end(), std::greater<>());
  return s;
}

double singular_number(const DiagonalOperator& x, double t) {
  const auto s = singular_values(x);
  return singular_number_from_values(s, t);
}

}  // namespace nclil
