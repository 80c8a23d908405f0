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

// Multiplication operators on a finite sample space with the uniform trace:
// the commutative fast path of the operator core. Values are real, so every
// element is hermitian; products commute.

#include <span>
#include <vector>

#include "nclil/operator.hpp"

namespace nclil {

class DiagonalOperator {
 public:
  DiagonalOperator() = default;
  explicit DiagonalOperator(std::vector<double> values);

  static DiagonalOperator constant(std::size_t n, double c);
  static DiagonalOperator identity(std::size_t n) { return constant(n, 1.0); }
  static DiagonalOperator zero(std::size_t n) { return constant(n, 0.0); }

  std::size_t size() const noexcept { return v_.size(); }
  std::span<const double> values() const noexcept { return v_; }
  std::span<double> values_mut() noexcept { return v_; }
  double operator[](std::size_t i) const { return v_[i]; }

  DiagonalOperator operator+(const DiagonalOperator& o) const;
  DiagonalOperator operator-(const DiagonalOperator& o) const;
  DiagonalOperator operator*(const DiagonalOperator& o) const;
  DiagonalOperator operator*(double s) const;
  friend DiagonalOperator operator*(double s, const DiagonalOperator& x) { return x * s; }
  DiagonalOperator gram() const { return *this * *this; }

  /// Dense embedding; only for small sizes (tests, cross-checks).
  Operator to_operator() const;

 private:
  std::vector<double> v_;
};

double normalized_trace(const DiagonalOperator& x);
double lp_norm(const DiagonalOperator& x, double p);
double operator_norm(const DiagonalOperator& x);
double min_eigenvalue(const DiagonalOperator& x);
DiagonalOperator apply_function(const DiagonalOperator& x, const RealFunction& f);
/// Indicator of (lo, hi] applied to the values; the result is a projection.
DiagonalOperator spectral_projection(const DiagonalOperator& x, const Interval& iv);
double singular_number(const DiagonalOperator& x, double t);
/// |values| sorted descending.
std::vector<double> singular_values(const DiagonalOperator& x);

}  // namespace nclil
