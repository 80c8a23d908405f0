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

// Dense operators on a finite-dimensional Hilbert space equipped with the
// normalized trace tau = Tr / dim, and the spectral calculus built on them.

#include <Eigen/Dense>

#include <complex>
#include <functional>
#include <limits>
#include <span>
#include <vector>

namespace nclil {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using RealVector = Eigen::VectorXd;
using Index = Eigen::Index;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Relative tolerance for the hermitian flag: max |x - x*| <= kHermitianTol (1 + max |x|).
inline constexpr double kHermitianTol = 1e-10;

class Operator {
 public:
  /// Wraps `m`. When `hermitian` is set the matrix is checked against
  /// kHermitianTol and replaced by (m + m*)/2; a failed check throws DomainError.
  explicit Operator(Matrix m, bool hermitian = false);

  static Operator identity(Index dim);
  static Operator zero(Index dim);
  static Operator diagonal(std::span<const double> values);
  /// Hermitian flag is set iff the matrix passes the tolerance check.
  static Operator detect(Matrix m);

  Index dim() const noexcept { return m_.rows(); }
  const Matrix& matrix() const noexcept { return m_; }
  bool hermitian() const noexcept { return hermitian_; }

  Operator adjoint() const;
  /// |x|^2 = x* x, always hermitian.
  Operator gram() const;
  /// (x + x*)/2 flagged hermitian.
  Operator real_part() const;

  Operator operator+(const Operator& o) const;
  Operator operator-(const Operator& o) const;
  Operator operator*(const Operator& o) const;
  Operator operator*(double s) const;
  Operator operator-() const { return *this * -1.0; }
  friend Operator operator*(double s, const Operator& x) { return x * s; }

 private:
  Matrix m_;
  bool hermitian_ = false;
};

/// Tensor (Kronecker) product a (x) b.
Operator kron(const Operator& a, const Operator& b);

/// Max entrywise |x - x*| relative to 1 + max |x|.
double hermitian_defect(const Matrix& m);

struct SpectralDecomposition {
  RealVector eigenvalues;  // ascending
  Matrix eigenvectors;     // unitary, columns are eigenvectors

  Matrix reconstruct() const;
};

/// Requires the hermitian flag (DomainError otherwise).
SpectralDecomposition spectral_decomposition(const Operator& x);
RealVector eigenvalues(const Operator& x);
double min_eigenvalue(const Operator& x);
double max_eigenvalue(const Operator& x);

/// Singular values in descending order (|eigenvalues| for hermitian input).
RealVector singular_values(const Operator& x);

Complex normalized_trace(const Operator& x);
/// Normalized trace of a hermitian operator. Throws DomainError if the
/// imaginary residual is not below 1e-10.
double real_trace(const Operator& x);

/// (tau |x|^p)^{1/p} for p in [1, inf); the operator norm for p = inf.
double lp_norm(const Operator& x, double p);
double lp_norm_from_singular_values(std::span<const double> s, double p);
double operator_norm(const Operator& x);

using RealFunction = std::function<double(double)>;

/// U f(Lambda) U*. Throws DomainError when f is not finite on an eigenvalue.
Operator apply_function(const Operator& x, const RealFunction& f);
Operator apply_function(const SpectralDecomposition& dec, const RealFunction& f);

/// Half-open interval (lo, hi]; either end may be infinite.
struct Interval {
  double lo = -kInf;
  double hi = kInf;
};

/// Membership in (lo, hi] after snapping values within 1e-12 (relative to the
/// endpoint, floored at 1) onto the endpoint.
bool in_interval(double v, const Interval& iv) noexcept;

class Projection {
 public:
  /// Validates p = p* = p^2 via its spectrum (eigenvalues within 1e-8 of {0,1}).
  explicit Projection(Operator p);

  static Projection identity(Index dim);
  static Projection zero(Index dim);

  const Operator& op() const noexcept { return p_; }
  Index dim() const noexcept { return p_.dim(); }
  /// tau(p) in [0, 1]
  double trace() const;
  Projection complement() const;

 private:
  struct Unchecked {};
  Projection(Operator p, Unchecked) : p_(std::move(p)) {}
  friend Projection spectral_projection(const SpectralDecomposition&, const Interval&);
  Operator p_;
};

Projection spectral_projection(const Operator& x, const Interval& iv);
Projection spectral_projection(const SpectralDecomposition& dec, const Interval& iv);

/// Number of entries of `values` lying in (s, inf], with the in_interval
/// endpoint rule. singular_number and spectral_projection share this count.
std::size_t count_above(std::span<const double> values, double s) noexcept;

/// mu_t from singular values sorted descending: inf{s > 0 : #{sigma > s}/n <= t}.
double singular_number_from_values(std::span<const double> sorted_desc, double t);

/// Generalized singular number mu_t(x) for t in (0, 1).
double singular_number(const Operator& x, double t);

struct UniformDistBoundResult {
  bool holds = true;
  /// max over the grid of sup_i mu_t(x_i) - K mu_{t/K}(y)
  double worst_gap = -kInf;
  double worst_t = 0.0;
};

/// Checks sup_i mu_t(x_i) <= K mu_{t/K}(y) on every grid point.
/// Requires K >= 1, grid inside (0, 1/K), nonempty family.
UniformDistBoundResult check_uniform_dist_bound(std::span<const Operator> xs, const Operator& y,
                                                double K, std::span<const double> grid);

}  // namespace nclil
