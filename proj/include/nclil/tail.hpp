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

// Tail inequalities for self-adjoint martingales: the exponential moment
// bound, the column maximal norm L_p(l_inf^c) and the asymmetric Doob
// consequence, constructive Prob_c and Chebyshev, and the block bounds that
// drive the LIL proof.
//
// Column maximal norm convention: ||(x_i)||_{L_p(l_inf^c)} = inf ||b||_p over
// factorizations x_i = y_i b with ||y_i|| <= 1, i.e. inf ||a||_{p/2}^{1/2}
// over a >= x_i* x_i for all i.

#include <optional>
#include <span>
#include <vector>

#include "nclil/diagonal.hpp"
#include "nclil/martingale.hpp"
#include "nclil/operator.hpp"

namespace nclil {

// ---- exponential moment ------------------------------------------------------

struct ExpIneqParams {
  double M = 1.0;       // ||d_k|| <= M
  double D2 = 1.0;      // sum E_{k-1}(d_k^2) <= D2 * 1
  double eps = 1.0;     // (0, 1]
  double lambda = 0.0;  // [0, sqrt(eps)/(M(1+eps))]

  double lambda_max() const;
};

struct ExpMomentSides {
  double lhs = 1.0;      // tau(exp(lambda x_n))
  double rhs = 1.0;      // exp((1+eps) lambda^2 D2)
  double log_lhs = 0.0;
  double log_rhs = 0.0;
  bool holds = true;     // lhs <= rhs (1 + 1e-10), compared in log space
  double margin() const { return log_rhs - log_lhs; }
};

/// Both sides at step n (1-based). Hypothesis violations raise
/// PreconditionError with item "i" (tau(x_n) != 0), "ii" (||d_k|| > M),
/// "iii" (bracket above D2) or "lambda" (outside the admissible range).
ExpMomentSides exp_moment_sides(const MartingalePath& path, std::size_t n, const ExpIneqParams& params);
ExpMomentSides exp_moment_sides(const CellPath& path, std::size_t n, const ExpIneqParams& params);
/// Monte Carlo path with state x = x_n; tau is the empirical average over paths.
ExpMomentSides exp_moment_sides(const DiagonalPath& path, std::size_t n, std::span<const double> x,
                                const ExpIneqParams& params);

/// tau(exp(lambda x)) in log space from the spectrum of x.
double log_trace_exp(std::span<const double> spectrum, double lambda);

// ---- column maximal norm -----------------------------------------------------

struct ColumnNormBounds {
  double lower = 0.0;
  double upper = 0.0;
  Operator certificate = Operator::zero(1);  // |b|, with x_i* x_i <= b^2
  int iterations = 0;
  double gap() const { return upper > 0.0 ? lower / upper : 1.0; }
};

struct CellColumnNorm {
  double lower = 0.0;
  double upper = 0.0;
  DiagonalOperator certificate = DiagonalOperator::zero(1);
  double gap() const { return upper > 0.0 ? lower / upper : 1.0; }
};

struct ColumnNormOptions {
  int max_iterations = 500;
  double rel_tol = 1e-6;
};

/// lower = max_i ||x_i||_p; upper = ||b||_p for a certified dominator b,
/// improved from (sum x_i* x_i)^{1/2} by shrink-and-repair. p >= 2.
ColumnNormBounds column_maximal_norm_bounds(std::span<const Operator> xs, double p, ColumnNormOptions opt = {});
/// Commuting family: the entrywise maximum is optimal, so upper is exact.
CellColumnNorm column_maximal_norm_bounds(std::span<const DiagonalOperator> xs, double p);

/// Smallest eigenvalue of b^2 - x* x over the family (>= -tol means feasible).
double dominator_slack(std::span<const Operator> xs, const Operator& b);

// ---- Doob --------------------------------------------------------------------

enum class DoobStatus { holds, inconclusive, violated };
const char* to_string(DoobStatus s) noexcept;

struct DoobResult {
  double lower = 0.0;
  double upper = 0.0;   // column norm certificate of (x_m..x_n)
  double rhs = 0.0;     // 2^{2/p} ||x_n||_p
  double xn_norm = 0.0;
  DoobStatus status = DoobStatus::holds;
  bool holds() const { return status == DoobStatus::holds; }
  double gap() const { return upper > 0.0 ? lower / upper : 1.0; }
};

inline constexpr double kDoobTol = 1e-8;

/// Checks ||(x_i)_{m<=i<=n}||_{L_p(l_inf^c)} <= 2^{2/p} ||x_n||_p. Requires
/// p >= 4 and 0 <= m <= n <= horizon (DomainError). `violated` only when the
/// lower bound itself exceeds the constant; an upper bound above it is
/// `inconclusive`.
DoobResult doob_consequence_check(const MartingalePath& path, std::size_t m, std::size_t n, double p,
                                  ColumnNormOptions opt = {});
DoobResult doob_consequence_check(const CellPath& path, std::size_t m, std::size_t n, double p);

struct DualDoobResult {
  double lhs = 0.0;  // ||sum_i E_{k_i}(a_i)||_p
  double rhs = 0.0;  // 2^{2(p-1)/p} ||sum_i a_i||_p
  bool holds = true;
};

/// a_i >= 0 paired with E_{levels[i]}; by default levels = 0, 1, ..., n-1.
/// p in [1, 2]. Non-positive input raises PreconditionError("positivity").
DualDoobResult dual_doob_check(const AlgebraModel& model, std::span<const Operator> a, double p,
                               std::span<const int> levels = {});

// ---- Prob_c and Chebyshev -----------------------------------------------------

struct ProbcResult {
  double s = 0.0;      // tau(1 - e)
  Projection e = Projection::identity(1);
  double t = 0.0;
  double witness = 0.0;  // max_i ||x_i e||
};

struct CellProbcResult {
  double s = 0.0;
  DiagonalOperator e;  // 0/1 per sample point
  double t = 0.0;
  double witness = 0.0;
};

inline constexpr double kFeasibilityTol = 1e-8;

/// e = 1_{(-inf, t]}(|b|) for the dominator |b|. Requires x_i* x_i <= b^2 + 1e-8
/// (PreconditionError("dominator") otherwise) and t > 0.
ProbcResult probc_upper(std::span<const Operator> xs, double t, const Operator& dominator);
CellProbcResult probc_upper(std::span<const DiagonalOperator> xs, double t, const DiagonalOperator& dominator);
/// Commuting family with the optimal dominator max_i |x_i|: the fraction of
/// sample points where some |x_i| exceeds t.
CellProbcResult probc_exact(std::span<const DiagonalOperator> xs, double t);

struct ChebyshevResult {
  double probc_s = 0.0;
  double rhs = 0.0;  // t^{-p} upper^p
  bool holds = true;
};

ChebyshevResult chebyshev_bound(std::span<const Operator> xs, double t, double p, const ColumnNormBounds& bounds);
ChebyshevResult chebyshev_bound(std::span<const DiagonalOperator> xs, double t, double p, const CellColumnNorm& bounds);

// ---- scalar helper and block bounds ---------------------------------------------

struct ScalarIneq {
  double lhs = 0.0;  // |u|^p
  double rhs = 0.0;  // p^p e^{-p} (e^u + e^{-u})
  double log_lhs = 0.0;
  double log_rhs = 0.0;
  bool holds = true;
};

ScalarIneq scalar_power_exp_bound(double u, double p);

struct BlockParams {
  double eta = 1.5;
  double delta = 0.1;
  double eps = 0.1;
  double beta = 2.0;

  /// beta^2 (1+delta)^2 / (4(1+eps))
  double exponent() const;
  /// Throws DomainError outside eta in (1,2), delta > 0, eps in (0,1], beta > 0.
  void validate() const;
};

struct BlockBound {
  int n = 0;
  double u2 = 1.0;           // u(k_{n+1})^2 used for lambda
  double lambda = 0.0;       // beta(1+delta) u^2 / (2(1+eps))
  double p = 0.0;            // lambda beta (1+delta)
  double bound_exact = 0.0;  // 8 exp((1+eps) lambda^2/u^2 - beta(1+delta) lambda)
  double bound_log = 0.0;    // (ln s(k_{n+1})^2)^{-c}
  double bound_final = 0.0;  // [(2 ln eta) n]^{-c}
  bool p_at_least_4 = false;
  std::optional<bool> alpha_ok;  // alpha(k_{n+1}) <= 2 sqrt(eps)/(beta(1+delta)), when alpha is given
  double alpha_gate = 0.0;
};

/// Bounds for block n >= 1. With s2 = s(k_{n+1})^2 the realized u^2 = L(s2)
/// is used; without it the lower bound L(eta^{2n}) = max(1, ln(2n ln eta)).
BlockBound block_tail_bound(int n, const BlockParams& params, std::optional<double> s2 = std::nullopt,
                            std::optional<double> alpha = std::nullopt);

/// sum_{n>=1} [(2 ln eta) n]^{-c} converges iff c > 1.
bool block_series_converges(const BlockParams& params);

}  // namespace nclil
