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
#include "nclil/tail.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "nclil/error.hpp"
#include "nclil/simd/kernels.hpp"

namespace nclil {

namespace {

constexpr double kRel = 1e-12;

void check_exp_params(const ExpIneqParams& q) {
  if (!(q.M > 0.0)) throw DomainError("M must be positive");
  if (!(q.D2 > 0.0)) throw DomainError("D^2 must be positive");
  if (!(q.eps > 0.0 && q.eps <= 1.0)) throw DomainError("eps must lie in (0, 1]");
  if (!(q.lambda >= 0.0)) throw PreconditionError("lambda", "lambda must be nonnegative");
  if (q.lambda > q.lambda_max() * (1.0 + kRel))
    throw PreconditionError("lambda", "lambda = " + std::to_string(q.lambda) + " exceeds sqrt(eps)/(M(1+eps)) = " +
                                          std::to_string(q.lambda_max()));
}

void check_hypotheses(const PathSummary& s, std::size_t n, double tau_x, double tau_tol, const ExpIneqParams& q) {
  if (n < 1 || n > s.horizon()) throw DomainError("step outside the path");
  if (std::abs(tau_x) > tau_tol)
    throw PreconditionError("i", "tau(x_n) = " + std::to_string(tau_x) + " is not zero");
  for (std::size_t k = 0; k < n; ++k)
    if (s.dnorm[k] > q.M * (1.0 + kRel))
      throw PreconditionError("ii", "||d_" + std::to_string(k + 1) + "|| = " + std::to_string(s.dnorm[k]) + " > M");
  if (s.s2[n - 1] > q.D2 * (1.0 + kRel))
    throw PreconditionError("iii", "bracket norm " + std::to_string(s.s2[n - 1]) + " exceeds D^2");
}

ExpMomentSides sides(std::span<const double> spectrum, const ExpIneqParams& q) {
  ExpMomentSides r;
  r.log_lhs = log_trace_exp(spectrum, q.lambda);
  r.log_rhs = (1.0 + q.eps) * q.lambda * q.lambda * q.D2;
  r.lhs = std::exp(r.log_lhs);
  r.rhs = std::exp(r.log_rhs);
  r.holds = r.log_lhs <= r.log_rhs + std::log1p(1e-10);
  return r;
}

}  // namespace

double ExpIneqParams::lambda_max() const { return std::sqrt(eps) / (M * (1.0 + eps)); }

double log_trace_exp(std::span<const double> spectrum, double lambda) {
  if (spectrum.empty()) throw DomainError("empty spectrum");
  double top = -kInf;
  for (double v : spectrum) top = std::max(top, lambda * v);
  double acc = 0.0;
  for (double v : spectrum) acc += std::exp(lambda * v - top);
  return top + std::log(acc) - std::log(static_cast<double>(spectrum.size()));
}

ExpMomentSides exp_moment_sides(const MartingalePath& path, std::size_t n, const ExpIneqParams& params) {
  check_exp_params(params);
  if (n < 1 || n > path.horizon()) throw DomainError("step outside the path");
  const Operator& x = path.partials[n];
  check_hypotheses(path.summary, n, normalized_trace(x).real(), 1e-9, params);
  const RealVector ev = eigenvalues(x);
  return sides(std::span<const double>(ev.data(), static_cast<std::size_t>(ev.size())), params);
}

ExpMomentSides exp_moment_sides(const CellPath& path, std::size_t n, const ExpIneqParams& params) {
  check_exp_params(params);
  if (n < 1 || n > path.horizon()) throw DomainError("step outside the path");
  const auto& x = path.partials[n];
  check_hypotheses(path.summary, n, normalized_trace(x), 1e-9, params);
  return sides(x.values(), params);
}

ExpMomentSides exp_moment_sides(const DiagonalPath& path, std::size_t n, std::span<const double> x,
                                const ExpIneqParams& params) {
  check_exp_params(params);
  if (x.size() != path.paths()) throw DimensionError("state vector must have one entry per path");
  const double scale = std::max(1.0, simd::max_abs(x));
  check_hypotheses(path.summary(), n, simd::sum(x) / static_cast<double>(x.size()), 1e-9 * scale, params);
  return sides(x, params);
}

// ---- column maximal norm ----------------------------------------------------------

namespace {

// a += (c_i - a)_+ for each constraint in order; each step fixes constraint i
// and, adding a positive operator, keeps the earlier ones.
Operator repair(Operator a, const std::vector<Operator>& grams, const std::vector<double>& scales) {
  for (std::size_t i = 0; i < grams.size(); ++i) {
    const auto dec = spectral_decomposition(grams[i] - a);
    if (dec.eigenvalues(dec.eigenvalues.size() - 1) > 1e-14 * scales[i])
      a = a + apply_function(dec, [](double v) { return v > 0.0 ? v : 0.0; });
  }
  return a;
}

std::vector<const Operator*> distinct(std::span<const Operator> xs) {
  std::vector<const Operator*> out;
  for (const auto& x : xs) {
    const bool dup = std::any_of(out.begin(), out.end(), [&](const Operator* y) { return y->matrix() == x.matrix(); });
    if (!dup) out.push_back(&x);
  }
  return out;
}

}  // namespace

double dominator_slack(std::span<const Operator> xs, const Operator& b) {
  const Operator b2((b * b).matrix(), true);
  double slack = kInf;
  for (const auto& x : xs) slack = std::min(slack, min_eigenvalue(b2 - x.gram()));
  return slack;
}

ColumnNormBounds column_maximal_norm_bounds(std::span<const Operator> xs, double p, ColumnNormOptions opt) {
  if (xs.empty()) throw DomainError("column norm of an empty family");
  if (!(p >= 2.0)) throw DomainError("column maximal norm needs p >= 2");
  const Index dim = xs.front().dim();
  for (const auto& x : xs)
    if (x.dim() != dim) throw DimensionError("family members differ in dimension");

  const auto uniq = distinct(xs);
  std::vector<Operator> grams;
  std::vector<double> scales;
  ColumnNormBounds r;
  for (const Operator* x : uniq) {
    grams.push_back(x->gram());
    scales.push_back(1.0 + operator_norm(grams.back()));
    r.lower = std::max(r.lower, lp_norm(*x, p));
  }
  const double q = 0.5 * p;
  Operator a = Operator::zero(dim);
  for (const auto& c : grams) a = a + c;
  double best = lp_norm(a, q);

  if (best > 0.0) {
    const Operator greedy = repair(Operator::zero(dim), grams, scales);
    const double g = lp_norm(greedy, q);
    if (g < best) {
      a = greedy;
      best = g;
    }
    double theta = 0.5;
    while (r.iterations < opt.max_iterations) {
      ++r.iterations;
      Operator cand = repair(a * theta, grams, scales);
      const double nc = lp_norm(cand, q);
      if (nc < best) {
        const double rel = (best - nc) / best;
        a = std::move(cand);
        best = nc;
        if (rel < opt.rel_tol) break;
      } else {
        theta = 0.5 * (1.0 + theta);
        if (1.0 - theta < opt.rel_tol) break;
      }
    }
  }
  Operator b = apply_function(a, [](double v) { return v > 0.0 ? std::sqrt(v) : 0.0; });
  // certify; the repair construction is feasible up to rounding
  const double slack = dominator_slack(xs, b);
  if (slack < -kFeasibilityTol) throw Error("column norm certificate lost feasibility");
  r.upper = std::sqrt(best);
  r.upper = std::max(r.upper, lp_norm(b, p));
  r.certificate = std::move(b);
  r.lower = std::min(r.lower, r.upper);
  return r;
}

CellColumnNorm column_maximal_norm_bounds(std::span<const DiagonalOperator> xs, double p) {
  if (xs.empty()) throw DomainError("column norm of an empty family");
  if (!(p >= 2.0)) throw DomainError("column maximal norm needs p >= 2");
  const std::size_t n = xs.front().size();
  std::vector<double> b(n, 0.0);
  CellColumnNorm r;
  for (const auto& x : xs) {
    if (x.size() != n) throw DimensionError("family members differ in size");
    for (std::size_t j = 0; j < n; ++j) b[j] = std::max(b[j], std::abs(x[j]));
    r.lower = std::max(r.lower, lp_norm(x, p));
  }
  r.certificate = DiagonalOperator(std::move(b));
  r.upper = lp_norm(r.certificate, p);
  r.lower = std::min(r.lower, r.upper);
  return r;
}

// ---- Doob -------------------------------------------------------------------------

const char* to_string(DoobStatus s) noexcept {
  switch (s) {
    case DoobStatus::holds: return "holds";
    case DoobStatus::inconclusive: return "inconclusive-certificate";
    case DoobStatus::violated: return "violated";
  }
  return "?";
}

namespace {

void check_doob_range(std::size_t m, std::size_t n, std::size_t horizon, double p, double md) {
  if (!(p >= 4.0)) throw DomainError("the Doob consequence needs p >= 4");
  if (m > n || n > horizon) throw DomainError("index range must satisfy 0 <= m <= n <= horizon");
  if (md > kMartingaleTol) throw DomainError("input is not a martingale");
}

DoobStatus classify(double lower, double upper, double rhs) {
  if (lower > rhs + kDoobTol) return DoobStatus::violated;
  if (upper <= rhs + kDoobTol) return DoobStatus::holds;
  return DoobStatus::inconclusive;
}

}  // namespace

DoobResult doob_consequence_check(const MartingalePath& path, std::size_t m, std::size_t n, double p,
                                  ColumnNormOptions opt) {
  check_doob_range(m, n, path.horizon(), p, path.md_residual);
  const auto fam = std::span<const Operator>(path.partials).subspan(m, n - m + 1);
  const auto b = column_maximal_norm_bounds(fam, p, opt);
  DoobResult r;
  r.lower = b.lower;
  r.upper = b.upper;
  r.xn_norm = lp_norm(path.partials[n], p);
  r.rhs = std::pow(2.0, 2.0 / p) * r.xn_norm;
  r.status = classify(r.lower, r.upper, r.rhs);
  return r;
}

DoobResult doob_consequence_check(const CellPath& path, std::size_t m, std::size_t n, double p) {
  check_doob_range(m, n, path.horizon(), p, path.md_residual);
  const auto fam = std::span<const DiagonalOperator>(path.partials).subspan(m, n - m + 1);
  const auto b = column_maximal_norm_bounds(fam, p);
  DoobResult r;
  r.lower = b.lower;
  r.upper = b.upper;
  r.xn_norm = lp_norm(path.partials[n], p);
  r.rhs = std::pow(2.0, 2.0 / p) * r.xn_norm;
  r.status = classify(r.lower, r.upper, r.rhs);
  return r;
}

DualDoobResult dual_doob_check(const AlgebraModel& model, std::span<const Operator> a, double p,
                               std::span<const int> levels) {
  if (!(p >= 1.0 && p <= 2.0)) throw DomainError("dual Doob check needs p in [1, 2]");
  if (a.empty()) throw DomainError("empty family");
  if (!levels.empty() && levels.size() != a.size()) throw DomainError("one level per term required");
  const auto dim = static_cast<Index>(model.dimension());
  Operator lhs = Operator::zero(dim);
  Operator sum = Operator::zero(dim);
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].dim() != dim) throw DimensionError("term has the wrong dimension");
    if (!a[i].hermitian() || min_eigenvalue(a[i]) < -1e-10 * (1.0 + operator_norm(a[i])))
      throw PreconditionError("positivity", "term " + std::to_string(i + 1) + " is not positive");
    const int k = levels.empty() ? static_cast<int>(i) : levels[i];
    if (k < 0 || k > model.depth()) throw DomainError("level outside the filtration");
    lhs = lhs + conditional_expectation(model, a[i], k);
    sum = sum + a[i];
  }
  DualDoobResult r;
  r.lhs = lp_norm(lhs, p);
  r.rhs = std::pow(2.0, 2.0 * (p - 1.0) / p) * lp_norm(sum, p);
  r.holds = r.lhs <= r.rhs + kDoobTol;
  return r;
}

// ---- Prob_c and Chebyshev -----------------------------------------------------------

ProbcResult probc_upper(std::span<const Operator> xs, double t, const Operator& dominator) {
  if (!(t > 0.0)) throw DomainError("threshold must be positive");
  if (!dominator.hermitian() || min_eigenvalue(dominator) < -kFeasibilityTol)
    throw PreconditionError("dominator", "dominator must be a positive operator");
  for (const auto& x : xs)
    if (x.dim() != dominator.dim()) throw DimensionError("dominator dimension mismatch");
  if (dominator_slack(xs, dominator) < -kFeasibilityTol)
    throw PreconditionError("dominator", "x_i* x_i <= b^2 fails");
  ProbcResult r{0.0, spectral_projection(dominator, Interval{-kInf, t}), t, 0.0};
  r.s = std::clamp(1.0 - r.e.trace(), 0.0, 1.0);
  for (const auto& x : xs) r.witness = std::max(r.witness, operator_norm(x * r.e.op()));
  return r;
}

CellProbcResult probc_upper(std::span<const DiagonalOperator> xs, double t, const DiagonalOperator& dominator) {
  if (!(t > 0.0)) throw DomainError("threshold must be positive");
  const std::size_t n = dominator.size();
  for (std::size_t j = 0; j < n; ++j)
    if (dominator[j] < -kFeasibilityTol) throw PreconditionError("dominator", "dominator must be positive");
  for (const auto& x : xs) {
    if (x.size() != n) throw DimensionError("dominator size mismatch");
    for (std::size_t j = 0; j < n; ++j)
      if (x[j] * x[j] > dominator[j] * dominator[j] + kFeasibilityTol)
        throw PreconditionError("dominator", "x_i* x_i <= b^2 fails");
  }
  std::vector<double> e(n);
  std::size_t cut = 0;
  for (std::size_t j = 0; j < n; ++j) {
    e[j] = dominator[j] <= t ? 1.0 : 0.0;
    cut += e[j] == 0.0;
  }
  CellProbcResult r{static_cast<double>(cut) / static_cast<double>(n), DiagonalOperator(std::move(e)), t, 0.0};
  for (const auto& x : xs)
    for (std::size_t j = 0; j < n; ++j)
      if (r.e[j] != 0.0) r.witness = std::max(r.witness, std::abs(x[j]));
  return r;
}

CellProbcResult probc_exact(std::span<const DiagonalOperator> xs, double t) {
  if (xs.empty()) throw DomainError("empty family");
  std::vector<double> b(xs.front().size(), 0.0);
  for (const auto& x : xs) {
    if (x.size() != b.size()) throw DimensionError("family members differ in size");
    for (std::size_t j = 0; j < b.size(); ++j) b[j] = std::max(b[j], std::abs(x[j]));
  }
  return probc_upper(xs, t, DiagonalOperator(std::move(b)));
}

namespace {

double chebyshev_rhs(double upper, double t, double p) {
  if (!(p >= 1.0)) throw DomainError("Chebyshev needs p >= 1");
  if (!(t > 0.0)) throw DomainError("threshold must be positive");
  return upper > 0.0 ? std::exp(p * (std::log(upper) - std::log(t))) : 0.0;
}

}  // namespace

ChebyshevResult chebyshev_bound(std::span<const Operator> xs, double t, double p, const ColumnNormBounds& bounds) {
  ChebyshevResult r;
  r.rhs = chebyshev_rhs(bounds.upper, t, p);
  r.probc_s = probc_upper(xs, t, bounds.certificate).s;
  r.holds = r.probc_s <= r.rhs + 1e-8;
  return r;
}

ChebyshevResult chebyshev_bound(std::span<const DiagonalOperator> xs, double t, double p, const CellColumnNorm& bounds) {
  ChebyshevResult r;
  r.rhs = chebyshev_rhs(bounds.upper, t, p);
  r.probc_s = probc_upper(xs, t, bounds.certificate).s;
  r.holds = r.probc_s <= r.rhs + 1e-8;
  return r;
}

// ---- scalar helper and block bounds -----------------------------------------------------

ScalarIneq scalar_power_exp_bound(double u, double p) {
  if (!(p >= 1.0)) throw DomainError("scalar inequality needs p >= 1");
  const double a = std::abs(u);
  ScalarIneq r;
  r.log_lhs = a > 0.0 ? p * std::log(a) : -kInf;
  r.log_rhs = p * std::log(p) - p + a + std::log1p(std::exp(-2.0 * a));
  r.lhs = std::pow(a, p);
  r.rhs = std::exp(r.log_rhs);
  r.holds = r.log_lhs <= r.log_rhs + kRel * std::max(1.0, std::abs(r.log_rhs));
  return r;
}

double BlockParams::exponent() const {
  return beta * beta * (1.0 + delta) * (1.0 + delta) / (4.0 * (1.0 + eps));
}

void BlockParams::validate() const {
  if (!(eta > 1.0 && eta < 2.0)) throw DomainError("eta must lie in (1, 2)");
  if (!(delta > 0.0)) throw DomainError("delta must be positive");
  if (!(eps > 0.0 && eps <= 1.0)) throw DomainError("eps must lie in (0, 1]");
  if (!(beta > 0.0)) throw DomainError("beta must be positive");
}

BlockBound block_tail_bound(int n, const BlockParams& q, std::optional<double> s2, std::optional<double> alpha) {
  q.validate();
  if (n < 1) throw DomainError("block index must be >= 1");
  const double c = q.exponent();
  const double base = 2.0 * std::log(q.eta) * static_cast<double>(n);  // ln eta^{2n}
  BlockBound r;
  r.n = n;
  if (s2) {
    if (!(*s2 > 0.0)) throw DomainError("s^2 must be positive");
    r.u2 = iterlog(*s2);
    r.bound_log = std::log(*s2) > 0.0 ? std::pow(std::log(*s2), -c) : kInf;
  } else {
    r.u2 = std::max(1.0, std::log(base));
    r.bound_log = std::pow(base, -c);
  }
  const double b1 = q.beta * (1.0 + q.delta);
  r.lambda = b1 * r.u2 / (2.0 * (1.0 + q.eps));
  r.p = r.lambda * b1;
  r.bound_exact = 8.0 * std::exp((1.0 + q.eps) * r.lambda * r.lambda / r.u2 - b1 * r.lambda);
  r.bound_final = std::pow(base, -c);
  r.p_at_least_4 = r.p >= 4.0;
  r.alpha_gate = 2.0 * std::sqrt(q.eps) / b1;
  if (alpha) r.alpha_ok = *alpha <= r.alpha_gate;
  return r;
}

bool block_series_converges(const BlockParams& params) { return params.exponent() > 1.0; }

}  // namespace nclil
