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
#include "nclil/martingale.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <string>

#include "nclil/error.hpp"
#include "nclil/simd/kernels.hpp"

namespace nclil {

double iterlog(double x) {
  if (!(x > 0.0)) throw DomainError("L(x) requires x > 0");
  // ln ln x <= 1 exactly when x <= e^e; this also covers x <= 1 where ln ln x is undefined.
  static const double kEE = std::exp(std::numbers::e);
  if (x <= kEE) return 1.0;
  return std::max(1.0, std::log(std::log(x)));
}

double normalizer(double s2) { return s2 > 0.0 ? std::sqrt(iterlog(s2)) : 1.0; }

std::size_t PathSummary::clamped_steps() const noexcept {
  return static_cast<std::size_t>(std::count(u.begin(), u.end(), 1.0));
}

void PathSummary::fill_normalizers() {
  u.resize(s2.size());
  for (std::size_t i = 0; i < s2.size(); ++i) u[i] = normalizer(s2[i]);
}

namespace {

// ||a|| for positive a, short-circuiting when a is a multiple of the identity.
double psd_norm(const Operator& a) {
  const Complex t = normalized_trace(a);
  const Index n = a.dim();
  const double spread = (a.matrix() - t * Matrix::Identity(n, n)).norm();
  if (spread <= 1e-13 * (1.0 + std::abs(t)) * std::sqrt(static_cast<double>(n))) return std::abs(t.real());
  return std::max(std::abs(max_eigenvalue(a)), std::abs(min_eigenvalue(a)));
}

// Operator norm, using the Frobenius norm as a free upper bound when it is already negligible.
double small_norm(const Operator& a, double negligible) {
  const double f = a.matrix().norm();
  if (f <= negligible) return f;
  return operator_norm(a);
}

}  // namespace

PathSummary bracket_norms(const AlgebraModel& model, std::span<const Operator> d) {
  PathSummary s;
  if (d.empty()) return s;
  Operator acc = Operator::zero(d.front().dim());
  for (std::size_t i = 0; i < d.size(); ++i) {
    const Operator sq((d[i] * d[i]).matrix(), true);
    acc = acc + conditional_expectation(model, sq, static_cast<int>(i));
    s.s2.push_back(psd_norm(acc));
    s.dnorm.push_back(operator_norm(d[i]));
  }
  // keep s2 monotone against rounding in the eigensolver
  for (std::size_t i = 1; i < s.s2.size(); ++i) s.s2[i] = std::max(s.s2[i], s.s2[i - 1]);
  s.fill_normalizers();
  return s;
}

PathSummary bracket_norms(const AlgebraModel& model, std::span<const DiagonalOperator> d) {
  PathSummary s;
  if (d.empty()) return s;
  auto acc = DiagonalOperator::zero(d.front().size());
  for (std::size_t i = 0; i < d.size(); ++i) {
    acc = acc + conditional_expectation(model, d[i] * d[i], static_cast<int>(i));
    s.s2.push_back(operator_norm(acc));
    s.dnorm.push_back(operator_norm(d[i]));
  }
  for (std::size_t i = 1; i < s.s2.size(); ++i) s.s2[i] = std::max(s.s2[i], s.s2[i - 1]);
  s.fill_normalizers();
  return s;
}

namespace {

void check_horizon(const AlgebraModel& model, std::size_t n) {
  if (n > static_cast<std::size_t>(model.depth()))
    throw DomainError("horizon " + std::to_string(n) + " exceeds the model depth " + std::to_string(model.depth()));
}

double dense_md_residual(const AlgebraModel& model, const std::vector<Operator>& d) {
  double worst = 0.0;
  for (std::size_t k = 1; k <= d.size(); ++k) {
    const Operator& dk = d[k - 1];
    if (!dk.hermitian()) throw DomainError("martingale difference d_" + std::to_string(k) + " is not hermitian");
    if (dk.dim() != static_cast<Index>(model.dimension())) throw DimensionError("difference has the wrong dimension");
    const Operator fixed = conditional_expectation(model, dk, static_cast<int>(k));
    const double scale = 1.0 + dk.matrix().cwiseAbs().maxCoeff();
    if ((fixed.matrix() - dk.matrix()).cwiseAbs().maxCoeff() > 1e-9 * scale)
      throw DomainError("d_" + std::to_string(k) + " is not measurable with respect to N_" + std::to_string(k));
    worst = std::max(worst, small_norm(conditional_expectation(model, dk, static_cast<int>(k) - 1), 1e-12));
  }
  return worst;
}

}  // namespace

MartingalePath assemble_path(const AlgebraModel& model, std::vector<Operator> d) {
  check_horizon(model, d.size());
  MartingalePath path{model, std::move(d), {}, {}, 0.0};
  path.md_residual = dense_md_residual(model, path.differences);
  if (path.md_residual > kMartingaleTol)
    throw DomainError("not a martingale: ||E_{k-1}(d_k)|| = " + std::to_string(path.md_residual));
  const auto dim = static_cast<Index>(model.dimension());
  path.partials.push_back(Operator::zero(dim));
  for (const auto& dk : path.differences) path.partials.push_back(path.partials.back() + dk);
  path.summary = bracket_norms(model, path.differences);
  return path;
}

CellPath assemble_path(const AlgebraModel& model, std::vector<DiagonalOperator> d) {
  check_horizon(model, d.size());
  if (model.kind() != ModelKind::diagonal) throw DimensionError("vector paths need the diagonal model");
  CellPath path{model, std::move(d), {}, {}, 0.0};
  for (std::size_t k = 1; k <= path.differences.size(); ++k) {
    const auto& dk = path.differences[k - 1];
    if (dk.size() != model.dimension()) throw DimensionError("difference has the wrong size");
    const auto fixed = conditional_expectation(model, dk, static_cast<int>(k));
    if (operator_norm(fixed - dk) > 1e-9 * (1.0 + operator_norm(dk)))
      throw DomainError("d_" + std::to_string(k) + " is not measurable with respect to N_" + std::to_string(k));
    path.md_residual = std::max(path.md_residual, operator_norm(conditional_expectation(model, dk, static_cast<int>(k) - 1)));
  }
  if (path.md_residual > kMartingaleTol)
    throw DomainError("not a martingale: ||E_{k-1}(d_k)|| = " + std::to_string(path.md_residual));
  path.partials.push_back(DiagonalOperator::zero(model.dimension()));
  for (const auto& dk : path.differences) path.partials.push_back(path.partials.back() + dk);
  path.summary = bracket_norms(model, path.differences);
  return path;
}

StoppingIndices stopping_indices(std::span<const double> s2, double eta, int count) {
  if (!(eta > 1.0 && eta < 2.0)) throw DomainError("stopping rule needs eta in (1, 2)");
  for (std::size_t i = 1; i < s2.size(); ++i)
    if (s2[i] < s2[i - 1]) throw DomainError("bracket sequence must be nondecreasing");
  auto s2_at = [&](std::size_t j) { return j == 0 ? 0.0 : s2[j - 1]; };

  StoppingIndices out;
  out.k.push_back(0);
  std::size_t j = 0;
  for (int n = 1; n <= count; ++n) {
    const double level = std::pow(eta, 2.0 * n);
    while (j + 1 <= s2.size() && s2_at(j + 1) < level) ++j;
    if (j + 1 > s2.size()) {
      out.truncated = true;
      out.truncated_at = n;
      break;
    }
    out.k.push_back(j);
  }
  return out;
}

GrowthProfile growth_profile(const PathSummary& summary, std::optional<std::span<const double>> target) {
  GrowthProfile g;
  const std::size_t N = summary.horizon();
  g.alpha.resize(N);
  for (std::size_t i = 0; i < N; ++i) {
    const double s = std::sqrt(summary.s2[i]);
    if (s > 0.0) {
      g.alpha[i] = summary.dnorm[i] * summary.u[i] / s;
    } else {
      g.alpha[i] = std::numeric_limits<double>::quiet_NaN();
      ++g.undefined;
    }
    if (target && i < target->size() && !std::isnan(g.alpha[i]) && g.alpha[i] > (*target)[i] * (1.0 + 1e-12))
      g.within_target = false;
  }
  // slope of ln alpha vs ln n over n in [N/10, N]
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  std::size_t cnt = 0;
  for (std::size_t n = std::max<std::size_t>(1, N / 10); n <= N; ++n) {
    const double a = g.alpha[n - 1];
    if (!(a > 0.0) || std::isnan(a)) continue;
    const double x = std::log(static_cast<double>(n));
    const double y = std::log(a);
    sx += x; sy += y; sxx += x * x; sxy += x * y;
    ++cnt;
  }
  const double den = static_cast<double>(cnt) * sxx - sx * sx;
  g.tail_slope = cnt >= 2 && den > 0.0 ? (static_cast<double>(cnt) * sxy - sx * sy) / den
                                        : std::numeric_limits<double>::quiet_NaN();
  return g;
}

double default_alpha(std::size_t n, double c) { return c / std::log(static_cast<double>(n) + 2.0); }

double BoundSpec::bound(std::size_t n, double s2_prev) const {
  switch (kind) {
    case Kind::constant: return value;
    case Kind::list:
      if (n == 0 || n > list.size()) throw DomainError("bound list shorter than the horizon");
      return list[n - 1];
    case Kind::growth:
      if (n == 1 || s2_prev <= 0.0) return initial;
      return default_alpha(n, value) * std::sqrt(s2_prev) / normalizer(s2_prev);
  }
  return value;
}

namespace {

Matrix random_traceless_hermitian(Index m, CounterRng& rng) {
  std::normal_distribution<double> nd;
  Matrix g(m, m);
  for (Index i = 0; i < m; ++i)
    for (Index j = 0; j < m; ++j) g(i, j) = Complex(nd(rng), nd(rng));
  Matrix h = 0.5 * (g + g.adjoint());
  h -= (h.trace() / static_cast<double>(m)) * Matrix::Identity(m, m);
  return h;
}

Operator scaled_to_norm(const Matrix& a, double target) {
  const Operator op(a, true);
  const double nrm = operator_norm(op);
  if (nrm == 0.0 || target == 0.0) return Operator::zero(a.rows());
  return op * (target / nrm);
}

Matrix haar_unitary(Index n, CounterRng& rng) {
  std::normal_distribution<double> nd;
  Matrix g(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j) g(i, j) = Complex(nd(rng), nd(rng)) / std::sqrt(2.0);
  Eigen::HouseholderQR<Matrix> qr(g);
  Matrix q = qr.householderQ();
  const Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Index j = 0; j < n; ++j) {
    const Complex d = r(j, j);
    const double ad = std::abs(d);
    if (ad > 0.0) q.col(j) *= d / ad;
  }
  return q;
}

Operator random_symmetry(Index dim, CounterRng& rng) {
  std::bernoulli_distribution coin(0.5);
  if (dim == 1) return Operator::identity(1) * (coin(rng) ? 1.0 : -1.0);
  const Matrix u = haar_unitary(dim, rng);
  Eigen::VectorXcd signs(dim);
  for (Index i = 0; i < dim; ++i) signs(i) = coin(rng) ? 1.0 : -1.0;
  return Operator(u * signs.asDiagonal() * u.adjoint(), true);
}

}  // namespace

TensorPlan plan_tensor_martingale(const AlgebraModel& model, const TensorGenSpec& spec, std::uint64_t seed) {
  if (model.kind() != ModelKind::tensor) throw DomainError("tensor generator needs the tensor model");
  const auto m = static_cast<Index>(model.site_dim());
  if (spec.site_matrix) {
    const Operator& a = *spec.site_matrix;
    if (a.dim() != m || !a.hermitian()) throw DomainError("site matrix must be hermitian of size m");
    if (std::abs(normalized_trace(a)) > 1e-12) throw DomainError("site matrix must be traceless");
  }
  TensorPlan plan{model, spec, seed, {}, {}};
  const CounterRng base(seed, 0, "tensor-site");
  double s2 = 0.0;
  for (int k = 1; k <= model.depth(); ++k) {
    const double bound = spec.bounds.bound(static_cast<std::size_t>(k), s2);
    if (!(bound >= 0.0)) throw DomainError("difference bound must be nonnegative");
    CounterRng rng = base.substream(static_cast<std::uint64_t>(k));
    const Matrix shape = spec.site_matrix ? spec.site_matrix->matrix() : random_traceless_hermitian(m, rng);
    Operator a = scaled_to_norm(shape, bound);
    // E_{k-1}(d_k^2) = w^2 tau(a_k^2) = tau(a_k^2) 1
    s2 += real_trace(Operator((a * a).matrix(), true));
    plan.summary.s2.push_back(s2);
    plan.summary.dnorm.push_back(operator_norm(a));
    plan.site.push_back(std::move(a));
  }
  plan.summary.fill_normalizers();
  return plan;
}

MartingalePath materialize(const TensorPlan& plan) {
  const AlgebraModel& model = plan.model;
  const CounterRng base(plan.seed, 0, "tensor-coupling");
  MartingalePath path{model, {}, {}, plan.summary, 0.0};
  const auto dim = static_cast<Index>(model.dimension());
  for (int k = 1; k <= model.depth(); ++k) {
    const auto left = static_cast<Index>(model.level_size(k - 1));
    const auto right = static_cast<Index>(dim / (left * model.site_dim()));
    CounterRng rng = base.substream(static_cast<std::uint64_t>(k));
    const Operator w = plan.spec.coupling == Coupling::haar ? random_symmetry(left, rng) : Operator::identity(left);
    path.differences.push_back(kron(kron(w, plan.site[static_cast<std::size_t>(k - 1)]), Operator::identity(right)));
  }
  path.md_residual = dense_md_residual(model, path.differences);
  if (path.md_residual > kMartingaleTol)
    throw DomainError("tensor generator produced a non-martingale (residual " + std::to_string(path.md_residual) + ")");
  path.partials.push_back(Operator::zero(dim));
  for (const auto& dk : path.differences) path.partials.push_back(path.partials.back() + dk);
  return path;
}

MartingalePath gen_tensor_martingale(const AlgebraModel& model, const TensorGenSpec& spec, std::uint64_t seed) {
  return materialize(plan_tensor_martingale(model, spec, seed));
}

MartingalePath gen_model_martingale(const AlgebraModel& model, const BoundSpec& bounds, std::uint64_t seed) {
  if (!model.dense()) throw DomainError("gen_model_martingale needs a dense model");
  const CounterRng base(seed, 0, "model-martingale");
  std::vector<Operator> d;
  const auto dim = static_cast<Index>(model.dimension());
  Operator acc = Operator::zero(dim);
  double s2 = 0.0;
  for (int k = 1; k <= model.depth(); ++k) {
    CounterRng rng = base.substream(static_cast<std::uint64_t>(k));
    const Operator h = random_hermitian(model, k, rng);
    const Operator c = h - conditional_expectation(model, h, k - 1);
    const double nrm = operator_norm(c);
    const double target = bounds.bound(static_cast<std::size_t>(k), s2);
    Operator dk = nrm > 0.0 ? c * (target / nrm) : Operator::zero(dim);
    acc = acc + conditional_expectation(model, Operator((dk * dk).matrix(), true), k - 1);
    s2 = psd_norm(acc);
    d.push_back(std::move(dk));
  }
  return assemble_path(model, std::move(d));
}

CellPath gen_cell_martingale(const AlgebraModel& model, const BoundSpec& bounds, CellLaw law, std::uint64_t seed) {
  if (model.kind() != ModelKind::diagonal) throw DomainError("gen_cell_martingale needs the diagonal model");
  const CounterRng base(seed, 0, "cell-martingale");
  const std::size_t N = model.dimension();
  const auto m = static_cast<std::size_t>(model.site_dim());
  std::vector<DiagonalOperator> d;
  auto acc = DiagonalOperator::zero(N);
  double s2 = 0.0;
  for (int k = 1; k <= model.depth(); ++k) {
    const double target = bounds.bound(static_cast<std::size_t>(k), s2);
    std::vector<double> v(N, 0.0);
    if (law == CellLaw::rademacher) {
      const std::size_t stride = N / model.level_size(k);
      const double half = 0.5 * static_cast<double>(m - 1);
      if (half > 0.0)
        for (std::size_t w = 0; w < N; ++w) {
          const double digit = static_cast<double>((w / stride) % m);
          v[w] = target * (digit - half) / half;
        }
    } else {
      CounterRng rng = base.substream(static_cast<std::uint64_t>(k));
      const auto h = random_diagonal(model, k, rng);
      const auto c = h - conditional_expectation(model, h, k - 1);
      const double nrm = operator_norm(c);
      if (nrm > 0.0)
        for (std::size_t w = 0; w < N; ++w) v[w] = c[w] * (target / nrm);
    }
    DiagonalOperator dk(std::move(v));
    acc = acc + conditional_expectation(model, dk * dk, k - 1);
    s2 = operator_norm(acc);
    d.push_back(std::move(dk));
  }
  return assemble_path(model, std::move(d));
}

DiagonalPath::DiagonalPath(const DiagonalGenSpec& spec, std::uint64_t seed)
    : spec_(spec), key_(CounterRng(seed, 0, "diagonal-path").key()) {
  if (spec_.horizon < 1) throw DomainError("diagonal martingale needs horizon >= 1");
  if (spec_.paths < 2 || spec_.paths % 2 != 0) throw DomainError("path count must be even and >= 2");
  if (spec_.variance.size() > 1 && spec_.variance.size() != spec_.horizon)
    throw DomainError("variance profile must have 0, 1 or horizon entries");
  for (double v : spec_.variance)
    if (!(v >= 0.0)) throw DomainError("variances must be nonnegative");

  const double bound_factor = spec_.law == IncrementLaw::uniform ? std::sqrt(3.0) : 1.0;
  double s2 = 0.0;
  summary_.s2.reserve(spec_.horizon);
  summary_.dnorm.reserve(spec_.horizon);
  for (std::size_t n = 1; n <= spec_.horizon; ++n) {
    const double v = variance(n);
    s2 += v;
    summary_.s2.push_back(s2);
    summary_.dnorm.push_back(bound_factor * std::sqrt(v));
  }
  summary_.fill_normalizers();
}

double DiagonalPath::variance(std::size_t n) const {
  if (spec_.variance.empty()) return 1.0;
  if (spec_.variance.size() == 1) return spec_.variance.front();
  return spec_.variance.at(n - 1);
}

void DiagonalPath::advance(std::size_t n, std::span<double> x) const {
  if (x.size() != spec_.paths) throw DimensionError("state vector must have one entry per path");
  if (n < 1 || n > spec_.horizon) throw DomainError("step outside the horizon");
  const std::size_t half = spec_.paths / 2;
  const double sigma = std::sqrt(variance(n));
  const auto& k = simd::active();
  const CounterRng rng(key_);
  switch (spec_.law) {
    case IncrementLaw::rademacher: {
      const std::size_t words = (half + 63) / 64;
      std::vector<std::uint64_t> bits(words), flipped(words);
      for (std::size_t w = 0; w < words; ++w) {
        bits[w] = rng.at(n * words + w);
        flipped[w] = ~bits[w];
      }
      k.rademacher_add(x.data(), bits.data(), sigma, half);
      k.rademacher_add(x.data() + half, flipped.data(), sigma, half);
      break;
    }
    case IncrementLaw::uniform: {
      std::vector<double> d(half);
      const double a = sigma * std::sqrt(3.0);
      for (std::size_t i = 0; i < half; ++i) d[i] = a * (2.0 * to_unit(rng.at(n * half + i)) - 1.0);
      k.add(x.data(), d.data(), half);
      k.axpy(-1.0, d.data(), x.data() + half, half);
      break;
    }
    case IncrementLaw::alternating: {
      const double s = n % 2 == 1 ? sigma : -sigma;
      for (std::size_t i = 0; i < half; ++i) x[i] += s;
      for (std::size_t i = half; i < spec_.paths; ++i) x[i] -= s;
      break;
    }
  }
}

DiagonalOperator DiagonalPath::difference(std::size_t n) const {
  std::vector<double> x(spec_.paths, 0.0);
  advance(n, x);
  return DiagonalOperator(std::move(x));
}

DiagonalOperator DiagonalPath::partial_sum(std::size_t n) const {
  std::vector<double> x(spec_.paths, 0.0);
  for (std::size_t i = 1; i <= n; ++i) advance(i, x);
  return DiagonalOperator(std::move(x));
}

DiagonalPath gen_diagonal_martingale(const DiagonalGenSpec& spec, std::uint64_t seed) {
  return DiagonalPath(spec, seed);
}

}  // namespace nclil
