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
#include "nclil/operator.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "nclil/error.hpp"

namespace nclil {

double hermitian_defect(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  const double scale = 1.0 + m.cwiseAbs().maxCoeff();
  return (m - m.adjoint()).cwiseAbs().maxCoeff() / scale;
}

Operator::Operator(Matrix m, bool hermitian) : m_(std::move(m)), hermitian_(hermitian) {
  if (m_.rows() < 1 || m_.rows() != m_.cols())
    throw DimensionError("operator must be a square matrix of dimension >= 1");
  if (hermitian_) {
    if (hermitian_defect(m_) > kHermitianTol)
      throw DomainError("matrix flagged hermitian is not self-adjoint");
    Matrix sym = 0.5 * (m_ + m_.adjoint());
    m_ = std::move(sym);
  }
}

Operator Operator::identity(Index dim) { return Operator(Matrix::Identity(dim, dim), true); }

Operator Operator::zero(Index dim) { return Operator(Matrix::Zero(dim, dim), true); }

Operator Operator::diagonal(std::span<const double> values) {
  Matrix m = Matrix::Zero(static_cast<Index>(values.size()), static_cast<Index>(values.size()));
  for (std::size_t i = 0; i < values.size(); ++i) m(static_cast<Index>(i), static_cast<Index>(i)) = values[i];
  return Operator(std::move(m), true);
}

Operator Operator::detect(Matrix m) {
  const bool h = m.rows() == m.cols() && hermitian_defect(m) <= kHermitianTol;
  return Operator(std::move(m), h);
}

Operator Operator::adjoint() const { return Operator(m_.adjoint(), hermitian_); }

Operator Operator::gram() const { return Operator(m_.adjoint() * m_, true); }

Operator Operator::real_part() const {
  Operator out = *this;
  out.m_ = 0.5 * (m_ + m_.adjoint());
  out.hermitian_ = true;
  return out;
}

namespace {
void require_same_dim(const Operator& a, const Operator& b) {
  if (a.dim() != b.dim())
    throw DimensionError("operator dimensions differ: " + std::to_string(a.dim()) + " vs " +
                         std::to_string(b.dim()));
}
}  // namespace

Operator Operator::operator+(const Operator& o) const {
  require_same_dim(*this, o);
  Operator out = *this;
  out.m_ += o.m_;
  out.hermitian_ = hermitian_ && o.hermitian_;
  return out;
}

Operator Operator::operator-(const Operator& o) const {
  require_same_dim(*this, o);
  Operator out = *this;
  out.m_ -= o.m_;
  out.hermitian_ = hermitian_ && o.hermitian_;
  return out;
}

Operator Operator::operator*(const Operator& o) const {
  require_same_dim(*this, o);
  return Operator(m_ * o.m_, false);
}

Operator Operator::operator*(double s) const {
  Operator out = *this;
  out.m_ *= s;
  return out;
}

Operator kron(const Operator& a, const Operator& b) {
  const Index n = a.dim();
  const Index m = b.dim();
  Matrix out(n * m, n * m);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j) out.block(i * m, j * m, m, m) = a.matrix()(i, j) * b.matrix();
  return Operator(std::move(out), a.hermitian() && b.hermitian());
}

Matrix SpectralDecomposition::reconstruct() const {
  return eigenvectors * eigenvalues.cast<Complex>().asDiagonal() * eigenvectors.adjoint();
}

namespace {
void require_hermitian(const Operator& x, const char* what) {
  if (!x.hermitian()) throw DomainError(std::string(what) + " requires a hermitian operator");
}
}  // namespace

SpectralDecomposition spectral_decomposition(const Operator& x) {
  require_hermitian(x, "spectral decomposition");
  Eigen::SelfAdjointEigenSolver<Matrix> solver(x.matrix(), Eigen::ComputeEigenvectors);
  if (solver.info() != Eigen::Success) throw Error("eigendecomposition did not converge");
  return {solver.eigenvalues(), solver.eigenvectors()};
}

RealVector eigenvalues(const Operator& x) {
  require_hermitian(x, "eigenvalues");
  Eigen::SelfAdjointEigenSolver<Matrix> solver(x.matrix(), Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) throw Error("eigendecomposition did not converge");
  return solver.eigenvalues();
}

double min_eigenvalue(const Operator& x) { return eigenvalues(x).minCoeff(); }

double max_eigenvalue(const Operator& x) { return eigenvalues(x).maxCoeff(); }

RealVector singular_values(const Operator& x) {
  RealVector s;
  if (x.hermitian()) {
    s = eigenvalues(x).cwiseAbs();
  } else {
    // sigma_i^2 are the eigenvalues of x* x; an SVD avoids squaring the condition number.
    Eigen::BDCSVD<Matrix> svd(x.matrix());
    s = svd.singularValues();
  }
  std::sort(s.data(), s.data() + s.size(), std::greater<>());
  return s;
}

Complex normalized_trace(const Operator& x) {
  return x.matrix().trace() / static_cast<double>(x.dim());
}

double real_trace(const Operator& x) {
  const Complex t = normalized_trace(x);
  if (std::abs(t.imag()) >= 1e-10 * (1.0 + std::abs(t.real())))
    throw DomainError("trace has a non-negligible imaginary part");
  return t.real();
}

double lp_norm_from_singular_values(std::span<const double> s, double p) {
  if (!(p >= 1.0)) throw DomainError("L_p norm requires p >= 1");
  if (s.empty()) return 0.0;
  const double top = *std::max_element(s.begin(), s.end());
  if (std::isinf(p) || top == 0.0) return top;
  double acc = 0.0;
  for (double v : s) acc += std::pow(v / top, p);
  return top * std::pow(acc / static_cast<double>(s.size()), 1.0 / p);
}

double lp_norm(const Operator& x, double p) {
  if (!(p >= 1.0)) throw DomainError("L_p norm requires p >= 1");
  const RealVector s = singular_values(x);
  return lp_norm_from_singular_values(std::span<const double>(s.data(), static_cast<std::size_t>(s.size())), p);
}

double operator_norm(const Operator& x) {
  if (x.hermitian()) return lp_norm(x, kInf);
  // the top singular value is well conditioned through x* x
  return std::sqrt(std::max(0.0, max_eigenvalue(x.gram())));
}

Operator apply_function(const SpectralDecomposition& dec, const RealFunction& f) {
  const Index n = dec.eigenvalues.size();
  RealVector fv(n);
  for (Index i = 0; i < n; ++i) {
    fv(i) = f(dec.eigenvalues(i));
    if (!std::isfinite(fv(i)))
      throw DomainError("function undefined at eigenvalue " + std::to_string(dec.eigenvalues(i)));
  }
  Matrix out = dec.eigenvectors * fv.cast<Complex>().asDiagonal() * dec.eigenvectors.adjoint();
  return Operator(std::move(out), true);
}

Operator apply_function(const Operator& x, const RealFunction& f) {
  return apply_function(spectral_decomposition(x), f);
}

bool in_interval(double v, const Interval& iv) noexcept {
  constexpr double kSnap = 1e-12;
  if (std::isfinite(iv.lo) && std::abs(v - iv.lo) <= kSnap * std::max(1.0, std::abs(iv.lo)))
    return false;
  if (std::isfinite(iv.hi) && std::abs(v - iv.hi) <= kSnap * std::max(1.0, std::abs(iv.hi)))
    return iv.lo < iv.hi;
  return iv.lo < v && v <= iv.hi;
}

Projection::Projection(Operator p) : p_(std::move(p)) {
  if (!p_.hermitian()) throw DomainError("projection must be self-adjoint");
  const RealVector ev = eigenvalues(p_);
  for (Index i = 0; i < ev.size(); ++i) {
    if (std::min(std::abs(ev(i)), std::abs(ev(i) - 1.0)) > 1e-8)
      throw DomainError("operator is not a projection (eigenvalue " + std::to_string(ev(i)) + ")");
  }
}

Projection Projection::identity(Index dim) { return Projection(Operator::identity(dim), Unchecked{}); }

Projection Projection::zero(Index dim) { return Projection(Operator::zero(dim), Unchecked{}); }

double Projection::trace() const { return std::clamp(real_trace(p_), 0.0, 1.0); }

Projection Projection::complement() const {
  return Projection(Operator::identity(dim()) - p_, Unchecked{});
}

Projection spectral_projection(const SpectralDecomposition& dec, const Interval& iv) {
  const Index n = dec.eigenvalues.size();
  Matrix out = Matrix::Zero(n, n);
  for (Index i = 0; i < n; ++i) {
    if (!in_interval(dec.eigenvalues(i), iv)) continue;
    out.noalias() += dec.eigenvectors.col(i) * dec.eigenvectors.col(i).adjoint();
  }
  return Projection(Operator(std::move(out), true), Projection::Unchecked{});
}

Projection spectral_projection(const Operator& x, const Interval& iv) {
  return spectral_projection(spectral_decomposition(x), iv);
}

std::size_t count_above(std::span<const double> values, double s) noexcept {
  const Interval iv{s, kInf};
  std::size_t c = 0;
  for (double v : values) c += in_interval(v, iv) ? 1 : 0;
  return c;
}

double singular_number_from_values(std::span<const double> sorted_desc, double t) {
  if (!(t > 0.0 && t < 1.0)) throw DomainError("singular number requires t in (0, 1)");
  const std::size_t n = sorted_desc.size();
  if (n == 0) return 0.0;
  const double dn = static_cast<double>(n);
  // Largest j with j/n <= t: at most j values may exceed mu_t.
  auto j = static_cast<std::size_t>(std::floor(t * dn));
  while (j + 1 <= n && static_cast<double>(j + 1) / dn <= t) ++j;
  while (j > 0 && static_cast<double>(j) / dn > t) --j;
  if (j >= n) return 0.0;
  return std::max(0.0, sorted_desc[j]);
}

double singular_number(const Operator& x, double t) {
  const RealVector s = singular_values(x);
  return singular_number_from_values(std::span<const double>(s.data(), static_cast<std::size_t>(s.size())), t);
}

UniformDistBoundResult check_uniform_dist_bound(std::span<const Operator> xs, const Operator& y,
                                                double K, std::span<const double> grid) {
  if (xs.empty()) throw DomainError("uniform distribution bound needs a nonempty family");
  if (!(K >= 1.0)) throw DomainError("uniform distribution bound needs K >= 1");
  std::vector<RealVector> sx;
  sx.reserve(xs.size());
  for (const auto& x : xs) sx.push_back(singular_values(x));
  const RealVector sy = singular_values(y);
  auto span_of = [](const RealVector& v) {
    return std::span<const double>(v.data(), static_cast<std::size_t>(v.size()));
  };

  UniformDistBoundResult r;
  for (double t : grid) {
    if (!(t > 0.0 && t < 1.0 / K)) throw DomainError("grid point outside (0, 1/K)");
    double sup = 0.0;
    for (const auto& s : sx) sup = std::max(sup, singular_number_from_values(span_of(s), t));
    const double gap = sup - K * singular_number_from_values(span_of(sy), t / K);
    if (gap > r.worst_gap) {
      r.worst_gap = gap;
      r.worst_t = t;
    }
    if (gap > 0.0) r.holds = false;
  }
  return r;
}

}  // namespace nclil
