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
#include "nclil/filtration.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "nclil/error.hpp"
#include "nclil/simd/kernels.hpp"

namespace nclil {

std::string_view to_string(ModelKind kind) noexcept {
  switch (kind) {
    case ModelKind::tensor: return "tensor";
    case ModelKind::pinching: return "pinching";
    case ModelKind::diagonal: return "diagonal";
  }
  return "?";
}

ModelKind parse_model_kind(std::string_view s) {
  if (s == "tensor") return ModelKind::tensor;
  if (s == "pinching") return ModelKind::pinching;
  if (s == "diagonal") return ModelKind::diagonal;
  throw ConfigError("unknown model kind '" + std::string(s) + "'");
}

AlgebraModel AlgebraModel::make(ModelKind kind, int site_dim, int depth, std::size_t dense_cap) {
  if (site_dim < 1 || depth < 1) throw ConfigError("model needs m >= 1 and n >= 1");
  const std::size_t cap = kind == ModelKind::diagonal ? kDiagonalCap : dense_cap;
  std::size_t total = 1;
  for (int i = 0; i < depth; ++i) {
    total *= static_cast<std::size_t>(site_dim);
    if (total > cap)
      throw ConfigError("model dimension m^n = " + std::to_string(site_dim) + "^" +
                        std::to_string(depth) + " exceeds the cap " + std::to_string(cap) +
                        " for kind " + std::string(to_string(kind)));
  }
  return AlgebraModel(kind, site_dim, depth);
}

std::size_t AlgebraModel::level_size(int k) const noexcept {
  std::size_t s = 1;
  for (int i = 0; i < k; ++i) s *= static_cast<std::size_t>(m_);
  return s;
}

namespace {

void check_level(const AlgebraModel& model, int k) {
  if (k < 0 || k > model.depth())
    throw DomainError("filtration level " + std::to_string(k) + " outside [0, " +
                      std::to_string(model.depth()) + "]");
}

Matrix tensor_partial_trace(const Matrix& x, Index outer, Index inner) {
  // x indexed by (i, a), (j, b) -> i*inner + a; contract a = b and re-embed with 1_inner.
  Matrix reduced = Matrix::Zero(outer, outer);
  for (Index i = 0; i < outer; ++i)
    for (Index j = 0; j < outer; ++j) {
      Complex acc = 0.0;
      for (Index c = 0; c < inner; ++c) acc += x(i * inner + c, j * inner + c);
      reduced(i, j) = acc / static_cast<double>(inner);
    }
  Matrix out = Matrix::Zero(outer * inner, outer * inner);
  for (Index i = 0; i < outer; ++i)
    for (Index j = 0; j < outer; ++j) {
      if (reduced(i, j) == Complex(0.0)) continue;
      for (Index a = 0; a < inner; ++a) out(i * inner + a, j * inner + a) = reduced(i, j);
    }
  return out;
}

Matrix block_pinching(const Matrix& x, Index block) {
  const Index n = x.rows();
  Matrix out = Matrix::Zero(n, n);
  for (Index s = 0; s < n; s += block) out.block(s, s, block, block) = x.block(s, s, block, block);
  return out;
}

std::vector<double> cell_average(const AlgebraModel& model, std::span<const double> v, int k) {
  const std::size_t cells = model.level_size(k);
  const std::size_t len = v.size() / cells;
  std::vector<double> means(cells);
  simd::active().segment_mean(v.data(), len, cells, means.data());
  std::vector<double> out(v.size());
  for (std::size_t c = 0; c < cells; ++c) std::fill_n(out.begin() + static_cast<std::ptrdiff_t>(c * len), len, means[c]);
  return out;
}

}  // namespace

Matrix conditional_expectation_raw(const AlgebraModel& model, const Matrix& x, int k) {
  check_level(model, k);
  const auto dim = static_cast<Index>(model.dimension());
  if (x.rows() != dim || x.cols() != dim)
    throw DimensionError("operator dimension " + std::to_string(x.rows()) +
                         " does not match model dimension " + std::to_string(dim));
  if (k == model.depth()) {
    if (model.kind() != ModelKind::diagonal) return x;
  }
  switch (model.kind()) {
    case ModelKind::tensor: {
      const auto outer = static_cast<Index>(model.level_size(k));
      return tensor_partial_trace(x, outer, dim / outer);
    }
    case ModelKind::pinching: {
      if (k == 0) return Matrix::Identity(dim, dim) * (x.trace() / static_cast<double>(dim));
      return block_pinching(x, static_cast<Index>(model.level_size(k)));
    }
    case ModelKind::diagonal: {
      std::vector<double> re(static_cast<std::size_t>(dim)), im(static_cast<std::size_t>(dim));
      for (Index i = 0; i < dim; ++i) {
        re[static_cast<std::size_t>(i)] = x(i, i).real();
        im[static_cast<std::size_t>(i)] = x(i, i).imag();
      }
      const auto er = cell_average(model, re, k);
      const auto ei = cell_average(model, im, k);
      Matrix out = Matrix::Zero(dim, dim);
      for (Index i = 0; i < dim; ++i)
        out(i, i) = Complex(er[static_cast<std::size_t>(i)], ei[static_cast<std::size_t>(i)]);
      return out;
    }
  }
  return x;
}

Operator conditional_expectation(const AlgebraModel& model, const Operator& x, int k) {
  Operator out(conditional_expectation_raw(model, x.matrix(), k), false);
  return x.hermitian() ? out.real_part() : out;
}

DiagonalOperator conditional_expectation(const AlgebraModel& model, const DiagonalOperator& x, int k) {
  check_level(model, k);
  if (model.kind() != ModelKind::diagonal)
    throw DimensionError("vector conditional expectation needs the diagonal model");
  if (x.size() != model.dimension())
    throw DimensionError("operator size does not match the number of sample points");
  if (k == model.depth()) return x;
  return DiagonalOperator(cell_average(model, x.values(), k));
}

namespace {

Matrix gaussian_block(Index n, CounterRng& rng, bool hermitian) {
  std::normal_distribution<double> nd;
  Matrix g(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j) g(i, j) = Complex(nd(rng), nd(rng)) / std::sqrt(2.0);
  g /= 2.0 * std::sqrt(static_cast<double>(n));
  if (hermitian) g = (0.5 * (g + g.adjoint())).eval();
  return g;
}

Matrix random_level_element(const AlgebraModel& model, int k, CounterRng& rng, bool hermitian) {
  check_level(model, k);
  const auto dim = static_cast<Index>(model.dimension());
  switch (model.kind()) {
    case ModelKind::tensor: {
      const auto outer = static_cast<Index>(model.level_size(k));
      const Matrix g = gaussian_block(outer, rng, hermitian);
      return kron(Operator(g), Operator::identity(dim / outer)).matrix();
    }
    case ModelKind::pinching: {
      if (k == 0) return gaussian_block(1, rng, hermitian)(0, 0) * Matrix::Identity(dim, dim);
      const auto block = static_cast<Index>(model.level_size(k));
      Matrix out = Matrix::Zero(dim, dim);
      for (Index s = 0; s < dim; s += block) out.block(s, s, block, block) = gaussian_block(block, rng, hermitian);
      return out;
    }
    case ModelKind::diagonal: {
      const auto d = random_diagonal(model, k, rng);
      Matrix out = Matrix::Zero(dim, dim);
      for (Index i = 0; i < dim; ++i) out(i, i) = d[static_cast<std::size_t>(i)];
      if (!hermitian) {
        const auto im = random_diagonal(model, k, rng);
        for (Index i = 0; i < dim; ++i) out(i, i) += Complex(0.0, im[static_cast<std::size_t>(i)]);
      }
      return out;
    }
  }
  return Matrix::Zero(dim, dim);
}

}  // namespace

Operator random_hermitian(const AlgebraModel& model, int k, CounterRng& rng) {
  return Operator(random_level_element(model, k, rng, true), true);
}

Operator random_general(const AlgebraModel& model, int k, CounterRng& rng) {
  return Operator(random_level_element(model, k, rng, false), false);
}

DiagonalOperator random_diagonal(const AlgebraModel& model, int k, CounterRng& rng) {
  check_level(model, k);
  const std::size_t cells = model.level_size(k);
  const std::size_t len = model.dimension() / cells;
  std::normal_distribution<double> nd;
  std::vector<double> v(model.dimension());
  for (std::size_t c = 0; c < cells; ++c) {
    const double value = nd(rng);
    std::fill_n(v.begin() + static_cast<std::ptrdiff_t>(c * len), len, value);
  }
  return DiagonalOperator(std::move(v));
}

double CeAxiomReport::worst() const noexcept {
  return std::max({unit, bimodule, trace, tower, positivity, contraction, self_adjoint, jensen});
}

namespace {

constexpr double kNormsToCheck[] = {1.0, 2.0, 4.0, kInf};

double rel_excess(double lhs, double rhs) { return std::max(0.0, (lhs - rhs) / (1.0 + rhs)); }

CeAxiomReport verify_dense(const AlgebraModel& model, int samples, CounterRng& rng) {
  CeAxiomReport r;
  r.samples = samples;
  const auto dim = static_cast<Index>(model.dimension());
  const Operator one = Operator::identity(dim);
  std::uniform_int_distribution<int> level(0, model.depth());
  auto norm = [](const Matrix& m) { return operator_norm(Operator(m)); };

  for (int s = 0; s < samples; ++s) {
    const int k = s % (model.depth() + 1);
    const int j = level(rng);
    const Operator x = random_general(model, model.depth(), rng);
    const Operator h = random_hermitian(model, model.depth(), rng);
    const Operator a = random_general(model, k, rng);
    const Operator b = random_general(model, k, rng);

    r.unit = std::max(r.unit, norm(conditional_expectation(model, one, k).matrix() - one.matrix()));

    const Operator ex = conditional_expectation(model, x, k);
    r.bimodule = std::max(r.bimodule, norm(conditional_expectation(model, a * x * b, k).matrix() -
                                           (a * ex * b).matrix()));
    r.trace = std::max(r.trace, std::abs(normalized_trace(ex) - normalized_trace(x)));

    const Operator ejk = conditional_expectation(model, ex, j);
    const Operator emin = conditional_expectation(model, x, std::min(j, k));
    r.tower = std::max(r.tower, norm(ejk.matrix() - emin.matrix()));

    const Operator pos = x * x.adjoint();
    const Operator epos = conditional_expectation(model, Operator(pos.matrix(), true), k);
    r.positivity = std::max(r.positivity, std::max(0.0, -min_eigenvalue(epos)));

    const Operator eh = conditional_expectation(model, h, k);
    for (double p : kNormsToCheck) r.contraction = std::max(r.contraction, rel_excess(lp_norm(eh, p), lp_norm(h, p)));
    r.self_adjoint = std::max(r.self_adjoint, hermitian_defect(conditional_expectation_raw(model, h.matrix(), k)));

    const Operator h2((h * h).matrix(), true);
    const Operator eh2 = conditional_expectation(model, h2, k);
    const Operator gap = eh2 - Operator((eh * eh).matrix(), true);
    r.jensen = std::max(r.jensen, std::max(0.0, -min_eigenvalue(gap)));
  }
  return r;
}

CeAxiomReport verify_diagonal(const AlgebraModel& model, int samples, CounterRng& rng) {
  CeAxiomReport r;
  r.samples = samples;
  const std::size_t n = model.dimension();
  const auto one = DiagonalOperator::identity(n);
  std::uniform_int_distribution<int> level(0, model.depth());

  for (int s = 0; s < samples; ++s) {
    const int k = s % (model.depth() + 1);
    const int j = level(rng);
    const auto x = random_diagonal(model, model.depth(), rng);
    const auto a = random_diagonal(model, k, rng);
    const auto b = random_diagonal(model, k, rng);

    r.unit = std::max(r.unit, operator_norm(conditional_expectation(model, one, k) - one));
    const auto ex = conditional_expectation(model, x, k);
    r.bimodule = std::max(r.bimodule, operator_norm(conditional_expectation(model, a * x * b, k) - a * ex * b));
    r.trace = std::max(r.trace, std::abs(normalized_trace(ex) - normalized_trace(x)));
    const auto ejk = conditional_expectation(model, ex, j);
    r.tower = std::max(r.tower, operator_norm(ejk - conditional_expectation(model, x, std::min(j, k))));
    r.positivity = std::max(r.positivity, std::max(0.0, -min_eigenvalue(conditional_expectation(model, x * x, k))));
    for (double p : kNormsToCheck) r.contraction = std::max(r.contraction, rel_excess(lp_norm(ex, p), lp_norm(x, p)));
    r.jensen = std::max(r.jensen, std::max(0.0, -min_eigenvalue(conditional_expectation(model, x * x, k) - ex * ex)));
  }
  return r;
}

}  // namespace

CeAxiomReport verify_ce_axioms(const AlgebraModel& model, int sample_count, std::uint64_t seed) {
  if (sample_count < 1) throw DomainError("verify_ce_axioms needs at least one sample");
  CounterRng rng(seed, 0, "verify-ce");
  return model.dense() ? verify_dense(model, sample_count, rng) : verify_diagonal(model, sample_count, rng);
}

}  // namespace nclil
