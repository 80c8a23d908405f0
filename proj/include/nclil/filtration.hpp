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

// Finite models of a tracial algebra with a filtration N_0 = C1 c N_1 c ... c N_n = N
// and the trace-preserving conditional expectations E_k onto N_k.
//
//   tensor    N = M_m^{(x)n}, N_k = M_m^{(x)k} (x) 1; E_k is the normalized
//             partial trace over factors k+1..n.
//   pinching  N = M_{m^n}, N_k = block-diagonal matrices with blocks of size
//             m^k (k >= 1), N_0 = C1; E_k is the block pinching.
//   diagonal  N = functions on {0..m-1}^n with the uniform trace, N_k the
//             functions of the first k digits; E_k averages over level-k cells.

#include <cstdint>
#include <string>
#include <string_view>

#include "nclil/diagonal.hpp"
#include "nclil/operator.hpp"
#include "nclil/rng.hpp"

namespace nclil {

enum class ModelKind { tensor, pinching, diagonal };

std::string_view to_string(ModelKind kind) noexcept;
ModelKind parse_model_kind(std::string_view s);

inline constexpr std::size_t kDefaultDenseCap = 4096;
inline constexpr std::size_t kDiagonalCap = std::size_t{1} << 26;

class AlgebraModel {
 public:
  /// Throws ConfigError when m < 1, n < 1, or m^n exceeds the cap
  /// (`dense_cap` for tensor/pinching, kDiagonalCap for diagonal).
  static AlgebraModel make(ModelKind kind, int site_dim, int depth,
                           std::size_t dense_cap = kDefaultDenseCap);

  ModelKind kind() const noexcept { return kind_; }
  int site_dim() const noexcept { return m_; }
  int depth() const noexcept { return n_; }
  /// m^n: matrix side length, or number of sample points for the diagonal kind.
  std::size_t dimension() const noexcept { return level_size(n_); }
  /// m^k
  std::size_t level_size(int k) const noexcept;
  bool dense() const noexcept { return kind_ != ModelKind::diagonal; }

  bool operator==(const AlgebraModel&) const = default;

 private:
  AlgebraModel(ModelKind kind, int m, int n) : kind_(kind), m_(m), n_(n) {}
  ModelKind kind_;
  int m_;
  int n_;
};

/// E_k(x). The result carries the hermitian flag of x. For the diagonal kind
/// a dense x is first pinched onto its diagonal.
Operator conditional_expectation(const AlgebraModel& model, const Operator& x, int k);
DiagonalOperator conditional_expectation(const AlgebraModel& model, const DiagonalOperator& x, int k);

/// E_k(x) before the hermitian flag is applied; used to measure self-adjointness drift.
Matrix conditional_expectation_raw(const AlgebraModel& model, const Matrix& x, int k);

/// Random hermitian element of N_k with operator norm of order one: a Gaussian
/// matrix on the level-k factor/blocks, symmetrized.
Operator random_hermitian(const AlgebraModel& model, int k, CounterRng& rng);
/// Random (non-hermitian) element of N_k.
Operator random_general(const AlgebraModel& model, int k, CounterRng& rng);
DiagonalOperator random_diagonal(const AlgebraModel& model, int k, CounterRng& rng);

struct CeAxiomReport {
  int samples = 0;
  double unit = 0.0;         // ||E_k(1) - 1||
  double bimodule = 0.0;     // ||E_k(a x b) - a E_k(x) b||
  double trace = 0.0;        // |tau(E_k x) - tau(x)|
  double tower = 0.0;        // ||E_j E_k x - E_min(j,k) x||
  double positivity = 0.0;   // max(0, -lambda_min(E_k x)) for x >= 0
  double contraction = 0.0;  // max(0, ||E_k x||_p - ||x||_p), p in {1,2,4,inf}
  double self_adjoint = 0.0; // hermitian defect of E_k(x) for hermitian x
  double jensen = 0.0;       // max(0, -lambda_min(E_k(x^2) - E_k(x)^2))

  double worst() const noexcept;
  bool pass(double tol = 1e-8) const noexcept { return worst() <= tol; }
};

/// Draws random inputs and measures the worst residual of each axiom.
/// Throws DomainError when sample_count < 1.
CeAxiomReport verify_ce_axioms(const AlgebraModel& model, int sample_count, std::uint64_t seed);

}  // namespace nclil
