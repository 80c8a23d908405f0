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

// Self-adjoint martingales on the algebra models, their bracket statistics
//   s_n^2 = || sum_{i<=n} E_{i-1}(d_i^2) ||,   u_n = L(s_n^2)^{1/2},
// the eta-adic stopping rule and the growth-condition diagnostics.

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "nclil/diagonal.hpp"
#include "nclil/filtration.hpp"
#include "nclil/operator.hpp"

namespace nclil {

/// L(x) = max{1, ln ln x}; exactly 1 for x <= e^e. Throws DomainError for x <= 0.
double iterlog(double x);

/// u = L(s2)^{1/2}, with u = 1 when s2 = 0 (no variance yet).
double normalizer(double s2);

/// Per-step statistics of a path; entry n-1 belongs to step n.
struct PathSummary {
  std::vector<double> s2;
  std::vector<double> u;
  std::vector<double> dnorm;  // ||d_n||_inf

  std::size_t horizon() const noexcept { return s2.size(); }
  /// Number of steps where u_n = 1 because of the clamp in L.
  std::size_t clamped_steps() const noexcept;
  /// Fills u from s2.
  void fill_normalizers();
};

template <class Op>
struct BasicPath {
  AlgebraModel model;
  std::vector<Op> differences;  // d_1..d_N
  std::vector<Op> partials;     // x_0 = 0, x_1..x_N
  PathSummary summary;
  double md_residual = 0.0;     // max_k ||E_{k-1}(d_k)||_inf

  std::size_t horizon() const noexcept { return differences.size(); }
};

using MartingalePath = BasicPath<Operator>;
using CellPath = BasicPath<DiagonalOperator>;

/// Maximal tolerated ||E_{k-1}(d_k)||.
inline constexpr double kMartingaleTol = 1e-9;

/// s_n^2 and u_n by accumulating E_{i-1}(d_i^2).
PathSummary bracket_norms(const AlgebraModel& model, std::span<const Operator> d);
PathSummary bracket_norms(const AlgebraModel& model, std::span<const DiagonalOperator> d);

/// Builds partial sums and statistics. d_k must be hermitian, lie in N_k, and
/// satisfy ||E_{k-1}(d_k)|| <= kMartingaleTol; DomainError otherwise. The
/// horizon cannot exceed the model depth.
MartingalePath assemble_path(const AlgebraModel& model, std::vector<Operator> d);
CellPath assemble_path(const AlgebraModel& model, std::vector<DiagonalOperator> d);

struct StoppingIndices {
  std::vector<std::size_t> k;  // k_0 = 0, k_1, ...
  bool truncated = false;
  int truncated_at = -1;       // first block index n whose k_n does not exist
};

/// k_n = inf{ j >= 0 : s_{j+1}^2 >= eta^{2n} } for n = 1..count, with s_0^2 = 0.
/// `s2[j-1]` holds s_j^2. Requires eta in (1,2) and s2 nondecreasing.
StoppingIndices stopping_indices(std::span<const double> s2, double eta, int count);

struct GrowthProfile {
  std::vector<double> alpha;  // ||d_n|| u_n / s_n; NaN where s_n = 0
  std::size_t undefined = 0;  // steps with s_n = 0
  bool within_target = true;  // alpha_n <= target_n wherever both are defined
  /// Least-squares slope of ln alpha against ln n over the last decade of n;
  /// negative when alpha is decaying. NaN if fewer than two usable points.
  double tail_slope = 0.0;
};

GrowthProfile growth_profile(const PathSummary& summary,
                             std::optional<std::span<const double>> target = std::nullopt);

/// c / ln(n + 2)
double default_alpha(std::size_t n, double c);

/// Bound sequence M_n on ||d_n||.
struct BoundSpec {
  enum class Kind { constant, list, growth };
  Kind kind = Kind::constant;
  double value = 1.0;          // constant M, or c for growth
  std::vector<double> list;    // explicit M_1..M_N
  double initial = 1.0;        // growth: M_1

  static BoundSpec constant(double m) { return {Kind::constant, m, {}, 1.0}; }
  static BoundSpec explicit_list(std::vector<double> v) { return {Kind::list, 0.0, std::move(v), 1.0}; }
  /// M_1 = initial, M_n = c/ln(n+2) * s_{n-1}/u_{n-1}.
  static BoundSpec growth(double c, double initial = 1.0) { return {Kind::growth, c, {}, initial}; }

  /// M_n given the bracket so far (s2_prev = s_{n-1}^2).
  double bound(std::size_t n, double s2_prev) const;
};

enum class Coupling { none, haar };

struct TensorGenSpec {
  BoundSpec bounds = BoundSpec::constant(1.0);
  Coupling coupling = Coupling::haar;
  /// When set, every a_k is this traceless hermitian m x m matrix rescaled to norm M_k.
  std::optional<Operator> site_matrix;
};

/// Site matrices and statistics of a tensor martingale, without materializing
/// the m^n-dimensional differences. E_{k-1}(d_k^2) = tau(a_k^2) 1 here, so the
/// bracket is available in closed form.
struct TensorPlan {
  AlgebraModel model;
  TensorGenSpec spec;
  std::uint64_t seed = 0;
  std::vector<Operator> site;  // a_1..a_n
  PathSummary summary;
};

TensorPlan plan_tensor_martingale(const AlgebraModel& model, const TensorGenSpec& spec, std::uint64_t seed);
/// d_k = (w_{k-1} (x) a_k) (x) 1 with w_{k-1} = 1 (coupling none) or a random
/// self-adjoint unitary of N_{k-1} (coupling haar).
MartingalePath materialize(const TensorPlan& plan);
MartingalePath gen_tensor_martingale(const AlgebraModel& model, const TensorGenSpec& spec, std::uint64_t seed);

/// Any dense model: d_k = M_k (h - E_{k-1} h)/||h - E_{k-1} h|| with h random in N_k.
MartingalePath gen_model_martingale(const AlgebraModel& model, const BoundSpec& bounds, std::uint64_t seed);

enum class CellLaw { rademacher, gaussian };

/// Exact martingale on the diagonal model's sample space. rademacher: d_k is
/// M_k times the centered k-th digit, normalized to max 1 (+-1 for m = 2).
CellPath gen_cell_martingale(const AlgebraModel& model, const BoundSpec& bounds, CellLaw law, std::uint64_t seed);

enum class IncrementLaw { rademacher, uniform, alternating };

struct DiagonalGenSpec {
  std::size_t horizon = 1;
  IncrementLaw law = IncrementLaw::rademacher;
  /// Empty: unit variance; one entry: constant; otherwise v_1..v_N.
  std::vector<double> variance;
  std::size_t paths = 4096;
};

/// Monte Carlo classical martingale on P sample paths with the uniform trace.
/// Paths come in antithetic pairs (path i + P/2 is the negation of path i), so
/// tau of every odd function of x_n vanishes exactly. The filtration is the
/// law-level one of independent increments: E_{k-1}(d_k) = 0 and
/// E_{k-1}(d_k^2) = v_k, hence s_n^2 = sum_{i<=n} v_i deterministically.
/// Increments are regenerated from the counter RNG, so nothing of size P*N is stored.
class DiagonalPath {
 public:
  DiagonalPath(const DiagonalGenSpec& spec, std::uint64_t seed);

  std::size_t horizon() const noexcept { return spec_.horizon; }
  std::size_t paths() const noexcept { return spec_.paths; }
  const DiagonalGenSpec& spec() const noexcept { return spec_; }
  const PathSummary& summary() const noexcept { return summary_; }
  double variance(std::size_t n) const;
  /// 0: the increment law is centered.
  double md_residual() const noexcept { return 0.0; }

  /// x += d_n
  void advance(std::size_t n, std::span<double> x) const;
  DiagonalOperator difference(std::size_t n) const;
  DiagonalOperator partial_sum(std::size_t n) const;

  /// Calls f(n, x_n) for n = 1..horizon.
  template <class F>
  void for_each_step(F&& f) const {
    std::vector<double> x(paths(), 0.0);
    for (std::size_t n = 1; n <= horizon(); ++n) {
      advance(n, x);
      f(n, std::span<const double>(x));
    }
  }

 private:
  DiagonalGenSpec spec_;
  std::uint64_t key_;
  PathSummary summary_;
};

DiagonalPath gen_diagonal_martingale(const DiagonalGenSpec& spec, std::uint64_t seed);

}  // namespace nclil
