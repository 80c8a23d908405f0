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

// Numerical re-execution of the LIL argument: eta-adic blocks, per-block
// column tail probabilities against the closed-form block bounds, the
// Borel-Cantelli projection, and the empirical a.u. limsup of x_n/(s_n u_n).
// Also the classical Kolmogorov baseline and the semicircular counterexample.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "nclil/io.hpp"
#include "nclil/martingale.hpp"
#include "nclil/tail.hpp"

namespace nclil {

struct LILParameters {
  double eta = 1.5;
  double delta = 0.1;
  double delta_prime = 0.1;
  double eps = 0.1;
  double eps_prime = 0.05;
  double beta = 2.0;
  double eps_proj = 0.05;       // target for tau(1 - e)
  double window_fraction = 0.1; // tail window starts at this fraction of the horizon
  int max_blocks = 200;

  BlockParams block() const { return {eta, delta, eps, beta}; }
  /// 1 + delta' > eta (1 + delta) / (1 - eps')
  bool reduction_relation() const;
  /// (1 + delta)^2 / (1 + eps)
  double series_ratio() const;
  /// ConfigError on domain violations and when series_ratio() <= 1.
  void validate() const;
};

struct BlockRecord {
  int n = 0;
  std::size_t k_begin = 0;   // k_n
  std::size_t k_end = 0;     // k_{n+1}
  double s2_end = 0.0;       // s(k_{n+1})^2
  double alpha_end = 0.0;    // alpha(k_{n+1})
  BlockBound bound;
  double probc = 0.0;          // Prob_c(sup ||x_m/(s_m u_m)|| > beta(1+delta'))
  double probc_rescaled = 0.0; // Prob_c(sup ||x_m/(s(k_{n+1})u(k_{n+1}))|| > beta(1+delta))
  double reduction_ratio = 0.0;  // min_m s_m u_m / (s(k_{n+1}) u(k_{n+1}))
  bool reduction_ok = false;     // ratio >= (1-eps')/eta
  bool valid = false;            // n >= n0
  bool in_window = false;        // block meets the tail window
  double partial_final = 0.0;    // sum over valid blocks <= n of bound_final
  double partial_exact = 0.0;
  double partial_empirical = 0.0;
};

struct TailReport {
  std::string semantics;  // "exact" (sample points) or "certificate" (probc_upper)
  std::size_t horizon = 0;
  std::size_t paths = 0;
  std::vector<BlockRecord> blocks;
  bool truncated = false;
  int n1 = 0;
  int n2 = 0;
  int n0 = 0;
  std::size_t window_begin = 0;
  std::size_t window_end = 0;
  double empirical_limsup = 0.0;  // K = max over the window of ||r_m e||
  double deficit = 0.0;           // tau(1 - e)
  double bc_deficit = 0.0;        // tau(1 - e) over all valid blocks
  double union_bound = 0.0;       // sum of per-block deficits used by e
  double series_final = 0.0;
  double series_exact = 0.0;
  bool bc_applicable = false;     // series_final < eps_proj
  bool reduction_relation = false;
  bool degenerate = false;        // zero martingale
  double threshold = 0.0;         // beta (1 + delta')
};

/// Block layout, N1/N2/n0, window and closed-form bounds from the bracket
/// statistics alone (no path data); throws InsufficientHorizon like the runs.
TailReport plan_lil_blocks(const PathSummary& summary, const LILParameters& params);

/// Streaming run on a Monte Carlo diagonal path. Throws InsufficientHorizon
/// when s_N^2 <= e^e or no complete block reaches n0. A zero path yields a
/// degenerate report with K = 0 and deficit 0.
TailReport run_lil_experiment(const DiagonalPath& path, const LILParameters& params);
/// Dense path: per-block Prob_c from the column-norm certificate (upper estimate).
TailReport run_lil_experiment(const MartingalePath& path, const LILParameters& params);

/// Second pass: (n, ||r_n e||) on a log-spaced grid of at most `points` steps.
struct PlotPoint {
  std::size_t n;
  double r_all;  // max over paths of |r_n|
  double r_e;    // max over kept paths of |r_n|
};
std::vector<PlotPoint> lil_plot_series(const DiagonalPath& path, const TailReport& report,
                                       std::size_t points = 2000);

io::Json to_json(const TailReport& r);
void write_block_csv(const TailReport& r, const std::filesystem::path& path);

struct AuLimsup {
  double K = 0.0;
  double deficit = 0.0;
};
struct DenseAuLimsup : AuLimsup {
  Projection e = Projection::identity(1);
};
struct CellAuLimsup : AuLimsup {
  DiagonalOperator e;
};

/// Removes the largest sample points (or top of the spectrum of a column-norm
/// dominator) while tau(1-e) < eps_proj; K = max_m ||r_m e||.
DenseAuLimsup empirical_au_limsup(std::span<const Operator> rs, double eps_proj);
CellAuLimsup empirical_au_limsup(std::span<const DiagonalOperator> rs, double eps_proj);
/// From per-point maxima over the window.
CellAuLimsup au_limsup_from_maxima(std::span<const double> point_max, double eps_proj);

// ---- classical baseline ---------------------------------------------------------------

struct BaselineConfig {
  std::size_t paths = 4096;
  std::size_t horizon = 1000000;
  std::uint64_t seed = 0;
  IncrementLaw law = IncrementLaw::rademacher;
  double window_fraction = 0.1;
};

struct BaselineReport {
  std::size_t paths = 0;
  std::size_t horizon = 0;
  double median = 0.0;
  double q90 = 0.0;
  double q95 = 0.0;
  double q99 = 0.0;
  double max = 0.0;
  double frac_above_2 = 0.0;
  bool pre_asymptotic = false;  // horizon < 1e5 or paths < 1000
  std::vector<double> running_max;
};

/// Independent paths; per path max over n in [fN, N] of |S_n|/sqrt(s_n^2 L(s_n^2)).
BaselineReport scalar_kolmogorov_baseline(const BaselineConfig& cfg);
io::Json to_json(const BaselineReport& r);

/// Linear-interpolation quantile of unsorted data.
double quantile(std::vector<double> v, double q);

// ---- semicircular counterexample ----------------------------------------------------------

struct SemicircleConfig {
  Index size = 200;
  std::size_t steps = 10000;
  std::uint64_t seed = 0;
  std::vector<std::size_t> checkpoints;  // empty: 1, 10, 15, 100, 1000, 10000 (those <= steps)
};

struct SemicirclePoint {
  std::size_t n;
  double norm;       // ||sum_{i<=n} g_i||
  double statistic;  // norm / sqrt(n L(n))
};

struct SemicircleReport {
  Index size = 0;
  std::vector<SemicirclePoint> points;
  std::optional<double> ks_at_100;   // KS distance of sum/sqrt(100) to the semicircle
  std::optional<bool> decreasing;    // statistic(1e4) < statistic(1e2), when both exist
};

SemicircleReport semicircular_demo(const SemicircleConfig& cfg);
io::Json to_json(const SemicircleReport& r);

}  // namespace nclil
