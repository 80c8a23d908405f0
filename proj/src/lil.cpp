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
#include "nclil/lil.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "nclil/error.hpp"
#include "nclil/gue.hpp"
#include "nclil/simd/kernels.hpp"

namespace nclil {

bool LILParameters::reduction_relation() const {
  return 1.0 + delta_prime > eta * (1.0 + delta) / (1.0 - eps_prime);
}

double LILParameters::series_ratio() const { return (1.0 + delta) * (1.0 + delta) / (1.0 + eps); }

void LILParameters::validate() const {
  if (!(eta > 1.0 && eta < 2.0)) throw ConfigError("eta must lie in (1, 2)");
  if (!(delta > 0.0) || !(delta_prime > 0.0)) throw ConfigError("delta and delta' must be positive");
  if (!(eps > 0.0 && eps <= 1.0)) throw ConfigError("eps must lie in (0, 1]");
  if (!(eps_prime > 0.0 && eps_prime < 1.0)) throw ConfigError("eps' must lie in (0, 1)");
  if (!(beta > 0.0)) throw ConfigError("beta must be positive");
  if (!(eps_proj > 0.0 && eps_proj <= 1.0)) throw ConfigError("eps_proj must lie in (0, 1]");
  if (!(window_fraction >= 0.0 && window_fraction < 1.0)) throw ConfigError("window fraction must lie in [0, 1)");
  if (max_blocks < 1) throw ConfigError("max_blocks must be >= 1");
  if (!(series_ratio() > 1.0))
    throw ConfigError("series convergence gate: (1+delta)^2/(1+eps) = " + std::to_string(series_ratio()) +
                      " must exceed 1 for the block series to converge");
}

namespace {

double su(const PathSummary& s, std::size_t m) { return std::sqrt(s.s2[m - 1]) * s.u[m - 1]; }

// Block layout, N1/N2/n0 and the closed-form bounds; everything that depends
// only on the deterministic bracket sequence.
TailReport plan_blocks(const PathSummary& s, const LILParameters& q) {
  TailReport r;
  r.horizon = s.horizon();
  r.threshold = q.beta * (1.0 + q.delta_prime);
  r.reduction_relation = q.reduction_relation();
  const double s2N = s.s2.back();
  static const double kEE = std::exp(std::numbers::e);
  if (s2N <= kEE)
    throw InsufficientHorizon("s_N^2 = " + std::to_string(s2N) + " does not exceed e^e; no blocks exist");

  const auto st = stopping_indices(s.s2, q.eta, q.max_blocks + 1);
  r.truncated = st.truncated;
  const BlockParams bp = q.block();
  for (std::size_t n = 1; n + 1 < st.k.size(); ++n) {
    BlockRecord b;
    b.n = static_cast<int>(n);
    b.k_begin = st.k[n];
    b.k_end = st.k[n + 1];
    if (b.k_end >= 1) {
      b.s2_end = s.s2[b.k_end - 1];
      b.alpha_end = s.s2[b.k_end - 1] > 0.0 ? s.dnorm[b.k_end - 1] * s.u[b.k_end - 1] / std::sqrt(b.s2_end) : kInf;
    }
    b.bound = block_tail_bound(b.n, bp, b.s2_end > 0.0 ? std::optional<double>(b.s2_end) : std::nullopt,
                               b.alpha_end);
    if (b.k_end > b.k_begin) {
      const double top = su(s, b.k_end);
      double lo = kInf;
      for (std::size_t m = b.k_begin + 1; m <= b.k_end; ++m) lo = std::min(lo, su(s, m));
      b.reduction_ratio = top > 0.0 ? lo / top : 0.0;
    } else {
      b.reduction_ratio = 1.0;
    }
    b.reduction_ok = b.reduction_ratio >= (1.0 - q.eps_prime) / q.eta;
    r.blocks.push_back(b);
  }
  if (r.blocks.empty()) throw InsufficientHorizon("the horizon does not contain a complete block");

  // first index from which the condition holds for the remaining blocks
  auto first_from = [&](auto pred) {
    int first = r.blocks.back().n + 1;
    for (auto it = r.blocks.rbegin(); it != r.blocks.rend() && pred(*it); ++it) first = it->n;
    return first;
  };
  r.n1 = first_from([](const BlockRecord& b) { return b.reduction_ok; });
  r.n2 = first_from([](const BlockRecord& b) { return b.bound.alpha_ok.value_or(false) && b.bound.p_at_least_4; });
  r.n0 = std::max({r.n1, r.n2, 1});
  if (r.n0 > r.blocks.back().n)
    throw InsufficientHorizon("no complete block beyond n0 = " + std::to_string(r.n0) + " (N1 = " +
                              std::to_string(r.n1) + ", N2 = " + std::to_string(r.n2) + ")");

  const std::size_t k_last = r.blocks.back().k_end;
  std::size_t k_valid = 0;
  for (const auto& b : r.blocks)
    if (b.n == r.n0) k_valid = b.k_begin + 1;
  const auto w0 = static_cast<std::size_t>(std::ceil(q.window_fraction * static_cast<double>(s.horizon())));
  r.window_end = k_last;
  r.window_begin = std::min(std::max({w0, k_valid, std::size_t{1}}), k_last);

  for (auto& b : r.blocks) {
    b.valid = b.n >= r.n0;
    b.in_window = b.valid && b.k_end >= r.window_begin && b.k_begin < r.window_end && b.k_end > b.k_begin;
    if (b.valid) {
      r.series_final += b.bound.bound_final;
      r.series_exact += b.bound.bound_exact;
    }
    b.partial_final = r.series_final;
    b.partial_exact = r.series_exact;
  }
  r.bc_applicable = r.series_final < q.eps_proj;
  return r;
}

}  // namespace

TailReport plan_lil_blocks(const PathSummary& summary, const LILParameters& params) {
  params.validate();
  if (summary.horizon() == 0) throw InsufficientHorizon("empty path");
  return plan_blocks(summary, params);
}

namespace {

void finish_partials(TailReport& r) {
  double acc = 0.0;
  for (auto& b : r.blocks) {
    if (b.valid) acc += b.probc;
    b.partial_empirical = acc;
  }
}

}  // namespace

TailReport run_lil_experiment(const DiagonalPath& path, const LILParameters& q) {
  q.validate();
  const PathSummary& s = path.summary();
  const std::size_t P = path.paths();
  if (s.s2.back() == 0.0) {
    TailReport r;
    r.semantics = "exact";
    r.horizon = path.horizon();
    r.paths = P;
    r.degenerate = true;
    r.threshold = q.beta * (1.0 + q.delta_prime);
    r.reduction_relation = q.reduction_relation();
    return r;
  }
  TailReport r = plan_blocks(s, q);
  r.semantics = "exact";
  r.paths = P;

  const auto& k = simd::active();
  std::vector<double> x(P, 0.0), run_r(P, 0.0), run_raw(P, 0.0), win(P, 0.0);
  std::vector<char> excl_window(P, 0), excl_all(P, 0);
  const std::size_t first = r.blocks.front().k_begin;
  std::size_t bi = 0;

  auto finalize = [&](BlockRecord& b) {
    const double dp = static_cast<double>(P);
    b.probc = static_cast<double>(k.count_above(run_r.data(), r.threshold, P)) / dp;
    const double thr2 = q.beta * (1.0 + q.delta) * (b.k_end >= 1 ? su(s, b.k_end) : 0.0);
    b.probc_rescaled = static_cast<double>(k.count_above(run_raw.data(), thr2, P)) / dp;
    if (b.valid)
      for (std::size_t i = 0; i < P; ++i)
        if (run_r[i] > r.threshold) {
          excl_all[i] = 1;
          if (b.in_window) excl_window[i] = 1;
        }
    if (b.in_window) r.union_bound += b.probc;
    std::fill(run_r.begin(), run_r.end(), 0.0);
    std::fill(run_raw.begin(), run_raw.end(), 0.0);
  };

  while (bi < r.blocks.size() && r.blocks[bi].k_end == 0) finalize(r.blocks[bi++]);
  for (std::size_t m = 1; m <= r.window_end; ++m) {
    path.advance(m, x);
    if (m <= first) continue;
    const double scale = 1.0 / su(s, m);
    k.abs_max_update(run_r.data(), x.data(), scale, P);
    k.abs_max_update(run_raw.data(), x.data(), 1.0, P);
    if (m >= r.window_begin) k.abs_max_update(win.data(), x.data(), scale, P);
    while (bi < r.blocks.size() && r.blocks[bi].k_end == m) finalize(r.blocks[bi++]);
  }
  finish_partials(r);

  std::size_t cut = 0, cut_all = 0;
  for (std::size_t i = 0; i < P; ++i) {
    cut += excl_window[i] != 0;
    cut_all += excl_all[i] != 0;
    if (!excl_window[i]) r.empirical_limsup = std::max(r.empirical_limsup, win[i]);
  }
  r.deficit = static_cast<double>(cut) / static_cast<double>(P);
  r.bc_deficit = static_cast<double>(cut_all) / static_cast<double>(P);
  return r;
}

TailReport run_lil_experiment(const MartingalePath& path, const LILParameters& q) {
  q.validate();
  const PathSummary& s = path.summary;
  const auto dim = static_cast<Index>(path.model.dimension());
  if (path.horizon() == 0) throw InsufficientHorizon("empty path");
  if (s.s2.back() == 0.0) {
    TailReport r;
    r.semantics = "certificate";
    r.horizon = path.horizon();
    r.paths = static_cast<std::size_t>(dim);
    r.degenerate = true;
    r.threshold = q.beta * (1.0 + q.delta_prime);
    r.reduction_relation = q.reduction_relation();
    return r;
  }
  TailReport r = plan_blocks(s, q);
  r.semantics = "certificate";
  r.paths = static_cast<std::size_t>(dim);

  auto r_at = [&](std::size_t m) { return path.partials[m] * (1.0 / su(s, m)); };
  Operator cut_window = Operator::zero(dim), cut_all = Operator::zero(dim);
  for (auto& b : r.blocks) {
    if (b.k_end <= b.k_begin) continue;
    std::vector<Operator> fam, resc;
    const double top = su(s, b.k_end);
    for (std::size_t m = b.k_begin + 1; m <= b.k_end; ++m) {
      fam.push_back(r_at(m));
      resc.push_back(path.partials[m] * (1.0 / top));
    }
    // any feasible dominator gives a valid Prob_c upper estimate; a short refinement suffices
    const ColumnNormOptions opt{8, 1e-3};
    const auto cert = column_maximal_norm_bounds(fam, 2.0, opt).certificate;
    const auto pr = probc_upper(fam, r.threshold, cert);
    b.probc = pr.s;
    const auto cert2 = column_maximal_norm_bounds(resc, 2.0, opt).certificate;
    b.probc_rescaled = probc_upper(resc, q.beta * (1.0 + q.delta), cert2).s;
    if (b.valid) {
      const Operator comp = pr.e.complement().op();
      cut_all = cut_all + comp;
      if (b.in_window) {
        cut_window = cut_window + comp;
        r.union_bound += b.probc;
      }
    }
  }
  finish_partials(r);
  const Projection e = spectral_projection(cut_window, Interval{-kInf, 1e-9});
  const Projection e_all = spectral_projection(cut_all, Interval{-kInf, 1e-9});
  r.deficit = std::clamp(1.0 - e.trace(), 0.0, 1.0);
  r.bc_deficit = std::clamp(1.0 - e_all.trace(), 0.0, 1.0);
  for (std::size_t m = r.window_begin; m <= r.window_end; ++m)
    r.empirical_limsup = std::max(r.empirical_limsup, operator_norm(r_at(m) * e.op()));
  return r;
}

std::vector<PlotPoint> lil_plot_series(const DiagonalPath& path, const TailReport& report,
                                       std::size_t points) {
  std::vector<PlotPoint> out;
  if (report.degenerate || points == 0) return out;
  const PathSummary& s = path.summary();
  const std::size_t P = path.paths();
  // recompute the kept set: paths never above the threshold on an in-window valid block
  std::vector<char> kept(P, 1);
  std::vector<double> x(P, 0.0);
  std::vector<std::size_t> grid;
  const double N = static_cast<double>(report.window_end);
  for (std::size_t i = 0; i < points; ++i) {
    const auto n = static_cast<std::size_t>(std::round(std::exp(std::log(N) * static_cast<double>(i + 1) / points)));
    if (n >= 1 && (grid.empty() || n > grid.back())) grid.push_back(n);
  }
  std::size_t bi = 0;
  // first pass: exclusions
  for (std::size_t m = 1; m <= report.window_end; ++m) {
    path.advance(m, x);
    while (bi < report.blocks.size() && report.blocks[bi].k_end < m) ++bi;
    if (bi < report.blocks.size() && report.blocks[bi].in_window && m > report.blocks[bi].k_begin)
      for (std::size_t i = 0; i < P; ++i)
        if (std::abs(x[i]) / su(s, m) > report.threshold) kept[i] = 0;
  }
  // second pass: series on the grid
  std::fill(x.begin(), x.end(), 0.0);
  std::size_t gi = 0;
  for (std::size_t m = 1; m <= report.window_end && gi < grid.size(); ++m) {
    path.advance(m, x);
    if (m != grid[gi]) continue;
    const double inv = 1.0 / su(s, m);
    double all = 0.0, ke = 0.0;
    for (std::size_t i = 0; i < P; ++i) {
      const double v = std::abs(x[i]) * inv;
      all = std::max(all, v);
      if (kept[i]) ke = std::max(ke, v);
    }
    out.push_back({m, all, ke});
    ++gi;
  }
  return out;
}

io::Json to_json(const TailReport& r) {
  io::Json blocks = io::Json::array();
  for (const auto& b : r.blocks) {
    blocks.push_back({{"n", b.n},
                      {"k_n", b.k_begin},
                      {"k_n1", b.k_end},
                      {"s2", b.s2_end},
                      {"alpha", b.alpha_end},
                      {"lambda", b.bound.lambda},
                      {"p", b.bound.p},
                      {"bound_exact", b.bound.bound_exact},
                      {"bound_log", b.bound.bound_log},
                      {"bound_final", b.bound.bound_final},
                      {"probc_s", b.probc},
                      {"probc_rescaled", b.probc_rescaled},
                      {"reduction_ratio", b.reduction_ratio},
                      {"reduction_ok", b.reduction_ok},
                      {"valid", b.valid},
                      {"in_window", b.in_window},
                      {"partial_final", b.partial_final},
                      {"partial_exact", b.partial_exact},
                      {"partial_empirical", b.partial_empirical}});
  }
  return {{"semantics", r.semantics},
          {"horizon", r.horizon},
          {"paths", r.paths},
          {"degenerate", r.degenerate},
          {"truncated", r.truncated},
          {"N1", r.n1},
          {"N2", r.n2},
          {"n0", r.n0},
          {"window", {r.window_begin, r.window_end}},
          {"threshold", r.threshold},
          {"empirical_limsup", r.empirical_limsup},
          {"deficit", r.deficit},
          {"bc_deficit", r.bc_deficit},
          {"union_bound", r.union_bound},
          {"series_final", r.series_final},
          {"series_exact", r.series_exact},
          {"bc_applicable", r.bc_applicable},
          {"reduction_relation", r.reduction_relation},
          {"blocks", blocks}};
}

void write_block_csv(const TailReport& r, const std::filesystem::path& path) {
  io::CsvWriter w(path, {"n", "k_n", "s2", "bound_exact", "bound_final", "probc_s", "partial_sum", "probc_rescaled",
                         "valid", "in_window"});
  for (const auto& b : r.blocks) {
    w.cell(b.n).cell(b.k_begin).cell(b.s2_end).cell(b.bound.bound_exact).cell(b.bound.bound_final).cell(b.probc);
    w.cell(b.partial_final).cell(b.probc_rescaled).cell(b.valid).cell(b.in_window);
    w.end_row();
  }
}

// ---- a.u. limsup -------------------------------------------------------------------------

namespace {

// Largest j with j/n < eps.
std::size_t removable(std::size_t n, double eps) {
  std::size_t j = 0;
  while (j + 1 < n && static_cast<double>(j + 1) / static_cast<double>(n) < eps) ++j;
  return j;
}

}  // namespace

CellAuLimsup au_limsup_from_maxima(std::span<const double> point_max, double eps_proj) {
  if (point_max.empty()) throw DomainError("empty tail window");
  const std::size_t n = point_max.size();
  std::vector<double> sorted(point_max.begin(), point_max.end());
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  const double t = sorted[removable(n, eps_proj)];
  std::vector<double> e(n);
  std::size_t cut = 0;
  CellAuLimsup r;
  for (std::size_t i = 0; i < n; ++i) {
    e[i] = point_max[i] <= t ? 1.0 : 0.0;
    cut += e[i] == 0.0;
    if (e[i] != 0.0) r.K = std::max(r.K, point_max[i]);
  }
  r.deficit = static_cast<double>(cut) / static_cast<double>(n);
  r.e = DiagonalOperator(std::move(e));
  return r;
}

CellAuLimsup empirical_au_limsup(std::span<const DiagonalOperator> rs, double eps_proj) {
  if (rs.empty()) throw DomainError("empty tail window");
  std::vector<double> mx(rs.front().size(), 0.0);
  for (const auto& r : rs) {
    if (r.size() != mx.size()) throw DimensionError("window members differ in size");
    for (std::size_t i = 0; i < mx.size(); ++i) mx[i] = std::max(mx[i], std::abs(r[i]));
  }
  return au_limsup_from_maxima(mx, eps_proj);
}

DenseAuLimsup empirical_au_limsup(std::span<const Operator> rs, double eps_proj) {
  if (rs.empty()) throw DomainError("empty tail window");
  const auto b = column_maximal_norm_bounds(rs, 2.0).certificate;
  const RealVector ev = eigenvalues(b);  // ascending
  const auto d = static_cast<std::size_t>(ev.size());
  const double t = std::max(0.0, ev(static_cast<Index>(d - 1 - removable(d, eps_proj))));
  DenseAuLimsup r;
  r.e = spectral_projection(b, Interval{-kInf, t});
  r.deficit = std::clamp(1.0 - r.e.trace(), 0.0, 1.0);
  for (const auto& x : rs) r.K = std::max(r.K, operator_norm(x * r.e.op()));
  return r;
}

// ---- baseline -------------------------------------------------------------------------------

double quantile(std::vector<double> v, double q) {
  if (v.empty()) throw DomainError("quantile of empty data");
  std::sort(v.begin(), v.end());
  const double h = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (h - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

BaselineReport scalar_kolmogorov_baseline(const BaselineConfig& cfg) {
  if (cfg.paths < 1 || cfg.horizon < 1) throw DomainError("baseline needs paths >= 1 and horizon >= 1");
  if (cfg.law == IncrementLaw::uniform) throw DomainError("baseline supports rademacher and alternating increments");
  const std::size_t P = cfg.paths;
  const std::size_t N = cfg.horizon;
  const std::size_t words = (P + 63) / 64;
  const CounterRng rng(cfg.seed, 0, "baseline");
  const auto& k = simd::active();
  std::vector<double> x(P, 0.0), run(P, 0.0);
  std::vector<std::uint64_t> bits(words);
  const auto start = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(cfg.window_fraction * N)));
  for (std::size_t n = 1; n <= N; ++n) {
    if (cfg.law == IncrementLaw::rademacher) {
      for (std::size_t w = 0; w < words; ++w) bits[w] = rng.at(n * words + w);
      k.rademacher_add(x.data(), bits.data(), 1.0, P);
    } else {
      const double s = n % 2 == 1 ? 1.0 : -1.0;
      for (auto& v : x) v += s;
    }
    if (n >= start) {
      const double dn = static_cast<double>(n);
      k.abs_max_update(run.data(), x.data(), 1.0 / std::sqrt(dn * iterlog(dn)), P);
    }
  }
  BaselineReport r;
  r.paths = P;
  r.horizon = N;
  r.median = quantile(run, 0.5);
  r.q90 = quantile(run, 0.9);
  r.q95 = quantile(run, 0.95);
  r.q99 = quantile(run, 0.99);
  r.max = *std::max_element(run.begin(), run.end());
  r.frac_above_2 = static_cast<double>(k.count_above(run.data(), 2.0, P)) / static_cast<double>(P);
  r.pre_asymptotic = N < 100000 || P < 1000;
  r.running_max = std::move(run);
  return r;
}

io::Json to_json(const BaselineReport& r) {
  return {{"paths", r.paths},   {"horizon", r.horizon}, {"median", r.median},
          {"q90", r.q90},       {"q95", r.q95},         {"q99", r.q99},
          {"max", r.max},       {"frac_above_2", r.frac_above_2},
          {"pre_asymptotic", r.pre_asymptotic}};
}

// ---- semicircle -----------------------------------------------------------------------------

SemicircleReport semicircular_demo(const SemicircleConfig& cfg) {
  if (cfg.size < 50) throw DomainError("semicircular demo needs matrix size >= 50");
  if (cfg.steps < 1) throw DomainError("semicircular demo needs at least one step");
  std::vector<std::size_t> cps = cfg.checkpoints;
  if (cps.empty()) cps = {1, 10, 15, 100, 1000, 10000};
  std::sort(cps.begin(), cps.end());
  cps.erase(std::unique(cps.begin(), cps.end()), cps.end());
  std::erase_if(cps, [&](std::size_t c) { return c == 0 || c > cfg.steps; });
  const bool want_ks = cfg.steps >= 100;
  if (want_ks && !std::binary_search(cps.begin(), cps.end(), std::size_t{100})) {
    cps.push_back(100);
    std::sort(cps.begin(), cps.end());
  }

  SemicircleReport r;
  r.size = cfg.size;
  GueStream stream(cfg.size, cfg.seed);
  Matrix acc = Matrix::Zero(cfg.size, cfg.size);
  std::size_t ci = 0;
  for (std::size_t n = 1; n <= cps.back(); ++n) {
    acc += stream.next();
    if (n != cps[ci]) continue;
    ++ci;
    const RealVector ev = eigenvalues(Operator(acc, true));
    const double nrm = std::max(std::abs(ev(0)), std::abs(ev(ev.size() - 1)));
    const double dn = static_cast<double>(n);
    r.points.push_back({n, nrm, nrm / std::sqrt(dn * iterlog(dn))});
    if (n == 100) {
      std::vector<double> scaled(static_cast<std::size_t>(ev.size()));
      for (Index i = 0; i < ev.size(); ++i) scaled[static_cast<std::size_t>(i)] = ev(i) / 10.0;
      r.ks_at_100 = ks_distance_semicircle(scaled);
    }
  }
  auto stat_at = [&](std::size_t n) -> std::optional<double> {
    for (const auto& p : r.points)
      if (p.n == n) return p.statistic;
    return std::nullopt;
  };
  const auto a = stat_at(100), b = stat_at(10000);
  if (a && b) r.decreasing = *b < *a;
  return r;
}

io::Json to_json(const SemicircleReport& r) {
  io::Json pts = io::Json::array();
  for (const auto& p : r.points) pts.push_back({{"n", p.n}, {"norm", p.norm}, {"statistic", p.statistic}});
  io::Json j{{"size", r.size}, {"points", pts}};
  j["ks_at_100"] = r.ks_at_100 ? io::Json(*r.ks_at_100) : io::Json(nullptr);
  j["decreasing"] = r.decreasing ? io::Json(*r.decreasing) : io::Json(nullptr);
  return j;
}

}  // namespace nclil
