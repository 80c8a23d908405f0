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
#include "nclil/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iostream>
#include <map>
#include <numeric>
#include <sstream>

#include "CLI11.hpp"
#include "nclil/error.hpp"
#include "nclil/filtration.hpp"
#include "nclil/lil.hpp"
#include "nclil/parallel.hpp"
#include "nclil/rng.hpp"
#include "nclil/simd/kernels.hpp"
#include "nclil/tail.hpp"

namespace nclil::harness {
namespace {

namespace fs = std::filesystem;

Json model_desc(const char* kind, int m, int n) { return Json{{"kind", kind}, {"m", m}, {"n", n}}; }

// ---- typed access to a resolved document -----------------------------------

const Json& at(const Json& j, const std::string& key) {
  auto it = j.find(key);
  if (it == j.end()) throw ConfigError("config: missing key '" + key + "'");
  return *it;
}

double number(const Json& j, const std::string& key) {
  const Json& v = at(j, key);
  if (!v.is_number()) throw ConfigError("config: '" + key + "' must be a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) throw ConfigError("config: '" + key + "' must be finite");
  return x;
}

long long integer(const Json& j, const std::string& key) {
  const Json& v = at(j, key);
  if (v.is_number_unsigned()) {
    const auto u = v.get<std::uint64_t>();
    if (u > static_cast<std::uint64_t>(std::numeric_limits<long long>::max()))
      throw ConfigError("config: '" + key + "' out of range");
    return static_cast<long long>(u);
  }
  if (!v.is_number_integer()) throw ConfigError("config: '" + key + "' must be an integer");
  return v.get<long long>();
}

long long integer_at_least(const Json& j, const std::string& key, long long lo) {
  const long long v = integer(j, key);
  if (v < lo) throw ConfigError("config: '" + key + "' must be >= " + std::to_string(lo));
  return v;
}

std::string text(const Json& j, const std::string& key) {
  const Json& v = at(j, key);
  if (!v.is_string()) throw ConfigError("config: '" + key + "' must be a string");
  return v.get<std::string>();
}

std::vector<double> numbers(const Json& j, const std::string& key) {
  const Json& v = at(j, key);
  if (!v.is_array()) throw ConfigError("config: '" + key + "' must be an array of numbers");
  std::vector<double> out;
  for (const auto& e : v) {
    if (!e.is_number()) throw ConfigError("config: '" + key + "' must be an array of numbers");
    out.push_back(e.get<double>());
  }
  return out;
}

std::vector<AlgebraModel> models(const Json& j, const std::string& key, bool dense_only) {
  const Json& v = at(j, key);
  if (!v.is_array() || v.empty()) throw ConfigError("config: '" + key + "' must be a non-empty array of models");
  std::vector<AlgebraModel> out;
  for (const auto& e : v) {
    out.push_back(io::model_from_json(e));
    if (dense_only && !out.back().dense())
      throw ConfigError("config: '" + key + "' accepts tensor and pinching models only");
  }
  return out;
}

IncrementLaw parse_law(const std::string& s) {
  if (s == "rademacher") return IncrementLaw::rademacher;
  if (s == "uniform") return IncrementLaw::uniform;
  if (s == "alternating") return IncrementLaw::alternating;
  throw ConfigError("config: unknown increment law '" + s + "' (rademacher|uniform|alternating)");
}

Coupling parse_coupling(const std::string& s) {
  if (s == "haar") return Coupling::haar;
  if (s == "none") return Coupling::none;
  throw ConfigError("config: unknown coupling '" + s + "' (haar|none)");
}

LILParameters lil_params(const Json& p) {
  LILParameters lp;
  lp.eta = number(p, "eta");
  lp.delta = number(p, "delta");
  lp.delta_prime = number(p, "delta_prime");
  lp.eps = number(p, "eps");
  lp.eps_prime = number(p, "eps_prime");
  lp.beta = number(p, "beta");
  lp.eps_proj = number(p, "eps_proj");
  lp.window_fraction = number(p, "window_fraction");
  lp.max_blocks = static_cast<int>(integer_at_least(p, "max_blocks", 1));
  return lp;
}

std::string type_name(const Json& v) {
  if (v.is_number()) return "number";
  return v.type_name();
}

// ---- trial scaffolding ------------------------------------------------------

std::string kv(std::initializer_list<std::pair<const char*, double>> items) {
  std::string s;
  for (const auto& [k, v] : items) {
    if (!s.empty()) s += ';';
    s += k;
    s += '=';
    s += io::format_double(v);
  }
  return s;
}

std::string model_name(const AlgebraModel& m) {
  return std::string(to_string(m.kind())) + "(m=" + std::to_string(m.site_dim()) + ";n=" +
         std::to_string(m.depth()) + ")";
}

struct SuiteContext {
  const Json& cfg;
  std::size_t replica;
  std::uint64_t key;
  int threads;
};

/// Runs trial(i) for every selected index and concatenates rows in index order.
template <class F>
SuiteResult run_trials(const SuiteContext& ctx, const std::string& command, std::size_t count, F&& trial) {
  std::vector<std::size_t> idx;
  const Json& only = at(ctx.cfg, "trial");
  if (only.is_null()) {
    idx.resize(count);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
  } else {
    const auto t = static_cast<std::size_t>(integer_at_least(ctx.cfg, "trial", 0));
    if (t >= count) throw ConfigError("config: 'trial' must be < " + std::to_string(count));
    idx.push_back(t);
  }
  auto per = parallel_map<std::vector<TrialRow>>(idx.size(), ctx.threads, [&](std::size_t j) {
    auto rows = trial(idx[j]);
    for (auto& r : rows) {
      r.replica = ctx.replica;
      r.trial = idx[j];
    }
    return rows;
  });
  SuiteResult res;
  res.command = command;
  res.trials = idx.size();
  for (auto& rows : per)
    for (auto& r : rows) res.rows.push_back(std::move(r));
  return res;
}

void aggregate(SuiteResult& r) {
  r.violations = 0;
  r.inconclusive = 0;
  r.min_margin = std::numeric_limits<double>::infinity();
  for (const auto& row : r.rows) {
    if (row.verdict == "violated") ++r.violations;
    if (row.verdict == "inconclusive") ++r.inconclusive;
    if (!std::isnan(row.margin)) r.min_margin = std::min(r.min_margin, row.margin);
  }
}

// ---- suites -------------------------------------------------------------------

SuiteResult suite_ce(const SuiteContext& ctx) {
  const auto ms = models(ctx.cfg, "models", false);
  const int samples = static_cast<int>(integer(ctx.cfg, "samples"));
  const double tol = number(ctx.cfg, "tol");
  std::vector<CeAxiomReport> reports(ms.size());
  auto res = run_trials(ctx, "verify-ce", ms.size(), [&](std::size_t i) {
    const auto rep = verify_ce_axioms(ms[i], samples, trial_seed(ctx.key, "ce", i));
    reports[i] = rep;
    TrialRow row;
    row.model = model_name(ms[i]);
    row.n = static_cast<std::size_t>(ms[i].depth());
    row.params = kv({{"samples", samples}, {"unit", rep.unit}, {"bimodule", rep.bimodule}, {"trace", rep.trace},
                     {"tower", rep.tower}, {"positivity", rep.positivity}, {"contraction", rep.contraction},
                     {"self_adjoint", rep.self_adjoint}, {"jensen", rep.jensen}});
    row.lhs = rep.worst();
    row.rhs = tol;
    row.margin = tol - row.lhs;
    row.verdict = rep.pass(tol) ? "holds" : "violated";
    return std::vector<TrialRow>{row};
  });
  double worst = 0.0;
  for (const auto& row : res.rows) worst = std::max(worst, row.lhs);
  res.extra = Json{{"worst_residual", worst}, {"tol", tol}};
  return res;
}

BoundSpec random_bounds(CounterRng& rng, std::size_t n) {
  std::vector<double> v(n);
  for (auto& x : v) x = 0.25 + 1.75 * to_unit(rng());
  return BoundSpec::explicit_list(std::move(v));
}

SuiteResult suite_expineq(const SuiteContext& ctx) {
  const auto trials = static_cast<std::size_t>(integer(ctx.cfg, "trials"));
  const auto eps_list = numbers(ctx.cfg, "eps");
  const auto points = static_cast<std::size_t>(integer(ctx.cfg, "lambda_points"));
  const int dense_max = static_cast<int>(integer(ctx.cfg, "dense_max_depth"));
  const int cell_max = static_cast<int>(integer(ctx.cfg, "cell_max_depth"));
  const auto mc_max = static_cast<std::size_t>(integer(ctx.cfg, "diagonal_max_horizon"));
  const auto mc_paths = static_cast<std::size_t>(integer(ctx.cfg, "diagonal_paths"));

  auto res = run_trials(ctx, "verify-expineq", trials, [&](std::size_t i) {
    CounterRng rng(trial_seed(ctx.key, "expineq", i));
    auto pick = [&](int lo, int hi) { return lo + static_cast<int>(rng() % static_cast<std::uint64_t>(hi - lo + 1)); };
    std::string name;
    std::size_t n = 0;
    double M = 0.0, D2 = 0.0;
    std::function<ExpMomentSides(const ExpIneqParams&)> sides;

    // Mixed models: coupled and uncoupled tensor products, block pinching,
    // exact cell martingales and Monte Carlo paths.
    switch (i % 5) {
      case 0:
      case 1: {
        const auto model = AlgebraModel::make(ModelKind::tensor, 2, pick(2, dense_max));
        TensorGenSpec spec;
        spec.bounds = random_bounds(rng, model.depth());
        spec.coupling = i % 5 == 0 ? Coupling::haar : Coupling::none;
        auto path = std::make_shared<MartingalePath>(gen_tensor_martingale(model, spec, rng()));
        name = model_name(model) + (i % 5 == 0 ? "/haar" : "/none");
        n = path->horizon();
        M = *std::max_element(path->summary.dnorm.begin(), path->summary.dnorm.end());
        D2 = path->summary.s2.back();
        sides = [path, n](const ExpIneqParams& p) { return exp_moment_sides(*path, n, p); };
        break;
      }
      case 2: {
        const auto model = AlgebraModel::make(ModelKind::pinching, 2, pick(2, dense_max));
        auto path = std::make_shared<MartingalePath>(gen_model_martingale(model, random_bounds(rng, model.depth()), rng()));
        name = model_name(model);
        n = path->horizon();
        M = *std::max_element(path->summary.dnorm.begin(), path->summary.dnorm.end());
        D2 = path->summary.s2.back();
        sides = [path, n](const ExpIneqParams& p) { return exp_moment_sides(*path, n, p); };
        break;
      }
      case 3: {
        const int m = pick(2, 3);
        const int depth = pick(2, m == 2 ? cell_max : std::min(cell_max, 7));
        const auto model = AlgebraModel::make(ModelKind::diagonal, m, depth);
        const CellLaw law = (i / 5) % 2 ? CellLaw::gaussian : CellLaw::rademacher;
        auto path = std::make_shared<CellPath>(gen_cell_martingale(model, random_bounds(rng, depth), law, rng()));
        name = model_name(model) + (law == CellLaw::gaussian ? "/gaussian" : "/rademacher");
        n = path->horizon();
        M = *std::max_element(path->summary.dnorm.begin(), path->summary.dnorm.end());
        D2 = path->summary.s2.back();
        sides = [path, n](const ExpIneqParams& p) { return exp_moment_sides(*path, n, p); };
        break;
      }
      default: {
        DiagonalGenSpec spec;
        spec.horizon = static_cast<std::size_t>(pick(10, static_cast<int>(mc_max)));
        spec.law = static_cast<IncrementLaw>(rng() % 3);
        spec.variance = {0.25 + 3.75 * to_unit(rng())};
        spec.paths = mc_paths;
        auto path = std::make_shared<DiagonalPath>(spec, rng());
        auto x = std::make_shared<DiagonalOperator>(path->partial_sum(spec.horizon));
        static const char* laws[] = {"rademacher", "uniform", "alternating"};
        name = std::string("montecarlo(P=") + std::to_string(spec.paths) + ")/" + laws[static_cast<int>(spec.law)];
        n = spec.horizon;
        M = *std::max_element(path->summary().dnorm.begin(), path->summary().dnorm.end());
        D2 = path->summary().s2.back();
        sides = [path, x, n](const ExpIneqParams& p) { return exp_moment_sides(*path, n, x->values(), p); };
        break;
      }
    }

    std::vector<TrialRow> rows;
    for (double eps : eps_list) {
      ExpIneqParams p{M, D2, eps, 0.0};
      const double lmax = p.lambda_max();
      for (std::size_t j = 0; j < points; ++j) {
        p.lambda = j + 1 == points ? lmax : lmax * static_cast<double>(j) / static_cast<double>(points - 1);
        const auto s = sides(p);
        TrialRow row;
        row.model = name;
        row.n = n;
        row.params = kv({{"eps", eps}, {"lambda", p.lambda}, {"M", M}, {"D2", D2}, {"log", 1}});
        row.lhs = s.log_lhs;
        row.rhs = s.log_rhs;
        row.margin = s.margin();
        row.verdict = s.holds ? "holds" : "violated";
        rows.push_back(std::move(row));
      }
    }
    return rows;
  });
  res.extra = Json{{"checks", res.rows.size()}, {"sides", "log"}};
  return res;
}

SuiteResult suite_doob(const SuiteContext& ctx) {
  const auto ms = models(ctx.cfg, "models", false);
  const auto ps = numbers(ctx.cfg, "p");
  const auto seeds = static_cast<std::size_t>(integer(ctx.cfg, "seeds"));
  const auto first = static_cast<std::size_t>(integer(ctx.cfg, "m"));
  const double bound = number(ctx.cfg, "bound");
  const Coupling coupling = parse_coupling(text(ctx.cfg, "coupling"));
  ColumnNormOptions opt;
  opt.max_iterations = static_cast<int>(integer(ctx.cfg, "max_iterations"));
  opt.rel_tol = number(ctx.cfg, "rel_tol");

  auto res = run_trials(ctx, "verify-doob", ms.size() * seeds, [&](std::size_t i) {
    const auto& model = ms[i / seeds];
    const std::uint64_t ts = trial_seed(ctx.key, "doob", i);
    std::vector<TrialRow> rows;
    auto emit = [&](const DoobResult& r, double p, std::size_t n) {
      TrialRow row;
      row.model = model_name(model);
      row.n = n;
      row.params = kv({{"p", p}, {"lower", r.lower}, {"gap", r.gap()}, {"xn_norm", r.xn_norm}});
      row.lhs = r.upper;
      row.rhs = r.rhs;
      row.margin = r.rhs - r.upper;
      // A certified violation: the certificate is tight and still above the constant.
      const bool certified = r.gap() >= 0.99 && r.upper > r.rhs * (1.0 + kDoobTol);
      row.verdict = r.status == DoobStatus::violated || certified ? "violated" : to_string(r.status);
      rows.push_back(std::move(row));
    };
    if (model.dense()) {
      const auto path = model.kind() == ModelKind::tensor
                            ? gen_tensor_martingale(model, {BoundSpec::constant(bound), coupling, std::nullopt}, ts)
                            : gen_model_martingale(model, BoundSpec::constant(bound), ts);
      const std::size_t n = path.horizon();
      if (first > n) throw ConfigError("config: 'm' exceeds the model depth");
      for (double p : ps) emit(doob_consequence_check(path, first, n, p, opt), p, n);
    } else {
      const auto path = gen_cell_martingale(model, BoundSpec::constant(bound), CellLaw::rademacher, ts);
      const std::size_t n = path.horizon();
      if (first > n) throw ConfigError("config: 'm' exceeds the model depth");
      for (double p : ps) emit(doob_consequence_check(path, first, n, p), p, n);
    }
    return rows;
  });

  // Observed constants: how close the certificates come to 2^{2/p}.
  Json per_p = Json::object();
  for (double p : ps) {
    std::size_t runs = 0, holds = 0;
    double max_ratio = 0.0;
    const std::string key = "p=" + io::format_double(p);
    for (const auto& row : res.rows) {
      if (row.params.rfind(key + ";", 0) != 0) continue;
      ++runs;
      holds += row.holds();
      const double xn = row.rhs / std::pow(2.0, 2.0 / p);
      if (xn > 0.0) max_ratio = std::max(max_ratio, row.lhs / xn);
    }
    per_p[io::format_double(p)] = Json{{"runs", runs},
                                       {"holds", holds},
                                       {"holds_rate", runs ? double(holds) / double(runs) : 1.0},
                                       {"max_upper_over_xn", max_ratio},
                                       {"constant", std::pow(2.0, 2.0 / p)}};
  }
  std::size_t holds = 0;
  for (const auto& row : res.rows) holds += row.holds();
  res.extra = Json{{"holds_rate", res.rows.empty() ? 1.0 : double(holds) / double(res.rows.size())},
                   {"by_p", per_p}};
  return res;
}

SuiteResult suite_dualdoob(const SuiteContext& ctx) {
  const auto ms = models(ctx.cfg, "models", true);
  const auto ps = numbers(ctx.cfg, "p");
  const auto trials = static_cast<std::size_t>(integer(ctx.cfg, "trials"));
  auto res = run_trials(ctx, "verify-dualdoob", ms.size() * trials, [&](std::size_t i) {
    const auto& model = ms[i / trials];
    CounterRng rng(trial_seed(ctx.key, "dualdoob", i));
    std::vector<Operator> a;
    for (int k = 0; k < model.depth(); ++k) a.push_back(random_general(model, model.depth(), rng).gram());
    std::vector<TrialRow> rows;
    for (double p : ps) {
      const auto r = dual_doob_check(model, a, p);
      TrialRow row;
      row.model = model_name(model);
      row.n = a.size();
      row.params = kv({{"p", p}});
      row.lhs = r.lhs;
      row.rhs = r.rhs;
      row.margin = r.rhs - r.lhs;
      row.verdict = r.holds ? "holds" : "violated";
      rows.push_back(std::move(row));
    }
    return rows;
  });
  return res;
}

template <class Family, class Bounds>
void chebyshev_grid(const Family& xs, double p, const Bounds& bounds, double tmax, std::size_t points,
                    const std::string& name, std::vector<TrialRow>& rows) {
  double prev_s = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < points; ++j) {
    // geometric grid from tmax/50 to tmax
    const double t = tmax * std::pow(50.0, -1.0 + static_cast<double>(j) / static_cast<double>(points - 1));
    const auto c = chebyshev_bound(xs, t, p, bounds);
    const bool monotone = c.probc_s <= prev_s;
    prev_s = c.probc_s;
    TrialRow row;
    row.model = name;
    row.n = xs.size();
    row.params = kv({{"p", p}, {"t", t}, {"upper", bounds.upper}, {"monotone", monotone ? 1 : 0}});
    row.lhs = c.probc_s;
    row.rhs = c.rhs;
    row.margin = c.rhs - c.probc_s;
    row.verdict = c.holds && monotone ? "holds" : "violated";
    rows.push_back(std::move(row));
  }
}

SuiteResult suite_chebyshev(const SuiteContext& ctx) {
  const auto ps = numbers(ctx.cfg, "p");
  const auto trials = static_cast<std::size_t>(integer(ctx.cfg, "trials"));
  const auto points = static_cast<std::size_t>(integer(ctx.cfg, "grid_points"));
  const auto dense = io::model_from_json(at(ctx.cfg, "dense_model"));
  const auto cell = io::model_from_json(at(ctx.cfg, "cell_model"));
  if (!dense.dense() || cell.dense())
    throw ConfigError("config: dense_model must be tensor/pinching and cell_model diagonal");
  return run_trials(ctx, "verify-chebyshev", trials, [&](std::size_t i) {
    const std::uint64_t ts = trial_seed(ctx.key, "chebyshev", i);
    std::vector<TrialRow> rows;
    if (i % 2 == 0) {
      const auto path = dense.kind() == ModelKind::tensor
                            ? gen_tensor_martingale(dense, {BoundSpec::constant(1.0), Coupling::haar, std::nullopt}, ts)
                            : gen_model_martingale(dense, BoundSpec::constant(1.0), ts);
      const std::vector<Operator> xs(path.partials.begin() + 1, path.partials.end());
      for (double p : ps) {
        const auto b = column_maximal_norm_bounds(xs, p, {100, 1e-4});
        chebyshev_grid(xs, p, b, operator_norm(b.certificate), points, model_name(dense), rows);
      }
    } else {
      const CellLaw law = (i / 2) % 2 ? CellLaw::gaussian : CellLaw::rademacher;
      const auto path = gen_cell_martingale(cell, BoundSpec::constant(1.0), law, ts);
      const std::vector<DiagonalOperator> xs(path.partials.begin() + 1, path.partials.end());
      for (double p : ps) {
        const auto b = column_maximal_norm_bounds(xs, p);
        chebyshev_grid(xs, p, b, operator_norm(b.certificate), points, model_name(cell), rows);
      }
    }
    return rows;
  });
}

SuiteResult suite_scalarineq(const SuiteContext& ctx) {
  const double u_min = number(ctx.cfg, "u_min"), u_max = number(ctx.cfg, "u_max");
  const double p_min = number(ctx.cfg, "p_min"), p_max = number(ctx.cfg, "p_max");
  const auto u_points = static_cast<std::size_t>(integer(ctx.cfg, "u_points"));
  const auto p_points = static_cast<std::size_t>(integer(ctx.cfg, "p_points"));
  const double scale = number(ctx.cfg, "rhs_scale");
  auto lerp = [](double a, double b, std::size_t j, std::size_t count) {
    return count == 1 ? a : a + (b - a) * static_cast<double>(j) / static_cast<double>(count - 1);
  };
  return run_trials(ctx, "verify-scalarineq", p_points, [&](std::size_t i) {
    const double p = lerp(p_min, p_max, i, p_points);
    std::vector<TrialRow> rows;
    for (std::size_t j = 0; j < u_points; ++j) {
      const double u = lerp(u_min, u_max, j, u_points);
      const auto r = scalar_power_exp_bound(u, p);
      TrialRow row;
      row.model = "scalar";
      row.n = 1;
      row.params = kv({{"p", p}, {"u", u}, {"log", 1}});
      row.lhs = r.log_lhs;
      row.rhs = r.log_rhs + std::log(scale);
      row.margin = row.rhs - row.lhs;
      const bool ok = scale == 1.0 ? r.holds : row.margin >= 0.0;
      row.verdict = ok ? "holds" : "violated";
      rows.push_back(std::move(row));
    }
    return rows;
  });
}

// ---- experiments ------------------------------------------------------------------

fs::path replica_dir(const Json& cfg, std::size_t r) {
  fs::path dir = text(cfg, "out");
  if (integer(cfg, "replicas") > 1) dir /= "replica-" + std::to_string(r);
  fs::create_directories(dir);
  return dir;
}

std::vector<std::size_t> replica_range(const Json& cfg) {
  std::vector<std::size_t> rs(static_cast<std::size_t>(integer(cfg, "replicas")));
  std::iota(rs.begin(), rs.end(), static_cast<std::size_t>(integer(cfg, "first_replica")));
  return rs;
}

Json run_lil(const Json& cfg, std::size_t r, std::ostream& log) {
  const auto params = lil_params(at(cfg, "params"));
  const Json& g = at(cfg, "generator");
  const std::string kind = text(cfg, "model");
  const std::uint64_t seed = replica_seed(static_cast<std::uint64_t>(integer(cfg, "seed")), r);
  const fs::path dir = replica_dir(cfg, r);
  TailReport report;
  Json extra = Json::object();
  if (kind == "diagonal") {
    DiagonalGenSpec spec;
    spec.horizon = static_cast<std::size_t>(integer(g, "horizon"));
    spec.paths = static_cast<std::size_t>(integer(g, "paths"));
    spec.law = parse_law(text(g, "law"));
    spec.variance = numbers(g, "variance");
    const DiagonalPath path(spec, seed);
    plan_lil_blocks(path.summary(), params);  // fail fast on a short horizon
    report = run_lil_experiment(path, params);
    if (at(cfg, "plot").get<bool>()) {
      io::CsvWriter csv(dir / "plot.csv", {"n", "r_all", "r_e"});
      for (const auto& pt : lil_plot_series(path, report, static_cast<std::size_t>(integer(cfg, "plot_points"))))
        csv.cell(pt.n).cell(pt.r_all).cell(pt.r_e).end_row();
    }
    if (at(cfg, "path_summary").get<bool>()) write_path_summary_csv(path.summary(), dir / "path_summary.csv");
  } else {
    const auto model = AlgebraModel::make(parse_model_kind(kind), static_cast<int>(integer(g, "m")),
                                          static_cast<int>(integer(g, "depth")));
    const auto bounds = BoundSpec::constant(number(g, "bound"));
    MartingalePath path = [&] {
      if (model.kind() == ModelKind::tensor) {
        const auto plan = plan_tensor_martingale(model, {bounds, parse_coupling(text(g, "coupling")), std::nullopt}, seed);
        plan_lil_blocks(plan.summary, params);  // closed-form statistics first; cheap
        return materialize(plan);
      }
      auto p = gen_model_martingale(model, bounds, seed);
      plan_lil_blocks(p.summary, params);
      return p;
    }();
    report = run_lil_experiment(path, params);
    if (at(cfg, "path_summary").get<bool>()) write_path_summary_csv(path.summary, dir / "path_summary.csv");
  }
  write_block_csv(report, dir / "blocks.csv");
  Json j = to_json(report);
  j["replica"] = r;
  j["deficit_below_target"] = report.deficit < params.eps_proj;
  j["limsup_within_threshold"] = report.empirical_limsup <= params.beta * (1.0 + params.delta_prime);
  log << "lil-run[" << r << "]: K=" << report.empirical_limsup << " deficit=" << report.deficit
      << " n0=" << report.n0 << " blocks=" << report.blocks.size() << '\n';
  return j;
}

Json run_baseline(const Json& cfg, std::size_t r, std::ostream& log) {
  BaselineConfig bc;
  bc.paths = static_cast<std::size_t>(integer(cfg, "paths"));
  bc.horizon = static_cast<std::size_t>(integer(cfg, "horizon"));
  bc.law = parse_law(text(cfg, "law"));
  bc.window_fraction = number(cfg, "window_fraction");
  bc.seed = replica_seed(static_cast<std::uint64_t>(integer(cfg, "seed")), r);
  const auto rep = scalar_kolmogorov_baseline(bc);
  const fs::path dir = replica_dir(cfg, r);
  io::CsvWriter csv(dir / "running_max.csv", {"path", "running_max"});
  for (std::size_t i = 0; i < rep.running_max.size(); ++i) csv.cell(i).cell(rep.running_max[i]).end_row();
  Json j = to_json(rep);
  j["replica"] = r;
  log << "baseline-scalar[" << r << "]: median=" << rep.median << " frac_above_2=" << rep.frac_above_2 << '\n';
  return j;
}

Json run_semicircle(const Json& cfg, std::size_t r, std::ostream& log) {
  SemicircleConfig sc;
  sc.size = static_cast<Index>(integer(cfg, "size"));
  sc.steps = static_cast<std::size_t>(integer(cfg, "steps"));
  for (double c : numbers(cfg, "checkpoints")) sc.checkpoints.push_back(static_cast<std::size_t>(c));
  sc.seed = replica_seed(static_cast<std::uint64_t>(integer(cfg, "seed")), r);
  const auto rep = semicircular_demo(sc);
  const fs::path dir = replica_dir(cfg, r);
  io::CsvWriter csv(dir / "points.csv", {"n", "norm", "statistic"});
  for (const auto& pt : rep.points) csv.cell(pt.n).cell(pt.norm).cell(pt.statistic).end_row();
  Json j = to_json(rep);
  j["replica"] = r;
  log << "demo-semicircular[" << r << "]: " << rep.points.size() << " checkpoints";
  if (rep.ks_at_100) log << ", ks(100)=" << *rep.ks_at_100;
  log << '\n';
  return j;
}

// ---- flags ----------------------------------------------------------------------

enum class FlagType { integer, number, text, numbers, boolean };

struct FlagSpec {
  std::string name;     // without leading dashes
  std::string pointer;  // JSON pointer into the config
  FlagType type;
  std::string help;
};

std::vector<FlagSpec> flags_for(const std::string& cmd) {
  using T = FlagType;
  std::vector<FlagSpec> f = {
      {"seed", "/seed", T::integer, "master seed"},
      {"replicas", "/replicas", T::integer, "number of replicas"},
      {"first-replica", "/first_replica", T::integer, "index of the first replica"},
      {"threads", "/threads", T::integer, "worker threads (0: available parallelism)"},
      {"out", "/out", T::text, "output directory"},
  };
  auto add = [&](std::initializer_list<FlagSpec> more) { f.insert(f.end(), more); };
  if (is_verifier(cmd)) add({{"trial", "/trial", T::integer, "run a single trial index"}});
  if (cmd == "verify-ce") add({{"samples", "/samples", T::integer, "samples per model"}});
  if (cmd == "verify-expineq")
    add({{"trials", "/trials", T::integer, "random martingales"},
         {"eps", "/eps", T::numbers, "eps values in (0,1]"},
         {"lambda-points", "/lambda_points", T::integer, "lambda grid size"}});
  if (cmd == "verify-doob")
    add({{"p", "/p", T::numbers, "exponents (>= 4)"}, {"seeds", "/seeds", T::integer, "seeds per model"}});
  if (cmd == "verify-dualdoob")
    add({{"p", "/p", T::numbers, "exponents in [1,2]"}, {"trials", "/trials", T::integer, "trials per model"}});
  if (cmd == "verify-chebyshev")
    add({{"p", "/p", T::numbers, "exponents (>= 2)"},
         {"trials", "/trials", T::integer, "random families"},
         {"grid-points", "/grid_points", T::integer, "t grid size"}});
  if (cmd == "verify-scalarineq")
    add({{"u-points", "/u_points", T::integer, "u grid size"},
         {"p-points", "/p_points", T::integer, "p grid size"},
         {"rhs-scale", "/rhs_scale", T::number, "multiply the right side (harness self-test)"}});
  if (cmd == "lil-run")
    add({{"model", "/model", T::text, "diagonal | tensor | pinching"},
         {"horizon", "/generator/horizon", T::integer, "steps N (diagonal)"},
         {"paths", "/generator/paths", T::integer, "Monte Carlo paths P (diagonal)"},
         {"law", "/generator/law", T::text, "rademacher | uniform | alternating"},
         {"depth", "/generator/depth", T::integer, "tensor/pinching depth"},
         {"eta", "/params/eta", T::number, "block ratio in (1,2)"},
         {"delta", "/params/delta", T::number, "delta"},
         {"delta-prime", "/params/delta_prime", T::number, "delta'"},
         {"eps", "/params/eps", T::number, "eps"},
         {"eps-prime", "/params/eps_prime", T::number, "eps'"},
         {"beta", "/params/beta", T::number, "beta"},
         {"eps-proj", "/params/eps_proj", T::number, "target projection deficit"},
         {"plot", "/plot", T::boolean, "write plot.csv"},
         {"path-summary", "/path_summary", T::boolean, "write path_summary.csv"}});
  if (cmd == "baseline-scalar")
    add({{"paths", "/paths", T::integer, "paths"},
         {"horizon", "/horizon", T::integer, "steps"},
         {"law", "/law", T::text, "rademacher | uniform | alternating"}});
  if (cmd == "demo-semicircular")
    add({{"size", "/size", T::integer, "matrix size"}, {"steps", "/steps", T::integer, "increments"}});
  return f;
}

Json flag_value(const FlagSpec& f, const std::vector<std::string>& raw) {
  try {
    switch (f.type) {
      case FlagType::text:
        return raw.back();
      case FlagType::boolean:
        return raw.empty() || raw.back() == "true" || raw.back() == "1";
      case FlagType::integer: {
        std::size_t pos = 0;
        const std::string& s = raw.back();
        if (!s.empty() && s[0] == '-') {
          const long long v = std::stoll(s, &pos);
          if (pos != s.size()) break;
          return v;
        }
        const unsigned long long v = std::stoull(s, &pos);
        if (pos != s.size()) break;
        return static_cast<std::uint64_t>(v);
      }
      case FlagType::number: {
        std::size_t pos = 0;
        const double v = std::stod(raw.back(), &pos);
        if (pos != raw.back().size()) break;
        return v;
      }
      case FlagType::numbers: {
        Json arr = Json::array();
        for (const auto& item : raw) {
          std::stringstream ss(item);
          std::string tok;
          while (std::getline(ss, tok, ',')) {
            std::size_t pos = 0;
            arr.push_back(std::stod(tok, &pos));
            if (pos != tok.size()) throw std::invalid_argument(tok);
          }
        }
        return arr;
      }
    }
  } catch (const std::exception&) {
  }
  throw ConfigError("--" + f.name + ": cannot parse '" + (raw.empty() ? "" : raw.back()) + "'");
}

int run_verifier(const Json& cfg, const fs::path& out_dir, int threads, std::ostream& out) {
  SuiteResult total;
  for (std::size_t r : replica_range(cfg)) fold(total, run_suite(cfg, r, threads));
  write_trial_csv(total, out_dir / "trials.csv");
  Json summary = summary_json(total);
  summary["seed"] = at(cfg, "seed");
  summary["replicas"] = at(cfg, "replicas");
  io::write_json(out_dir / "summary.json", summary);
  out << total.command << ": " << total.trials << " trials, " << total.rows.size() << " checks, "
      << total.violations << " violations, " << total.inconclusive << " inconclusive, min margin "
      << io::format_double(total.min_margin) << '\n';
  if (const TrialRow* v = total.first_violation()) {
    Json rc = cfg;
    rc["first_replica"] = v->replica;
    rc["replicas"] = 1;
    rc["trial"] = v->trial;
    Json row{{"replica", v->replica}, {"trial", v->trial}, {"model", v->model}, {"n", v->n},
             {"params", v->params},   {"lhs", v->lhs},     {"rhs", v->rhs},     {"margin", v->margin}};
    const Json repro{{"reproducer", true},
                     {"command", total.command},
                     {"usage", "nclil " + total.command + " --config reproducer.json"},
                     {"violation", row},
                     {"config", rc}};
    io::write_json(out_dir / "reproducer.json", repro);
    out << "violation: " << v->model << " " << v->params << " (reproducer.json written)\n";
    return kExitViolation;
  }
  return kExitOk;
}

int run_experiment(const std::string& cmd, const Json& cfg, const fs::path& out_dir, int threads, std::ostream& out) {
  const auto rs = replica_range(cfg);
  std::vector<std::ostringstream> logs(rs.size());
  auto reports = parallel_map<Json>(rs.size(), threads, [&](std::size_t i) {
    if (cmd == "lil-run") return run_lil(cfg, rs[i], logs[i]);
    if (cmd == "baseline-scalar") return run_baseline(cfg, rs[i], logs[i]);
    return run_semicircle(cfg, rs[i], logs[i]);
  });
  for (const auto& l : logs) out << l.str();
  Json summary{{"command", cmd}, {"seed", at(cfg, "seed")}, {"simd", std::string(simd::active().name)}};
  if (reports.size() == 1)
    summary["report"] = reports.front();
  else
    summary["reports"] = reports;
  io::write_json(out_dir / "summary.json", summary);
  return kExitOk;
}

}  // namespace

// ---- public surface ------------------------------------------------------------------

const std::vector<std::string>& commands() {
  static const std::vector<std::string> c = {"verify-ce",         "verify-expineq", "verify-doob",
                                             "verify-dualdoob",   "verify-chebyshev", "verify-scalarineq",
                                             "lil-run",           "baseline-scalar", "demo-semicircular"};
  return c;
}

bool is_verifier(std::string_view command) { return command.starts_with("verify-"); }

Json default_config(std::string_view command) {
  Json c{{"command", std::string(command)}, {"seed", 0},     {"replicas", 1},
         {"first_replica", 0},              {"threads", 0},  {"out", "nclil-out"}};
  if (is_verifier(command)) c["trial"] = nullptr;
  if (command == "verify-ce") {
    Json ms = Json::array();
    for (int n = 2; n <= 6; ++n) ms.push_back(model_desc("tensor", 2, n));
    for (int n = 2; n <= 6; ++n) ms.push_back(model_desc("pinching", 2, n));
    ms.push_back(model_desc("diagonal", 10, 4));
    c["models"] = ms;
    c["samples"] = 100;
    c["tol"] = 1e-8;
  } else if (command == "verify-expineq") {
    c["trials"] = 1000;
    c["eps"] = {0.1, 0.5, 1.0};
    c["lambda_points"] = 20;
    c["dense_max_depth"] = 6;
    c["cell_max_depth"] = 10;
    c["diagonal_max_horizon"] = 10000;
    c["diagonal_paths"] = 1024;
  } else if (command == "verify-doob") {
    c["p"] = {4, 6, 8};
    c["seeds"] = 100;
    c["models"] = {model_desc("tensor", 2, 6), model_desc("pinching", 2, 6), model_desc("diagonal", 2, 8)};
    c["m"] = 1;
    c["bound"] = 1.0;
    c["coupling"] = "haar";
    c["max_iterations"] = 500;
    c["rel_tol"] = 1e-6;
  } else if (command == "verify-dualdoob") {
    c["p"] = {1, 1.5, 2};
    c["trials"] = 100;
    c["models"] = {model_desc("tensor", 2, 4), model_desc("pinching", 2, 4)};
  } else if (command == "verify-chebyshev") {
    c["p"] = {2, 4, 6};
    c["trials"] = 40;
    c["grid_points"] = 20;
    c["dense_model"] = model_desc("tensor", 2, 5);
    c["cell_model"] = model_desc("diagonal", 2, 10);
  } else if (command == "verify-scalarineq") {
    c["u_min"] = -50.0;
    c["u_max"] = 50.0;
    c["u_points"] = 401;
    c["p_min"] = 1.0;
    c["p_max"] = 64.0;
    c["p_points"] = 64;
    c["rhs_scale"] = 1.0;
  } else if (command == "lil-run") {
    const LILParameters d;
    c["model"] = "diagonal";
    c["generator"] = Json{{"horizon", 1000000}, {"paths", 4096},  {"law", "rademacher"}, {"variance", Json::array()},
                          {"m", 2},             {"depth", 10},    {"coupling", "haar"},   {"bound", 1.0}};
    c["params"] = Json{{"eta", d.eta},         {"delta", d.delta},         {"delta_prime", d.delta_prime},
                       {"eps", d.eps},         {"eps_prime", d.eps_prime}, {"beta", d.beta},
                       {"eps_proj", d.eps_proj}, {"window_fraction", d.window_fraction},
                       {"max_blocks", d.max_blocks}};
    c["plot"] = true;
    c["plot_points"] = 2000;
    c["path_summary"] = false;
  } else if (command == "baseline-scalar") {
    const BaselineConfig d;
    c["paths"] = d.paths;
    c["horizon"] = d.horizon;
    c["law"] = "rademacher";
    c["window_fraction"] = d.window_fraction;
  } else if (command == "demo-semicircular") {
    const SemicircleConfig d;
    c["size"] = d.size;
    c["steps"] = d.steps;
    c["checkpoints"] = Json::array();
  } else {
    throw ConfigError("unknown command '" + std::string(command) + "'");
  }
  return c;
}

Json merge_config(Json base, const Json& patch, const std::string& where) {
  if (!patch.is_object()) throw ConfigError("config" + where + ": expected an object");
  for (auto it = patch.begin(); it != patch.end(); ++it) {
    const std::string path = where + "/" + it.key();
    auto b = base.find(it.key());
    if (b == base.end()) throw ConfigError("config: unknown key " + path);
    const Json& v = it.value();
    if (b->is_object()) {
      *b = merge_config(*b, v, path);
      continue;
    }
    const bool numeric_slot = b->is_number() || b->is_null();
    const bool compatible = (numeric_slot && (v.is_number() || v.is_null())) ||
                            (b->is_string() && v.is_string()) || (b->is_boolean() && v.is_boolean()) ||
                            (b->is_array() && v.is_array());
    if (!compatible) throw ConfigError("config: " + path + " expects " + type_name(*b) + ", got " + type_name(v));
    *b = v;
  }
  return base;
}

void validate_config(const Json& cfg) {
  const std::string cmd = text(cfg, "command");
  integer_at_least(cfg, "seed", 0);
  integer_at_least(cfg, "replicas", 1);
  integer_at_least(cfg, "first_replica", 0);
  integer_at_least(cfg, "threads", 0);
  if (text(cfg, "out").empty()) throw ConfigError("config: 'out' must not be empty");
  if (is_verifier(cmd) && !at(cfg, "trial").is_null()) integer_at_least(cfg, "trial", 0);

  auto each = [&](const std::string& key, auto pred, const std::string& what) {
    const auto v = numbers(cfg, key);
    if (v.empty()) throw ConfigError("config: '" + key + "' must not be empty");
    for (double x : v)
      if (!pred(x)) throw ConfigError("config: '" + key + "' entries must be " + what + " (got " + io::format_double(x) + ")");
  };

  if (cmd == "verify-ce") {
    models(cfg, "models", false);
    integer_at_least(cfg, "samples", 1);
    if (!(number(cfg, "tol") > 0.0)) throw ConfigError("config: 'tol' must be positive");
  } else if (cmd == "verify-expineq") {
    integer_at_least(cfg, "trials", 1);
    each("eps", [](double e) { return e > 0.0 && e <= 1.0; }, "in (0, 1]");
    integer_at_least(cfg, "lambda_points", 2);
    if (integer_at_least(cfg, "dense_max_depth", 2) > 12) throw ConfigError("config: 'dense_max_depth' must be <= 12");
    if (integer_at_least(cfg, "cell_max_depth", 2) > 20) throw ConfigError("config: 'cell_max_depth' must be <= 20");
    integer_at_least(cfg, "diagonal_max_horizon", 10);
    if (integer_at_least(cfg, "diagonal_paths", 2) % 2) throw ConfigError("config: 'diagonal_paths' must be even");
  } else if (cmd == "verify-doob") {
    // The asymmetric Doob consequence is only asserted for 4 <= p < inf.
    each("p", [](double p) { return p >= 4.0; }, ">= 4 (p >= 4 required)");
    integer_at_least(cfg, "seeds", 1);
    models(cfg, "models", false);
    integer_at_least(cfg, "m", 0);
    if (!(number(cfg, "bound") > 0.0)) throw ConfigError("config: 'bound' must be positive");
    parse_coupling(text(cfg, "coupling"));
    integer_at_least(cfg, "max_iterations", 1);
    if (!(number(cfg, "rel_tol") > 0.0)) throw ConfigError("config: 'rel_tol' must be positive");
  } else if (cmd == "verify-dualdoob") {
    each("p", [](double p) { return p >= 1.0 && p <= 2.0; }, "in [1, 2]");
    integer_at_least(cfg, "trials", 1);
    models(cfg, "models", true);
  } else if (cmd == "verify-chebyshev") {
    each("p", [](double p) { return p >= 2.0; }, ">= 2");
    integer_at_least(cfg, "trials", 1);
    integer_at_least(cfg, "grid_points", 2);
    io::model_from_json(at(cfg, "dense_model"));
    io::model_from_json(at(cfg, "cell_model"));
  } else if (cmd == "verify-scalarineq") {
    if (number(cfg, "u_max") < number(cfg, "u_min")) throw ConfigError("config: u_max < u_min");
    if (!(number(cfg, "p_min") > 0.0) || number(cfg, "p_max") < number(cfg, "p_min"))
      throw ConfigError("config: need 0 < p_min <= p_max");
    integer_at_least(cfg, "u_points", 1);
    integer_at_least(cfg, "p_points", 1);
    if (!(number(cfg, "rhs_scale") > 0.0)) throw ConfigError("config: 'rhs_scale' must be positive");
  } else if (cmd == "lil-run") {
    lil_params(at(cfg, "params")).validate();
    const Json& g = at(cfg, "generator");
    const std::string kind = text(cfg, "model");
    if (kind == "diagonal") {
      integer_at_least(g, "horizon", 1);
      if (integer_at_least(g, "paths", 2) % 2) throw ConfigError("config: generator.paths must be even");
      parse_law(text(g, "law"));
      for (double v : numbers(g, "variance"))
        if (!(v > 0.0)) throw ConfigError("config: generator.variance entries must be positive");
    } else if (kind == "tensor" || kind == "pinching") {
      // dense-dimension guard
      AlgebraModel::make(parse_model_kind(kind), static_cast<int>(integer_at_least(g, "m", 2)),
                         static_cast<int>(integer_at_least(g, "depth", 1)));
      parse_coupling(text(g, "coupling"));
      if (!(number(g, "bound") > 0.0)) throw ConfigError("config: generator.bound must be positive");
    } else {
      throw ConfigError("config: 'model' must be diagonal, tensor or pinching");
    }
    integer_at_least(cfg, "plot_points", 2);
  } else if (cmd == "baseline-scalar") {
    integer_at_least(cfg, "paths", 1);
    integer_at_least(cfg, "horizon", 1);
    parse_law(text(cfg, "law"));
    const double f = number(cfg, "window_fraction");
    if (!(f > 0.0 && f <= 1.0)) throw ConfigError("config: 'window_fraction' must be in (0, 1]");
  } else if (cmd == "demo-semicircular") {
    integer_at_least(cfg, "size", 50);
    const auto steps = integer_at_least(cfg, "steps", 1);
    for (double c : numbers(cfg, "checkpoints"))
      if (c < 1 || c > static_cast<double>(steps) || c != std::floor(c))
        throw ConfigError("config: checkpoints must be integers in [1, steps]");
  } else {
    throw ConfigError("unknown command '" + cmd + "'");
  }
}

std::uint64_t replica_seed(std::uint64_t seed, std::uint64_t replica) {
  return CounterRng::derive_key(seed, replica, hash_label("replica"));
}

std::uint64_t trial_seed(std::uint64_t replica_key, std::string_view suite, std::size_t trial) {
  return CounterRng::derive_key(replica_key, trial, hash_label(suite));
}

const TrialRow* SuiteResult::first_violation() const {
  for (const auto& r : rows)
    if (r.verdict == "violated") return &r;
  return nullptr;
}

SuiteResult run_suite(const Json& cfg, std::size_t replica, int threads) {
  const std::string cmd = text(cfg, "command");
  const SuiteContext ctx{cfg, replica, replica_seed(static_cast<std::uint64_t>(integer(cfg, "seed")), replica),
                         threads};
  SuiteResult r;
  if (cmd == "verify-ce") r = suite_ce(ctx);
  else if (cmd == "verify-expineq") r = suite_expineq(ctx);
  else if (cmd == "verify-doob") r = suite_doob(ctx);
  else if (cmd == "verify-dualdoob") r = suite_dualdoob(ctx);
  else if (cmd == "verify-chebyshev") r = suite_chebyshev(ctx);
  else if (cmd == "verify-scalarineq") r = suite_scalarineq(ctx);
  else throw ConfigError("'" + cmd + "' is not a verifier");
  aggregate(r);
  return r;
}

void fold(SuiteResult& into, SuiteResult more) {
  if (into.command.empty()) {
    into = std::move(more);
    into.extra = Json::array({into.extra});
    return;
  }
  into.trials += more.trials;
  for (auto& r : more.rows) into.rows.push_back(std::move(r));
  into.extra.push_back(std::move(more.extra));
  aggregate(into);
}

Json summary_json(const SuiteResult& r) {
  return Json{{"command", r.command},
              {"trials", r.trials},
              {"checks", r.rows.size()},
              {"violations", r.violations},
              {"inconclusive", r.inconclusive},
              {"min_margin", std::isfinite(r.min_margin) ? Json(r.min_margin) : Json(nullptr)},
              {"simd", std::string(simd::active().name)},
              {"extra", r.extra}};
}

void write_trial_csv(const SuiteResult& r, const fs::path& path) {
  io::CsvWriter csv(path, {"replica", "trial", "model", "n", "params", "lhs", "rhs", "margin", "holds", "verdict"});
  for (const auto& row : r.rows)
    csv.cell(row.replica)
        .cell(row.trial)
        .cell(row.model)
        .cell(row.n)
        .cell(row.params)
        .cell(row.lhs)
        .cell(row.rhs)
        .cell(row.margin)
        .cell(row.holds())
        .cell(row.verdict)
        .end_row();
}

void write_path_summary_csv(const PathSummary& s, const fs::path& path) {
  const auto g = growth_profile(s);
  io::CsvWriter csv(path, {"n", "s2", "u", "dnorm", "alpha"});
  for (std::size_t i = 0; i < s.horizon(); ++i)
    csv.cell(i + 1).cell(s.s2[i]).cell(s.u[i]).cell(s.dnorm[i]).cell(g.alpha[i]).end_row();
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"nclil: noncommutative martingale tail inequalities and LIL experiments"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "expand all help");

  struct Sub {
    CLI::App* app;
    std::string config;
    std::vector<FlagSpec> flags;
    std::map<std::string, std::vector<std::string>> raw;
  };
  std::vector<std::unique_ptr<Sub>> subs;
  for (const auto& cmd : commands()) {
    auto s = std::make_unique<Sub>();
    s->app = app.add_subcommand(cmd);
    s->app->add_option("--config", s->config, "JSON config; flags override its fields")->check(CLI::ExistingFile);
    s->flags = flags_for(cmd);
    for (const auto& f : s->flags) {
      auto& slot = s->raw[f.name];
      if (f.type == FlagType::boolean) {
        s->app->add_flag_function("--" + f.name, [&slot](std::int64_t) { slot = {"true"}; }, f.help);
      } else {
        auto* opt = s->app->add_option("--" + f.name, slot, f.help);
        if (f.type != FlagType::numbers) opt->expected(1);
      }
    }
    subs.push_back(std::move(s));
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitConfig;
  }

  const Sub* sub = nullptr;
  for (const auto& s : subs)
    if (s->app->parsed()) sub = s.get();
  const std::string cmd = sub->app->get_name();

  try {
    Json cfg = default_config(cmd);
    if (!sub->config.empty()) {
      Json file = io::read_json(sub->config);
      if (file.is_object() && file.contains("reproducer")) file = at(file, "config");
      if (file.is_object() && file.contains("command") && file["command"] != cmd)
        throw ConfigError("config file is for '" + file["command"].get<std::string>() + "', not '" + cmd + "'");
      cfg = merge_config(cfg, file);
    }
    for (const auto& f : sub->flags) {
      const auto& raw = sub->raw.at(f.name);
      if (raw.empty()) continue;
      cfg[Json::json_pointer(f.pointer)] = flag_value(f, raw);
    }
    // Flags are typed by construction; re-merge against defaults to catch type drift.
    cfg = merge_config(default_config(cmd), cfg);
    validate_config(cfg);

    const fs::path out_dir = text(cfg, "out");
    fs::create_directories(out_dir);
    io::write_json(out_dir / "resolved-config.json", cfg);
    const int threads = resolve_threads(static_cast<int>(integer(cfg, "threads")));

    const auto t0 = std::chrono::steady_clock::now();
    const int code = is_verifier(cmd) ? run_verifier(cfg, out_dir, threads, out)
                                      : run_experiment(cmd, cfg, out_dir, threads, out);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    err << cmd << ": " << secs << " s on " << threads << " thread(s), simd=" << simd::active().name << '\n';
    return code;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
  } catch (const InsufficientHorizon& e) {
    err << "config error (horizon): " << e.what() << '\n';
  } catch (const PreconditionError& e) {
    err << "precondition (" << e.item() << "): " << e.what() << '\n';
  } catch (const DomainError& e) {
    err << "domain error: " << e.what() << '\n';
  } catch (const nlohmann::json::exception& e) {
    err << "config error: " << e.what() << '\n';
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
  }
  return kExitConfig;
}

}  // namespace nclil::harness
