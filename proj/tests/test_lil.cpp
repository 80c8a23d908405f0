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
#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "nclil/error.hpp"
#include "nclil/gue.hpp"
#include "nclil/lil.hpp"
#include "nclil/simd/kernels.hpp"

using namespace nclil;

TEST_CASE("parameter validation") {
  LILParameters q;
  CHECK_NOTHROW(q.validate());
  CHECK(q.series_ratio() == doctest::Approx(1.1));
  q.eps = 0.3;
  CHECK_THROWS_AS(q.validate(), ConfigError);
  try {
    q.validate();
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("convergence") != std::string::npos);
  }
  q = {};
  q.eta = 2.0;
  CHECK_THROWS_AS(q.validate(), ConfigError);
  q = {};
  q.eps_prime = 1.0;
  CHECK_THROWS_AS(q.validate(), ConfigError);
  q = {};
  CHECK_FALSE(q.reduction_relation());  // delta = delta' with eta > 1
  q.delta_prime = 0.8;
  CHECK(q.reduction_relation());
}

TEST_CASE("zero martingale") {
  const DiagonalPath p({5000, IncrementLaw::rademacher, {0.0}, 64}, 1);
  const auto r = run_lil_experiment(p, {});
  CHECK(r.degenerate);
  CHECK(r.empirical_limsup == 0.0);
  CHECK(r.deficit == 0.0);
}

TEST_CASE("short horizons") {
  SUBCASE("tensor haar n = 12") {
    const auto model = AlgebraModel::make(ModelKind::tensor, 2, 12);
    const auto plan = plan_tensor_martingale(model, {}, 3);
    CHECK_THROWS_AS(plan_lil_blocks(plan.summary, {}), InsufficientHorizon);
  }
  SUBCASE("diagonal, bracket below e^e") {
    const DiagonalPath p({15, IncrementLaw::rademacher, {}, 64}, 1);
    CHECK_THROWS_AS(run_lil_experiment(p, {}), InsufficientHorizon);
  }
  SUBCASE("blocks exist but none reaches n0") {
    const DiagonalPath p({300, IncrementLaw::rademacher, {}, 64}, 1);
    CHECK_THROWS_AS(run_lil_experiment(p, {}), InsufficientHorizon);
  }
}

TEST_CASE("diagonal run: structure and Borel-Cantelli wiring") {
  LILParameters q;
  const DiagonalPath p({20000, IncrementLaw::rademacher, {}, 1024}, 9);
  const auto r = run_lil_experiment(p, q);
  CHECK(r.semantics == "exact");
  REQUIRE_FALSE(r.blocks.empty());
  CHECK(r.n0 == std::max({r.n1, r.n2, 1}));
  // stopping rule on s_j^2 = j
  for (const auto& b : r.blocks) {
    CHECK(double(b.k_begin + 1) >= std::pow(q.eta, 2.0 * b.n));
    CHECK(double(b.k_begin) < std::pow(q.eta, 2.0 * b.n));
    CHECK(b.s2_end == double(b.k_end));
  }
  double prev_final = 0.0, prev_emp = 0.0;
  double union_bound = 0.0;
  for (const auto& b : r.blocks) {
    CHECK(b.partial_final >= prev_final);
    CHECK(b.partial_empirical >= prev_emp);
    prev_final = b.partial_final;
    prev_emp = b.partial_empirical;
    if (b.in_window) union_bound += b.probc;
    if (b.valid) CHECK(b.reduction_ok);
  }
  CHECK(r.union_bound == doctest::Approx(union_bound));
  CHECK(r.deficit <= r.union_bound + 1e-15);
  CHECK(r.deficit <= r.bc_deficit);
  CHECK(r.empirical_limsup <= r.threshold);
  CHECK(r.window_begin >= 2000);
  if (r.bc_applicable) CHECK(r.deficit <= r.series_final);

  // series of bound_final against direct evaluation
  const double c = q.series_ratio();
  double acc = 0.0;
  for (const auto& b : r.blocks) {
    if (!b.valid) continue;
    acc += std::pow(2.0 * std::log(q.eta) * b.n, -c);
    CHECK(std::abs(b.partial_final - acc) <= 1e-12);
  }

  // bit-identical reruns
  const auto again = run_lil_experiment(p, q);
  CHECK(to_json(again).dump() == to_json(r).dump());

  // the plot pass sees the same kept set
  const auto plot = lil_plot_series(p, r, 300);
  REQUIRE_FALSE(plot.empty());
  for (const auto& pt : plot) {
    CHECK(pt.r_e <= pt.r_all);
    if (pt.n >= r.window_begin) CHECK(pt.r_e <= r.threshold);
  }
}

TEST_CASE("per-block probabilities against a brute-force replay") {
  LILParameters q;
  q.window_fraction = 0.5;
  const DiagonalPath p({3000, IncrementLaw::uniform, {}, 256}, 4);
  const auto r = run_lil_experiment(p, q);
  const auto& s = p.summary();
  std::vector<std::vector<double>> xs(3001);
  xs[0].assign(256, 0.0);
  for (std::size_t m = 1; m <= 3000; ++m) {
    xs[m] = xs[m - 1];
    p.advance(m, xs[m]);
  }
  for (const auto& b : r.blocks) {
    std::size_t hit = 0;
    for (std::size_t w = 0; w < 256; ++w) {
      bool over = false;
      for (std::size_t m = b.k_begin + 1; m <= b.k_end; ++m)
        over = over || std::abs(xs[m][w]) / (std::sqrt(s.s2[m - 1]) * s.u[m - 1]) > q.beta * (1.0 + q.delta_prime);
      hit += over;
    }
    CHECK(b.probc == doctest::Approx(hit / 256.0).epsilon(1e-15));
  }
}

TEST_CASE("dense run uses certificate semantics") {
  LILParameters q;
  q.delta = 1.0;
  q.delta_prime = 1.0;
  q.eps = 1.0;
  const auto model = AlgebraModel::make(ModelKind::tensor, 2, 7);
  const auto path = gen_tensor_martingale(model, {BoundSpec::constant(2.0), Coupling::haar, {}}, 5);
  const auto r = run_lil_experiment(path, q);
  CHECK(r.semantics == "certificate");
  CHECK(r.n0 == 3);
  CHECK(r.empirical_limsup <= r.threshold + 1e-8);
  CHECK(r.deficit <= r.union_bound + 1e-9);
}

TEST_CASE("empirical a.u. limsup") {
  const std::vector<Operator> zeros{Operator::zero(3), Operator::zero(3)};
  const auto z = empirical_au_limsup(zeros, 0.1);
  CHECK(z.K == 0.0);
  CHECK(z.deficit == 0.0);

  const std::vector<Operator> one{Operator::diagonal(std::vector<double>{3.0, 1.0})};
  const auto d = empirical_au_limsup(one, 0.6);
  CHECK(d.K == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(d.e.op().matrix()(0, 0) == 0.0);
  CHECK(d.e.op().matrix()(1, 1) == 1.0);
  const std::vector<DiagonalOperator> cell{DiagonalOperator({3.0, 1.0})};
  const auto c = empirical_au_limsup(cell, 0.6);
  CHECK(c.K == 1.0);
  CHECK(c.e[0] == 0.0);
  CHECK(c.e[1] == 1.0);

  // classical data: K is the (1 - eps)-quantile of per-path maxima
  CounterRng rng(1, 0, "au");
  std::vector<DiagonalOperator> rs;
  for (int m = 0; m < 5; ++m) {
    std::vector<double> v(1000);
    for (auto& e : v) e = 6.0 * to_unit(rng()) - 3.0;
    rs.emplace_back(v);
  }
  std::vector<double> mx(1000, 0.0);
  for (const auto& r : rs)
    for (std::size_t i = 0; i < 1000; ++i) mx[i] = std::max(mx[i], std::abs(r[i]));
  std::sort(mx.begin(), mx.end());
  const auto k = empirical_au_limsup(rs, 0.05);
  // at most 49 points removed (49/1000 < 0.05), so K is the 951st smallest maximum
  CHECK(k.K == mx[950]);
  CHECK(k.deficit == doctest::Approx(0.049));
  CHECK_THROWS_AS(empirical_au_limsup(std::span<const DiagonalOperator>{}, 0.1), DomainError);
}

TEST_CASE("Kolmogorov baseline") {
  SUBCASE("independent replay oracle") {
    BaselineConfig cfg{128, 500, 3, IncrementLaw::rademacher, 0.1};
    const auto r = scalar_kolmogorov_baseline(cfg);
    CHECK(r.pre_asymptotic);
    const CounterRng rng(3, 0, "baseline");
    const std::size_t words = 2;
    for (std::size_t i = 0; i < 128; ++i) {
      double sum = 0.0, best = 0.0;
      for (std::size_t n = 1; n <= 500; ++n) {
        const std::uint64_t w = rng.at(n * words + i / 64);
        sum += (w >> (i % 64)) & 1 ? 1.0 : -1.0;
        if (n >= 50) best = std::max(best, std::abs(sum) / std::sqrt(n * iterlog(double(n))));
      }
      CHECK(r.running_max[i] == doctest::Approx(best).epsilon(1e-14));
    }
  }
  SUBCASE("alternating increments telescope") {
    const auto r = scalar_kolmogorov_baseline({1000, 200000, 0, IncrementLaw::alternating, 0.1});
    CHECK(r.max == doctest::Approx(1.0 / std::sqrt(20001.0 * iterlog(20001.0))));
    CHECK(r.frac_above_2 == 0.0);
    CHECK_FALSE(r.pre_asymptotic);
  }
  CHECK(quantile({3.0, 1.0, 2.0, 4.0}, 0.5) == 2.5);
  CHECK(quantile({5.0}, 0.9) == 5.0);
}

TEST_CASE("semicircular demo") {
  const auto r = semicircular_demo({60, 20, 2, {1, 5, 15, 20}});
  REQUIRE(r.points.size() == 4);
  CHECK(!r.ks_at_100.has_value());
  CHECK(!r.decreasing.has_value());
  // single step: the statistic is ||g_1||
  const auto g = gen_gue_increments(60, 1, 2);
  CHECK(r.points[0].statistic == doctest::Approx(operator_norm(g[0])).epsilon(1e-12));
  for (const auto& p : r.points) {
    if (p.n > 15) continue;
    CHECK(p.statistic == doctest::Approx(p.norm / std::sqrt(double(p.n))));  // L(n) = 1 for n <= 15
  }
  CHECK_THROWS_AS(semicircular_demo({40, 10, 0, {}}), DomainError);
}
