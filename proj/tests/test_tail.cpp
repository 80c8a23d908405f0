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
#include <cmath>
#include <numbers>

#include "doctest.h"
#include "nclil/error.hpp"
#include "nclil/tail.hpp"
#include "test_util.hpp"

using namespace nclil;

namespace {

Operator diag2(double a, double b) { return Operator::diagonal(std::vector<double>{a, b}); }

Operator random_positive(Index n, CounterRng& rng) {
  const Matrix g = nclil::testing::gaussian_matrix(n, rng);
  return Operator(g.adjoint() * g, true);
}

std::string item_of(auto&& f) {
  try {
    f();
  } catch (const PreconditionError& e) {
    return e.item();
  }
  return "";
}

}  // namespace

TEST_CASE("exponential moment sides") {
  const auto model = AlgebraModel::make(ModelKind::tensor, 2, 1);
  const auto path = assemble_path(model, {diag2(1.0, -1.0)});

  const auto zero = exp_moment_sides(path, 1, {1.0, 1.0, 1.0, 0.0});
  CHECK(zero.lhs == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(zero.rhs == 1.0);
  CHECK(zero.holds);

  const auto r = exp_moment_sides(path, 1, {1.0, 1.0, 1.0, 0.3});
  CHECK(r.lhs == doctest::Approx(std::cosh(0.3)).epsilon(1e-14));
  CHECK(r.lhs == doctest::Approx(1.04534).epsilon(1e-5));
  CHECK(r.rhs == doctest::Approx(std::exp(0.18)).epsilon(1e-14));
  CHECK(r.rhs == doctest::Approx(1.19722).epsilon(1e-5));
  CHECK(r.holds);

  // admissibility boundary: sqrt(1)/(1*2) = 0.5
  CHECK_NOTHROW(exp_moment_sides(path, 1, {1.0, 1.0, 1.0, 0.5}));
  CHECK(item_of([&] { exp_moment_sides(path, 1, {1.0, 1.0, 1.0, 0.5 + 1e-9}); }) == "lambda");
  CHECK(item_of([&] { exp_moment_sides(path, 1, {0.9, 1.0, 1.0, 0.1}); }) == "ii");
  CHECK(item_of([&] { exp_moment_sides(path, 1, {1.0, 0.9, 1.0, 0.1}); }) == "iii");
  MartingalePath shifted = path;
  shifted.partials[1] = diag2(2.0, -1.0);
  CHECK(item_of([&] { exp_moment_sides(shifted, 1, {2.0, 4.0, 1.0, 0.1}); }) == "i");
  CHECK_THROWS_AS(exp_moment_sides(path, 1, {1.0, 1.0, 1.5, 0.1}), DomainError);
  CHECK_THROWS_AS(exp_moment_sides(path, 2, {1.0, 1.0, 1.0, 0.1}), DomainError);
}

TEST_CASE("log-space trace exponential does not overflow") {
  const std::vector<double> spec{-1.0, 1.0};
  CHECK(log_trace_exp(spec, 800.0) == doctest::Approx(800.0 - std::log(2.0) + std::log1p(std::exp(-1600.0))));
  const std::vector<double> z{0.0, 0.0, 0.0};
  CHECK(log_trace_exp(z, 5.0) == doctest::Approx(0.0));
}

TEST_CASE("exponential moment on cell and Monte Carlo paths") {
  const auto model = AlgebraModel::make(ModelKind::diagonal, 2, 10);
  const auto path = gen_cell_martingale(model, BoundSpec::constant(1.0), CellLaw::rademacher, 1);
  // exact: tau(e^{lambda x_n}) = cosh(lambda)^n for independent signs
  for (double eps : {0.1, 0.5, 1.0}) {
    const double lmax = std::sqrt(eps) / (1.0 + eps);
    for (int i = 0; i <= 10; ++i) {
      const double lambda = lmax * i / 10.0;
      const auto r = exp_moment_sides(path, 10, {1.0, 10.0, eps, lambda});
      CHECK(r.log_lhs == doctest::Approx(10.0 * std::log(std::cosh(lambda))).epsilon(1e-12));
      CHECK(r.holds);
    }
  }
  const DiagonalPath mc({400, IncrementLaw::rademacher, {}, 2048}, 5);
  const auto x = mc.partial_sum(400);
  const auto r = exp_moment_sides(mc, 400, x.values(), {1.0, 400.0, 1.0, 0.5});
  CHECK(r.holds);
  CHECK(item_of([&] { exp_moment_sides(mc, 400, x.values(), {1.0, 399.0, 1.0, 0.1}); }) == "iii");
}

TEST_CASE("column maximal norm") {
  CounterRng rng(4, 0, "colnorm");
  SUBCASE("singleton closes the gap") {
    for (double p : {2.0, 4.0, 6.5}) {
      const auto x = nclil::testing::random_operator(6, rng);
      const std::vector<Operator> xs{x};
      const auto b = column_maximal_norm_bounds(xs, p);
      CHECK(b.lower == doctest::Approx(lp_norm(x, p)).epsilon(1e-12));
      CHECK(std::abs(b.upper - b.lower) < 1e-8);
      const std::vector<Operator> copies{x, x, x, x};
      const auto c = column_maximal_norm_bounds(copies, p);
      CHECK(c.upper == doctest::Approx(b.upper).epsilon(1e-14));
      CHECK(c.lower == doctest::Approx(b.lower).epsilon(1e-14));
    }
  }
  SUBCASE("commuting diagonal family: entrywise max oracle") {
    for (int trial = 0; trial < 10; ++trial) {
      std::vector<Operator> xs;
      std::vector<double> emax(8, 0.0);
      for (int i = 0; i < 4; ++i) {
        std::vector<double> v(8);
        for (auto& e : v) e = 4.0 * to_unit(rng()) - 2.0;
        for (int j = 0; j < 8; ++j) emax[j] = std::max(emax[j], std::abs(v[j]));
        xs.push_back(Operator::diagonal(v));
      }
      // oracle: (mean_j emax_j^p)^{1/p}
      double acc = 0.0;
      for (double e : emax) acc += std::pow(e, 4.0);
      const double oracle = std::pow(acc / 8.0, 0.25);
      const auto b = column_maximal_norm_bounds(xs, 4.0);
      CHECK(std::abs(b.upper - oracle) <= 1e-6);
      std::vector<DiagonalOperator> cells;
      for (const auto& x : xs) {
        std::vector<double> v(8);
        for (int j = 0; j < 8; ++j) v[j] = x.matrix()(j, j).real();
        cells.emplace_back(v);
      }
      const auto c = column_maximal_norm_bounds(cells, 4.0);
      CHECK(c.upper == doctest::Approx(oracle).epsilon(1e-13));
    }
  }
  SUBCASE("random families: certified and ordered") {
    for (int trial = 0; trial < 20; ++trial) {
      std::vector<Operator> xs;
      for (int i = 0; i < 3; ++i) xs.push_back(nclil::testing::random_operator(5, rng));
      const auto b = column_maximal_norm_bounds(xs, 4.0);
      CHECK(b.lower <= b.upper);
      CHECK(dominator_slack(xs, b.certificate) >= -1e-8);
      Operator a0 = Operator::zero(5);
      for (const auto& x : xs) a0 = a0 + x.gram();
      CHECK(b.upper <= std::sqrt(lp_norm(a0, 2.0)) * (1.0 + 1e-12));
    }
  }
  CHECK_THROWS_AS(column_maximal_norm_bounds(std::span<const Operator>{}, 4.0), DomainError);
  const std::vector<Operator> one{diag2(1.0, 2.0)};
  CHECK_THROWS_AS(column_maximal_norm_bounds(one, 1.5), DomainError);
}

TEST_CASE("Doob consequence") {
  SUBCASE("single-element range") {
    const auto model = AlgebraModel::make(ModelKind::tensor, 2, 3);
    const auto path = gen_tensor_martingale(model, {}, 3);
    const auto r = doob_consequence_check(path, 3, 3, 4.0);
    CHECK(r.holds());
    CHECK(r.lower == doctest::Approx(r.xn_norm));
    CHECK(r.upper == doctest::Approx(r.xn_norm).epsilon(1e-8));
  }
  SUBCASE("diagonal rademacher n = 8, p = 4") {
    const auto model = AlgebraModel::make(ModelKind::diagonal, 2, 8);
    const auto path = gen_cell_martingale(model, BoundSpec::constant(1.0), CellLaw::rademacher, 0);
    const auto r = doob_consequence_check(path, 0, 8, 4.0);
    CHECK(r.holds());
    CHECK(r.rhs == doctest::Approx(std::sqrt(2.0) * lp_norm(path.partials[8], 4.0)).epsilon(1e-14));
  }
  SUBCASE("tensor haar n = 6, p = 4") {
    const auto model = AlgebraModel::make(ModelKind::tensor, 2, 6);
    int held = 0;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      const auto path = gen_tensor_martingale(model, {}, seed);
      const auto r = doob_consequence_check(path, 1, 6, 4.0);
      CHECK(r.status != DoobStatus::violated);
      held += r.holds();
    }
    MESSAGE("tensor haar holds in ", held, "/10");
    CHECK(held >= 8);
  }
  const auto model = AlgebraModel::make(ModelKind::tensor, 2, 2);
  const auto path = gen_tensor_martingale(model, {}, 1);
  CHECK_THROWS_AS(doob_consequence_check(path, 0, 2, 3.0), DomainError);
  CHECK_THROWS_AS(doob_consequence_check(path, 2, 1, 4.0), DomainError);
  CHECK_THROWS_AS(doob_consequence_check(path, 0, 3, 4.0), DomainError);
}

TEST_CASE("dual Doob") {
  CounterRng rng(8, 0, "dual");
  const auto model = AlgebraModel::make(ModelKind::tensor, 2, 4);
  std::vector<Operator> a;
  for (int i = 0; i < 4; ++i) a.push_back(random_positive(16, rng));
  const auto one = dual_doob_check(model, a, 1.0);
  Operator sum = Operator::zero(16);
  for (const auto& x : a) sum = sum + x;
  CHECK(one.lhs == doctest::Approx(lp_norm(sum, 1.0)).epsilon(1e-10));
  CHECK(one.rhs == doctest::Approx(lp_norm(sum, 1.0)).epsilon(1e-14));
  CHECK(one.holds);
  for (double p : {1.5, 2.0}) CHECK(dual_doob_check(model, a, p).holds);

  const std::vector<Operator> single{a[0]};
  const auto s = dual_doob_check(model, single, 2.0);
  CHECK(s.lhs == doctest::Approx(real_trace(a[0])).epsilon(1e-12));
  CHECK(s.lhs <= lp_norm(a[0], 2.0));

  const std::vector<Operator> bad{Operator::identity(16) * -1.0};
  CHECK(item_of([&] { dual_doob_check(model, bad, 2.0); }) == "positivity");
  CHECK_THROWS_AS(dual_doob_check(model, a, 2.5), DomainError);
}

TEST_CASE("constructive Prob_c") {
  const std::vector<Operator> xs{diag2(3.0, 1.0)};
  const auto r = probc_upper(xs, 2.0, diag2(3.0, 1.0));
  CHECK(r.s == 0.5);
  CHECK(r.e.op().matrix()(0, 0) == 0.0);
  CHECK(r.e.op().matrix()(1, 1) == 1.0);
  CHECK(r.witness == doctest::Approx(1.0).epsilon(1e-14));
  const auto all = probc_upper(xs, 3.0, diag2(3.0, 1.0));
  CHECK(all.s == 0.0);
  CHECK(item_of([&] { probc_upper(xs, 2.0, diag2(2.0, 1.0)); }) == "dominator");
  CHECK_THROWS_AS(probc_upper(xs, 0.0, diag2(3.0, 1.0)), DomainError);

  SUBCASE("noncommuting witness stays below t") {
    CounterRng rng(2, 0, "probc");
    std::vector<Operator> fam;
    for (int i = 0; i < 3; ++i) fam.push_back(nclil::testing::random_operator(6, rng));
    const auto b = column_maximal_norm_bounds(fam, 4.0);
    double prev = 1.0;
    for (int g = 1; g <= 20; ++g) {
      const double t = 0.1 * g;
      const auto p = probc_upper(fam, t, b.certificate);
      CHECK(p.witness <= t + 1e-8);
      CHECK(p.s <= prev);
      prev = p.s;
    }
  }
  SUBCASE("diagonal family: brute force over sample points") {
    const auto model = AlgebraModel::make(ModelKind::diagonal, 2, 9);
    const auto path = gen_cell_martingale(model, BoundSpec::constant(1.0), CellLaw::rademacher, 0);
    const std::span<const DiagonalOperator> fam(path.partials);
    for (double t : {0.5, 1.5, 2.5, 3.5, 5.0}) {
      std::size_t hit = 0;
      for (std::size_t w = 0; w < 512; ++w) {
        bool over = false;
        for (const auto& x : fam) over = over || std::abs(x[w]) > t;
        hit += over;
      }
      CHECK(probc_exact(fam, t).s == doctest::Approx(hit / 512.0).epsilon(1e-15));
    }
  }
}

TEST_CASE("Chebyshev") {
  const std::vector<Operator> xs{diag2(3.0, 1.0)};
  const auto b = column_maximal_norm_bounds(xs, 4.0);
  const auto r = chebyshev_bound(xs, 2.0, 4.0, b);
  CHECK(r.probc_s == 0.5);
  CHECK(r.rhs == doctest::Approx(82.0 / 32.0).epsilon(1e-12));
  CHECK(r.holds);
  const auto far = chebyshev_bound(xs, 1e6, 4.0, b);
  CHECK(far.probc_s == 0.0);
  CHECK(far.rhs < 1e-20);

  const std::vector<Operator> scaled{diag2(6.0, 2.0)};
  const auto bs = column_maximal_norm_bounds(scaled, 4.0);
  const auto rs = chebyshev_bound(scaled, 2.0, 4.0, bs);
  CHECK(rs.rhs == doctest::Approx(16.0 * r.rhs).epsilon(1e-12));
  CHECK(rs.probc_s >= r.probc_s);
}

TEST_CASE("scalar power-exponential inequality") {
  const auto z = scalar_power_exp_bound(0.0, 3.0);
  CHECK(z.lhs == 0.0);
  CHECK(z.rhs == doctest::Approx(2.0 * std::pow(3.0 / std::numbers::e, 3.0)));
  CHECK(z.holds);
  for (double p : {1.0, 2.5, 10.0}) {
    const auto r = scalar_power_exp_bound(p, p);
    CHECK(r.rhs == doctest::Approx(std::pow(p, p) * std::exp(-p) * (std::exp(p) + std::exp(-p))));
    CHECK(r.holds);
  }
  int violations = 0;
  for (int i = 0; i <= 400; ++i)
    for (int j = 0; j <= 63; ++j) violations += !scalar_power_exp_bound(-50.0 + 0.25 * i, 1.0 + j).holds;
  CHECK(violations == 0);
  CHECK_THROWS_AS(scalar_power_exp_bound(1.0, 0.5), DomainError);
}

TEST_CASE("block bounds") {
  SUBCASE("worked point") {
    // 2 ln eta = 1, (1+delta)^2/(1+eps) = 2, beta = 2, n = 10
    const BlockParams q{std::exp(0.5), 1.0, 1.0, 2.0};
    CHECK(q.exponent() == doctest::Approx(2.0).epsilon(1e-15));
    const auto b = block_tail_bound(10, q);
    CHECK(std::abs(b.bound_final - 1e-2) <= 1e-12);
    CHECK(block_series_converges(q));
  }
  SUBCASE("closed forms against direct evaluation") {
    const BlockParams q{1.5, 0.1, 0.1, 2.0};
    const double c = 4.0 * 1.21 / (4.0 * 1.1);
    for (double s2 : {1e3, 1e5, 1e9}) {
      const auto b = block_tail_bound(5, q, s2, 0.05);
      const double u2 = std::log(std::log(s2));
      CHECK(b.u2 == doctest::Approx(u2));
      CHECK(b.lambda == doctest::Approx(2.2 * u2 / 2.2));
      CHECK(b.p == doctest::Approx(2.2 * 2.2 * u2 / 2.2));
      // lambda = beta(1+delta)u^2/(2(1+eps)) makes the exponent -c u^2
      CHECK(b.bound_exact == doctest::Approx(8.0 * std::exp(-c * u2)).epsilon(1e-12));
      CHECK(b.bound_log == doctest::Approx(std::pow(std::log(s2), -c)).epsilon(1e-12));
      CHECK(b.bound_exact == doctest::Approx(8.0 * b.bound_log).epsilon(1e-12));
      CHECK(b.alpha_gate == doctest::Approx(2.0 * std::sqrt(0.1) / 2.2));
      CHECK(b.alpha_ok.value());
    }
    CHECK(block_tail_bound(3, q).bound_final == doctest::Approx(std::pow(6.0 * std::log(1.5), -c)));
  }
  SUBCASE("beta = 2, delta = eps collapses the exponent to 1 + delta") {
    for (double d : {0.05, 0.3, 0.9}) {
      const BlockParams q{1.3, d, d, 2.0};
      CHECK(q.exponent() == doctest::Approx(1.0 + d).epsilon(1e-14));
    }
  }
  SUBCASE("series gate") {
    CHECK_FALSE(block_series_converges({1.5, 0.1, 0.3, 2.0}));
    CHECK(block_series_converges({1.5, 0.1, 0.1, 2.0}));
  }
  CHECK_THROWS_AS(block_tail_bound(1, {2.0, 0.1, 0.1, 2.0}), DomainError);
  CHECK_THROWS_AS(block_tail_bound(1, {1.5, 0.0, 0.1, 2.0}), DomainError);
  CHECK_THROWS_AS(block_tail_bound(1, {1.5, 0.1, 1.1, 2.0}), DomainError);
  CHECK_THROWS_AS(block_tail_bound(0, {1.5, 0.1, 0.1, 2.0}), DomainError);
}
