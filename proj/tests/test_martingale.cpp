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
#include <numeric>

#include "doctest.h"
#include "nclil/error.hpp"
#include "nclil/gue.hpp"
#include "nclil/martingale.hpp"
#include "test_util.hpp"

using namespace nclil;
using nclil::testing::max_abs_diff;

namespace {

Operator pauli_z() { return Operator::diagonal(std::vector<double>{1.0, -1.0}); }

// Composite Simpson rule on [a, b] with n (even) panels.
template <class F>
double simpson(F f, double a, double b, int n) {
  const double h = (b - a) / n;
  double acc = f(a) + f(b);
  for (int i = 1; i < n; ++i) acc += (i % 2 ? 4.0 : 2.0) * f(a + i * h);
  return acc * h / 3.0;
}

}  // namespace

TEST_CASE("iterlog") {
  CHECK(iterlog(2.0) == 1.0);
  CHECK(iterlog(0.5) == 1.0);
  CHECK(iterlog(std::exp(std::numbers::e)) == 1.0);
  CHECK(iterlog(std::exp(std::exp(2.0))) == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(iterlog(1e6) == doctest::Approx(std::log(std::log(1e6))).epsilon(1e-15));
  CHECK(iterlog(1e6) == doctest::Approx(2.62579).epsilon(1e-5));
  CHECK_THROWS_AS(iterlog(0.0), DomainError);
  CHECK_THROWS_AS(iterlog(-1.0), DomainError);
  CHECK(normalizer(0.0) == 1.0);
}

TEST_CASE("bracket norms") {
  SUBCASE("diagonal rademacher cells: s2_n = n") {
    const auto model = AlgebraModel::make(ModelKind::diagonal, 2, 6);
    const auto path = gen_cell_martingale(model, BoundSpec::constant(1.0), CellLaw::rademacher, 3);
    for (std::size_t n = 1; n <= 6; ++n) CHECK(path.summary.s2[n - 1] == doctest::Approx(double(n)).epsilon(1e-14));
    CHECK(path.md_residual <= 1e-12);
  }
  SUBCASE("d_1^2 = 4: s2_1 = 4") {
    const auto model = AlgebraModel::make(ModelKind::tensor, 2, 1);
    const auto path = assemble_path(model, {pauli_z() * 2.0});
    CHECK(path.summary.s2[0] == doctest::Approx(4.0).epsilon(1e-14));
  }
  SUBCASE("zero differences") {
    const auto model = AlgebraModel::make(ModelKind::tensor, 2, 3);
    const auto path = gen_tensor_martingale(model, {BoundSpec::constant(0.0), Coupling::haar, {}}, 1);
    for (double s : path.summary.s2) CHECK(s == 0.0);
    for (const auto& d : path.differences) CHECK(d.matrix().cwiseAbs().maxCoeff() == 0.0);
    const auto g = growth_profile(path.summary);
    CHECK(g.undefined == 3);
    CHECK(std::isnan(g.alpha[0]));
  }
}

TEST_CASE("assemble_path rejects non-martingales") {
  const auto model = AlgebraModel::make(ModelKind::tensor, 2, 2);
  const auto one = Operator::identity(4);
  CHECK_THROWS_AS(assemble_path(model, {one}), DomainError);
  // d_1 must live in N_1
  CHECK_THROWS_AS(assemble_path(model, {kron(Operator::identity(2), pauli_z())}), DomainError);
  CHECK_THROWS_AS(assemble_path(model, {kron(pauli_z(), Operator::identity(2)), kron(pauli_z(), Operator::identity(2)),
                                        kron(pauli_z(), Operator::identity(2))}),
                  DomainError);
}

TEST_CASE("stopping rule") {
  std::vector<double> s2(5000);
  std::iota(s2.begin(), s2.end(), 1.0);
  // the double nearest sqrt(2) is slightly above it; step down one ulp so eta^2n stays at or below 2^n
  const auto st = stopping_indices(s2, std::nextafter(std::sqrt(2.0), 0.0), 12);
  CHECK(st.k.front() == 0);
  CHECK_FALSE(st.truncated);
  for (int n = 1; n <= 12; ++n) CHECK(st.k[n] == (std::size_t{1} << n) - 1);

  // both defining inequalities for a ragged sequence
  CounterRng rng(9, 0, "steps");
  std::vector<double> ragged;
  double acc = 0.0;
  for (int i = 0; i < 3000; ++i) ragged.push_back(acc += 2.0 * to_unit(rng()));
  const double eta = 1.3;
  const auto r = stopping_indices(ragged, eta, 60);
  CHECK(r.truncated);
  for (std::size_t n = 1; n < r.k.size(); ++n) {
    const std::size_t k = r.k[n];
    const double level = std::pow(eta, 2.0 * double(n));
    CHECK(ragged[k] >= level);                      // s2_{k+1}
    CHECK((k == 0 ? 0.0 : ragged[k - 1]) < level);  // s2_k
  }
  CHECK(r.truncated_at == int(r.k.size()));
  CHECK(std::pow(eta, 2.0 * r.truncated_at) > ragged.back());

  const std::vector<double> flat(100, 3.0);
  const auto f = stopping_indices(flat, 1.5, 5);
  CHECK(f.truncated);
  CHECK(f.truncated_at == 2);
  CHECK_THROWS_AS(stopping_indices(flat, 2.0, 5), DomainError);
  CHECK_THROWS_AS(stopping_indices(std::vector<double>{2.0, 1.0}, 1.5, 5), DomainError);
}

TEST_CASE("tensor generator") {
  SUBCASE("commuting sigma_z example") {
    const auto model = AlgebraModel::make(ModelKind::tensor, 2, 2);
    const auto path = gen_tensor_martingale(model, {BoundSpec::constant(1.0), Coupling::none, pauli_z()}, 4);
    const auto one = Operator::identity(2);
    CHECK(max_abs_diff(path.differences[0].matrix(), kron(pauli_z(), one).matrix()) == 0.0);
    CHECK(max_abs_diff(path.differences[1].matrix(), kron(one, pauli_z()).matrix()) == 0.0);
    CHECK(path.summary.s2[1] == doctest::Approx(2.0).epsilon(1e-14));
  }
  SUBCASE("haar coupling: martingale, noncommuting, plan matches generic bracket") {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      const auto model = AlgebraModel::make(ModelKind::tensor, 2, 5);
      const auto path = gen_tensor_martingale(model, {BoundSpec::constant(0.7), Coupling::haar, {}}, seed);
      CHECK(path.md_residual < 1e-9);
      double comm = 0.0;
      for (std::size_t j = 0; j + 1 < path.differences.size(); ++j) {
        const auto& a = path.differences[j].matrix();
        const auto& b = path.differences[j + 1].matrix();
        comm = std::max(comm, (a * b - b * a).cwiseAbs().maxCoeff());
      }
      CHECK(comm > 1e-3);
      const auto generic = bracket_norms(model, path.differences);
      for (std::size_t n = 0; n < 5; ++n) {
        CHECK(generic.s2[n] == doctest::Approx(path.summary.s2[n]).epsilon(1e-10));
        CHECK(generic.dnorm[n] == doctest::Approx(0.7).epsilon(1e-10));
        CHECK(path.summary.dnorm[n] == doctest::Approx(0.7).epsilon(1e-12));
      }
      for (std::size_t n = 0; n <= 5; ++n) CHECK(path.partials[n].hermitian());
    }
  }
  SUBCASE("guards") {
    CHECK_THROWS_AS(plan_tensor_martingale(AlgebraModel::make(ModelKind::pinching, 2, 2), {}, 1), DomainError);
    const auto model = AlgebraModel::make(ModelKind::tensor, 2, 2);
    CHECK_THROWS_AS(plan_tensor_martingale(model, {BoundSpec::constant(1.0), Coupling::none, Operator::identity(2)}, 1),
                    DomainError);
    CHECK_THROWS_AS(AlgebraModel::make(ModelKind::tensor, 2, 13), ConfigError);
  }
  SUBCASE("plans scale beyond the dense cap") {
    const auto model = AlgebraModel::make(ModelKind::tensor, 2, 40, std::size_t{1} << 62);
    const auto plan = plan_tensor_martingale(model, {BoundSpec::constant(1.0), Coupling::haar, pauli_z()}, 2);
    CHECK(plan.summary.s2.back() == doctest::Approx(40.0).epsilon(1e-13));
  }
}

TEST_CASE("commuting tensor model reproduces the diagonal statistics") {
  const auto model = AlgebraModel::make(ModelKind::tensor, 2, 10, std::size_t{1} << 20);
  const auto plan = plan_tensor_martingale(model, {BoundSpec::constant(1.0), Coupling::none, pauli_z()}, 7);
  const DiagonalPath diag({10, IncrementLaw::rademacher, {}, 64}, 7);
  const auto a = growth_profile(plan.summary);
  const auto b = growth_profile(diag.summary());
  for (std::size_t n = 0; n < 10; ++n) {
    CHECK(plan.summary.s2[n] == diag.summary().s2[n]);
    CHECK(a.alpha[n] == b.alpha[n]);
  }
}

TEST_CASE("generic dense and cell generators") {
  for (auto kind : {ModelKind::tensor, ModelKind::pinching}) {
    const auto model = AlgebraModel::make(kind, 2, 4);
    const auto path = gen_model_martingale(model, BoundSpec::constant(1.5), 11);
    CHECK(path.md_residual < 1e-9);
    for (double d : path.summary.dnorm) CHECK(d == doctest::Approx(1.5).epsilon(1e-10));
    for (std::size_t n = 1; n < path.summary.s2.size(); ++n) CHECK(path.summary.s2[n] >= path.summary.s2[n - 1]);
  }
  const auto model = AlgebraModel::make(ModelKind::diagonal, 3, 5);
  const auto g = gen_cell_martingale(model, BoundSpec::constant(2.0), CellLaw::gaussian, 5);
  CHECK(g.md_residual < 1e-12);
  for (double d : g.summary.dnorm) CHECK(d == doctest::Approx(2.0).epsilon(1e-12));
  CHECK_THROWS_AS(gen_cell_martingale(AlgebraModel::make(ModelKind::tensor, 2, 2), BoundSpec::constant(1.0),
                                      CellLaw::rademacher, 1),
                  DomainError);
}

TEST_CASE("growth-bounded generator") {
  const auto model = AlgebraModel::make(ModelKind::diagonal, 2, 20);
  const auto spec = BoundSpec::growth(1.0, 0.5);
  const auto path = gen_cell_martingale(model, spec, CellLaw::rademacher, 1);
  std::vector<double> target;
  for (std::size_t n = 1; n <= 20; ++n) target.push_back(default_alpha(n, 1.0));
  target[0] = 1.0;  // alpha_1 = ||d_1||/s_1 = 1 whatever M_1 is
  // before s2 passes e^e the previous-bracket rule and the realized alpha may differ;
  // check the bound itself and the realized alpha past the clamp.
  for (std::size_t n = 2; n <= 20; ++n) {
    const double s2p = path.summary.s2[n - 2];
    CHECK(path.summary.dnorm[n - 1] == doctest::Approx(default_alpha(n, 1.0) * std::sqrt(s2p) / normalizer(s2p)));
  }
  const auto gp = growth_profile(path.summary, std::span<const double>(target));
  CHECK(gp.within_target);
  CHECK(gp.undefined == 0);
}

TEST_CASE("diagonal Monte Carlo paths") {
  SUBCASE("rademacher unit variance") {
    const DiagonalPath p({200, IncrementLaw::rademacher, {}, 256}, 3);
    for (std::size_t n = 1; n <= 200; ++n) CHECK(p.summary().s2[n - 1] == double(n));
    const auto d = p.difference(17);
    for (std::size_t i = 0; i < d.size(); ++i) CHECK(std::abs(d[i]) == 1.0);
    std::size_t plus = 0;
    for (std::size_t i = 0; i < 128; ++i) {
      CHECK(d[i] == -d[i + 128]);
      plus += d[i] > 0;
    }
    CHECK(plus > 30);
    CHECK(plus < 98);
    const auto x = p.partial_sum(200);
    CHECK(std::abs(normalized_trace(x)) <= 1e-12);
    // streaming and one-shot agree
    std::vector<double> last;
    p.for_each_step([&](std::size_t n, std::span<const double> xs) {
      if (n == 200) last.assign(xs.begin(), xs.end());
    });
    for (std::size_t i = 0; i < 256; ++i) CHECK(last[i] == x[i]);
  }
  SUBCASE("horizon one") {
    const DiagonalPath p({1, IncrementLaw::uniform, {}, 64}, 8);
    CHECK(std::abs(normalized_trace(p.partial_sum(1))) <= 1e-12);
    CHECK(p.summary().dnorm[0] == doctest::Approx(std::sqrt(3.0)));
  }
  SUBCASE("variance profile") {
    const std::vector<double> v{0.5, 2.0, 1.0, 4.0};
    const DiagonalPath p({4, IncrementLaw::uniform, v, 4096}, 2);
    double acc = 0.0;
    for (std::size_t n = 1; n <= 4; ++n) {
      acc += v[n - 1];
      CHECK(p.summary().s2[n - 1] == doctest::Approx(acc).epsilon(1e-15));
      const auto d = p.difference(n);
      CHECK(operator_norm(d) <= std::sqrt(3.0 * v[n - 1]));
      // empirical second moment near v_n
      CHECK(normalized_trace(d * d) == doctest::Approx(v[n - 1]).epsilon(0.1));
    }
  }
  SUBCASE("alternating") {
    const DiagonalPath p({9, IncrementLaw::alternating, {}, 8}, 0);
    CHECK(operator_norm(p.partial_sum(8)) == 0.0);
    CHECK(operator_norm(p.partial_sum(9)) == 1.0);
  }
  SUBCASE("guards") {
    CHECK_THROWS_AS(DiagonalPath({0, IncrementLaw::rademacher, {}, 64}, 1), DomainError);
    CHECK_THROWS_AS(DiagonalPath({3, IncrementLaw::rademacher, {}, 63}, 1), DomainError);
    CHECK_THROWS_AS(DiagonalPath({3, IncrementLaw::rademacher, {1.0, 2.0}, 64}, 1), DomainError);
    CHECK_THROWS_AS(DiagonalPath({3, IncrementLaw::rademacher, {-1.0}, 64}, 1), DomainError);
  }
  SUBCASE("determinism and scalar/avx2 equality") {
    const DiagonalPath a({50, IncrementLaw::rademacher, {}, 1000}, 42);
    const DiagonalPath b({50, IncrementLaw::rademacher, {}, 1000}, 42);
    const DiagonalPath c({50, IncrementLaw::rademacher, {}, 1000}, 43);
    CHECK(max_abs_diff(a.partial_sum(50).to_operator().matrix(), b.partial_sum(50).to_operator().matrix()) == 0.0);
    CHECK(operator_norm(a.partial_sum(50) - c.partial_sum(50)) > 0.0);
  }
}

TEST_CASE("GUE increments") {
  const Index n = 200;
  const auto g = gen_gue_increments(n, 3, 5);
  REQUIRE(g.size() == 3);
  const double second = simpson([](double x) { return x * x * semicircle_density(x); }, -2.0, 2.0, 20000);
  CHECK(second == doctest::Approx(1.0).epsilon(1e-4));
  for (const auto& x : g) {
    CHECK(x.hermitian());
    CHECK(std::abs(real_trace(Operator((x * x).matrix(), true)) - second) <= 3.0 / std::sqrt(double(n)));
    CHECK(std::abs(normalized_trace(x)) <= 3.0 / std::sqrt(double(n)));
    const double nrm = operator_norm(x);
    CHECK(nrm > 1.7);
    CHECK(nrm < 2.3);
  }
  // stream matches the batch
  GueStream s(n, 5);
  s.next();
  CHECK(max_abs_diff(s.next(), g[1].matrix()) == 0.0);
  CHECK_THROWS_AS(gen_gue_increments(1, 1, 0), DomainError);

  // normalized sum of 100 increments is close to the semicircle
  GueStream st(n, 11);
  Matrix acc = Matrix::Zero(n, n);
  for (int i = 0; i < 100; ++i) acc += st.next();
  const Operator sum(acc / 10.0, true);
  const auto ev = eigenvalues(sum);
  CHECK(ks_distance_semicircle(std::span<const double>(ev.data(), ev.size())) < 0.05);
}

TEST_CASE("semicircle CDF against quadrature") {
  for (double x : {-2.5, -1.9, -1.0, -0.3, 0.0, 0.4, 1.2, 1.99, 3.0}) {
    const double a = std::max(-2.0, std::min(x, 2.0));
    const double q = a <= -2.0 ? 0.0 : simpson([](double y) { return semicircle_density(y); }, -2.0, a, 200000);
    CHECK(semicircle_cdf(x) == doctest::Approx(q).epsilon(1e-6));
  }
  const std::vector<double> one{0.0};
  CHECK(ks_distance_semicircle(one) == doctest::Approx(0.5));
}
