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

#include "doctest.h"
#include "nclil/error.hpp"
#include "nclil/filtration.hpp"
#include "nclil/io.hpp"
#include "test_util.hpp"

using namespace nclil;
using nclil::testing::max_abs_diff;

namespace {

Operator pauli_x() {
  Matrix m(2, 2);
  m << 0.0, 1.0, 1.0, 0.0;
  return Operator(m, true);
}

std::vector<AlgebraModel> small_models() {
  return {AlgebraModel::make(ModelKind::tensor, 2, 3), AlgebraModel::make(ModelKind::tensor, 3, 2),
          AlgebraModel::make(ModelKind::pinching, 2, 3), AlgebraModel::make(ModelKind::diagonal, 2, 4)};
}

}  // namespace

TEST_CASE("model descriptors and guards") {
  const auto t = AlgebraModel::make(ModelKind::tensor, 2, 12);
  CHECK(t.dimension() == 4096);
  CHECK_THROWS_AS(AlgebraModel::make(ModelKind::tensor, 2, 13), ConfigError);
  CHECK_THROWS_AS(AlgebraModel::make(ModelKind::pinching, 5, 6), ConfigError);
  CHECK_NOTHROW(AlgebraModel::make(ModelKind::diagonal, 2, 20));
  CHECK_THROWS_AS(AlgebraModel::make(ModelKind::tensor, 0, 2), ConfigError);
  CHECK(t.level_size(3) == 8);

  const auto j = io::to_json(t);
  CHECK(j.at("kind") == "tensor");
  CHECK(io::model_from_json(j) == t);
  CHECK_THROWS_AS(io::model_from_json(io::Json{{"kind", "tensor"}, {"m", 4}, {"n", 7}}), ConfigError);
  CHECK_THROWS_AS(io::model_from_json(io::Json{{"kind", "bogus"}, {"m", 2}, {"n", 2}}), ConfigError);
}

TEST_CASE("E_k(1) = 1 in every model") {
  for (const auto& model : small_models()) {
    const auto one = Operator::identity(static_cast<Index>(model.dimension()));
    for (int k = 0; k <= model.depth(); ++k)
      CHECK(max_abs_diff(conditional_expectation(model, one, k).matrix(), one.matrix()) <= 1e-14);
  }
}

TEST_CASE("partial trace kills a traceless tail factor") {
  const auto model = AlgebraModel::make(ModelKind::tensor, 2, 2);
  const Operator xx = kron(pauli_x(), pauli_x());
  CHECK(conditional_expectation(model, xx, 1).matrix().cwiseAbs().maxCoeff() == 0.0);
  // sigma_x (x) 1 already lives in N_1
  const Operator x1 = kron(pauli_x(), Operator::identity(2));
  CHECK(max_abs_diff(conditional_expectation(model, x1, 1).matrix(), x1.matrix()) == 0.0);
  CHECK(max_abs_diff(conditional_expectation(model, x1, 0).matrix(), Matrix::Zero(4, 4)) == 0.0);
}

TEST_CASE("elements of N_k are fixed by E_k") {
  CounterRng rng(5, 0, "fixed");
  for (const auto& model : small_models())
    for (int k = 0; k <= model.depth(); ++k) {
      const Operator a = random_general(model, k, rng);
      CHECK(max_abs_diff(conditional_expectation(model, a, k).matrix(), a.matrix()) <= 1e-14);
    }
}

TEST_CASE("E_0 is the trace") {
  CounterRng rng(6, 0, "e0");
  for (const auto& model : small_models()) {
    const Operator x = random_hermitian(model, model.depth(), rng);
    const Operator e0 = conditional_expectation(model, x, 0);
    const double t = real_trace(x);
    CHECK(max_abs_diff(e0.matrix(), t * Matrix::Identity(x.dim(), x.dim())) <= 1e-13);
  }
}

TEST_CASE("dimension and level errors") {
  const auto model = AlgebraModel::make(ModelKind::tensor, 2, 2);
  CHECK_THROWS_AS(conditional_expectation(model, Operator::identity(3), 1), DimensionError);
  CHECK_THROWS_AS(conditional_expectation(model, Operator::identity(4), 3), DomainError);
  CHECK_THROWS_AS(conditional_expectation(model, DiagonalOperator::identity(4), 1), DimensionError);
}

TEST_CASE("diagonal model: dense and vector paths agree") {
  const auto model = AlgebraModel::make(ModelKind::diagonal, 3, 3);
  CounterRng rng(8, 0, "diag");
  const auto x = random_diagonal(model, 3, rng);
  for (int k = 0; k <= 3; ++k) {
    const auto ev = conditional_expectation(model, x, k);
    const auto ed = conditional_expectation(model, x.to_operator(), k);
    CHECK(max_abs_diff(ev.to_operator().matrix(), ed.matrix()) <= 1e-14);
  }
}

TEST_CASE("axiom verifier") {
  const auto r = verify_ce_axioms(AlgebraModel::make(ModelKind::tensor, 2, 3), 100, 1);
  CHECK(r.samples == 100);
  CHECK(r.pass());
  CHECK(r.worst() < 1e-8);
  CHECK(verify_ce_axioms(AlgebraModel::make(ModelKind::diagonal, 2, 10), 100, 2).pass());
  CHECK(verify_ce_axioms(AlgebraModel::make(ModelKind::pinching, 2, 4), 50, 3).pass());
  CHECK(verify_ce_axioms(AlgebraModel::make(ModelKind::tensor, 3, 2), 50, 4).pass());
  CHECK_THROWS_AS(verify_ce_axioms(AlgebraModel::make(ModelKind::tensor, 2, 2), 0, 1), DomainError);
}
