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

#include <cmath>
#include <random>

#include "nclil/operator.hpp"
#include "nclil/rng.hpp"

namespace nclil::testing {

inline Matrix gaussian_matrix(Index n, CounterRng& rng) {
  std::normal_distribution<double> nd;
  Matrix g(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j) g(i, j) = Complex(nd(rng), nd(rng)) / std::sqrt(2.0 * n);
  return g;
}

inline Operator random_hermitian(Index n, CounterRng& rng) {
  const Matrix g = gaussian_matrix(n, rng);
  return Operator(0.5 * (g + g.adjoint()), true);
}

inline Operator random_operator(Index n, CounterRng& rng) { return Operator(gaussian_matrix(n, rng)); }

inline double max_abs_diff(const Matrix& a, const Matrix& b) { return (a - b).cwiseAbs().maxCoeff(); }

/// Oracle for mu_t: first s on the grid {0, step, 2 step, ...} with
/// #{sigma > s}/n <= t, counted with a plain strict comparison.
inline double brute_force_singular_number(const RealVector& sigma, double t, double step) {
  const double n = static_cast<double>(sigma.size());
  for (long g = 0;; ++g) {
    const double s = static_cast<double>(g) * step;
    double above = 0.0;
    for (Index i = 0; i < sigma.size(); ++i) above += sigma(i) > s ? 1.0 : 0.0;
    if (above / n <= t) return s;
  }
}

}  // namespace nclil::testing
