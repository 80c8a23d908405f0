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
#include "nclil/gue.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "nclil/error.hpp"

namespace nclil {

Matrix gue_matrix(Index n, CounterRng& rng) {
  if (n < 2) throw DomainError("GUE needs size >= 2");
  std::normal_distribution<double> nd;
  const double dn = static_cast<double>(n);
  const double diag = 1.0 / std::sqrt(dn);
  const double off = 1.0 / std::sqrt(2.0 * dn);
  Matrix g(n, n);
  for (Index j = 0; j < n; ++j) {
    g(j, j) = nd(rng) * diag;
    for (Index i = j + 1; i < n; ++i) {
      const double a = nd(rng);
      const double b = nd(rng);
      g(i, j) = Complex(a, b) * off;
      g(j, i) = std::conj(g(i, j));
    }
  }
  return g;
}

GueStream::GueStream(Index n, std::uint64_t seed) : n_(n), base_(seed, 0, "gue") {
  if (n < 2) throw DomainError("GUE needs size >= 2");
}

Matrix GueStream::next() {
  CounterRng rng = base_.substream(drawn_++);
  return gue_matrix(n_, rng);
}

std::vector<Operator> gen_gue_increments(Index n, std::size_t steps, std::uint64_t seed) {
  GueStream stream(n, seed);
  std::vector<Operator> out;
  out.reserve(steps);
  for (std::size_t i = 0; i < steps; ++i) out.emplace_back(stream.next(), true);
  return out;
}

double semicircle_density(double x) {
  if (std::abs(x) >= 2.0) return 0.0;
  return std::sqrt(4.0 - x * x) / (2.0 * std::numbers::pi);
}

double semicircle_cdf(double x) {
  if (x <= -2.0) return 0.0;
  if (x >= 2.0) return 1.0;
  return 0.5 + x * std::sqrt(4.0 - x * x) / (4.0 * std::numbers::pi) + std::asin(0.5 * x) / std::numbers::pi;
}

double ks_distance_semicircle(std::span<const double> samples) {
  if (samples.empty()) throw DomainError("KS distance of an empty sample");
  std::vector<double> s(samples.begin(), samples.end());
  std::sort(s.begin(), s.end());
  const double n = static_cast<double>(s.size());
  double d = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double f = semicircle_cdf(s[i]);
    d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
  }
  return d;
}

}  // namespace nclil
