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

// GUE increments as finite-dimensional stand-ins for free semicircular
// elements, and the semicircle law on [-2, 2].

#include <cstdint>
#include <span>
#include <vector>

#include "nclil/operator.hpp"
#include "nclil/rng.hpp"

namespace nclil {

/// Hermitian N x N with diagonal N(0, 1/N) and off-diagonal (a + ib)/sqrt(2N),
/// a, b standard normal; spectral law -> semicircle of radius 2.
Matrix gue_matrix(Index n, CounterRng& rng);

/// Independent GUE increments; step i draws from substream i. N >= 2.
std::vector<Operator> gen_gue_increments(Index n, std::size_t steps, std::uint64_t seed);

/// Same sequence as gen_gue_increments, produced one at a time.
class GueStream {
 public:
  GueStream(Index n, std::uint64_t seed);
  Index size() const noexcept { return n_; }
  std::size_t drawn() const noexcept { return drawn_; }
  Matrix next();

 private:
  Index n_;
  CounterRng base_;
  std::size_t drawn_ = 0;
};

/// (1/2pi) sqrt(4 - x^2) on [-2, 2].
double semicircle_density(double x);
double semicircle_cdf(double x);

/// sup_x |F_emp(x) - F(x)| for the semicircle CDF F.
double ks_distance_semicircle(std::span<const double> samples);

}  // namespace nclil
