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
#include "nclil/simd/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <stdexcept>

namespace nclil::simd {
namespace {

double sum_scalar(const double* x, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += x[i];
  return s;
}

double dot_scalar(const double* x, const double* y, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += x[i] * y[i];
  return s;
}

double max_abs_scalar(const double* x, std::size_t n) {
  double m = 0.0;
  for (std::size_t i = 0; i < n; ++i) m = std::max(m, std::fabs(x[i]));
  return m;
}

void add_scalar(double* x, const double* d, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) x[i] += d[i];
}

void axpy_scalar(double a, const double* d, double* x, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) x[i] += a * d[i];
}

void rademacher_add_scalar(double* x, const std::uint64_t* bits, double scale, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    const bool up = (bits[i >> 6] >> (i & 63)) & 1ULL;
    x[i] += up ? scale : -scale;
  }
}

void abs_max_update_scalar(double* running, const double* x, double scale, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) running[i] = std::max(running[i], std::fabs(x[i]) * scale);
}

std::size_t count_above_scalar(const double* x, double t, std::size_t n) {
  std::size_t c = 0;
  for (std::size_t i = 0; i < n; ++i) c += x[i] > t ? 1 : 0;
  return c;
}

void segment_mean_scalar(const double* in, std::size_t seg, std::size_t segments, double* out) {
  const double inv = 1.0 / static_cast<double>(seg);
  for (std::size_t j = 0; j < segments; ++j) out[j] = sum_scalar(in + j * seg, seg) * inv;
}

constexpr KernelTable kScalar{
    Backend::scalar,      "scalar",           sum_scalar,
    dot_scalar,           max_abs_scalar,     add_scalar,
    axpy_scalar,          rademacher_add_scalar, abs_max_update_scalar,
    count_above_scalar,   segment_mean_scalar,
};

}  // namespace

#if defined(NCLIL_HAVE_AVX2)
const KernelTable& avx2_table_unchecked() noexcept;  // kernels_avx2.cpp
#endif

const KernelTable& scalar_table() noexcept { return kScalar; }

const KernelTable* avx2_table() noexcept {
#if defined(NCLIL_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
  static const bool supported = __builtin_cpu_supports("avx2");
  return supported ? &avx2_table_unchecked() : nullptr;
#else
  return nullptr;
#endif
}

const KernelTable& active() noexcept {
  static const KernelTable* chosen = [] {
    if (std::getenv("NCLIL_FORCE_SCALAR") != nullptr) return &kScalar;
    const KernelTable* v = avx2_table();
    return v != nullptr ? v : &kScalar;
  }();
  return *chosen;
}

const KernelTable& table(Backend b) {
  if (b == Backend::scalar) return kScalar;
  const KernelTable* v = avx2_table();
  if (v == nullptr) throw std::runtime_error("AVX2 kernels unavailable on this machine");
  return *v;
}

}  // namespace nclil::simd
