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
// Built with -mavx2 -ffp-contract=off; only reached through the runtime
// check in kernels_scalar.cpp.

#include <immintrin.h>

#include <algorithm>
#include <cmath>

#include "nclil/simd/kernels.hpp"

namespace nclil::simd {
namespace {

inline __m256d abs_pd(__m256d v) {
  return _mm256_andnot_pd(_mm256_set1_pd(-0.0), v);
}

inline double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  __m128d sh = _mm_unpackhi_pd(lo, lo);
  return _mm_cvtsd_f64(_mm_add_sd(lo, sh));
}

double sum_avx2(const double* x, std::size_t n) {
  __m256d a0 = _mm256_setzero_pd();
  __m256d a1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    a0 = _mm256_add_pd(a0, _mm256_loadu_pd(x + i));
    a1 = _mm256_add_pd(a1, _mm256_loadu_pd(x + i + 4));
  }
  for (; i + 4 <= n; i += 4) a0 = _mm256_add_pd(a0, _mm256_loadu_pd(x + i));
  double s = hsum(_mm256_add_pd(a0, a1));
  for (; i < n; ++i) s += x[i];
  return s;
}

double dot_avx2(const double* x, const double* y, std::size_t n) {
  __m256d a0 = _mm256_setzero_pd();
  __m256d a1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    a0 = _mm256_add_pd(a0, _mm256_mul_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
    a1 = _mm256_add_pd(a1, _mm256_mul_pd(_mm256_loadu_pd(x + i + 4), _mm256_loadu_pd(y + i + 4)));
  }
  for (; i + 4 <= n; i += 4)
    a0 = _mm256_add_pd(a0, _mm256_mul_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
  double s = hsum(_mm256_add_pd(a0, a1));
  for (; i < n; ++i) s += x[i] * y[i];
  return s;
}

double max_abs_avx2(const double* x, std::size_t n) {
  __m256d m = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) m = _mm256_max_pd(m, abs_pd(_mm256_loadu_pd(x + i)));
  alignas(32) double lanes[4];
  _mm256_store_pd(lanes, m);
  double r = std::max(std::max(lanes[0], lanes[1]), std::max(lanes[2], lanes[3]));
  for (; i < n; ++i) r = std::max(r, std::fabs(x[i]));
  return r;
}

void add_avx2(double* x, const double* d, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(x + i, _mm256_add_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(d + i)));
  for (; i < n; ++i) x[i] += d[i];
}

void axpy_avx2(double a, const double* d, double* x, std::size_t n) {
  const __m256d va = _mm256_set1_pd(a);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d prod = _mm256_mul_pd(va, _mm256_loadu_pd(d + i));
    _mm256_storeu_pd(x + i, _mm256_add_pd(_mm256_loadu_pd(x + i), prod));
  }
  for (; i < n; ++i) x[i] += a * d[i];
}

void rademacher_add_avx2(double* x, const std::uint64_t* bits, double scale, std::size_t n) {
  const __m256i select = _mm256_set_epi64x(8, 4, 2, 1);
  const __m256d pos = _mm256_set1_pd(scale);
  const __m256d neg = _mm256_set1_pd(-scale);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const auto nibble = static_cast<long long>((bits[i >> 6] >> (i & 63)) & 0xFULL);
    const __m256i b = _mm256_set1_epi64x(nibble);
    const __m256i on = _mm256_cmpeq_epi64(_mm256_and_si256(b, select), select);
    const __m256d step = _mm256_blendv_pd(neg, pos, _mm256_castsi256_pd(on));
    _mm256_storeu_pd(x + i, _mm256_add_pd(_mm256_loadu_pd(x + i), step));
  }
  for (; i < n; ++i) {
    const bool up = (bits[i >> 6] >> (i & 63)) & 1ULL;
    x[i] += up ? scale : -scale;
  }
}

void abs_max_update_avx2(double* running, const double* x, double scale, std::size_t n) {
  const __m256d s = _mm256_set1_pd(scale);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d v = _mm256_mul_pd(abs_pd(_mm256_loadu_pd(x + i)), s);
    _mm256_storeu_pd(running + i, _mm256_max_pd(_mm256_loadu_pd(running + i), v));
  }
  for (; i < n; ++i) running[i] = std::max(running[i], std::fabs(x[i]) * scale);
}

std::size_t count_above_avx2(const double* x, double t, std::size_t n) {
  const __m256d vt = _mm256_set1_pd(t);
  std::size_t c = 0;
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const int mask = _mm256_movemask_pd(_mm256_cmp_pd(_mm256_loadu_pd(x + i), vt, _CMP_GT_OQ));
    c += static_cast<std::size_t>(__builtin_popcount(static_cast<unsigned>(mask)));
  }
  for (; i < n; ++i) c += x[i] > t ? 1 : 0;
  return c;
}

void segment_mean_avx2(const double* in, std::size_t seg, std::size_t segments, double* out) {
  const double inv = 1.0 / static_cast<double>(seg);
  for (std::size_t j = 0; j < segments; ++j) out[j] = sum_avx2(in + j * seg, seg) * inv;
}

constexpr KernelTable kAvx2{
    Backend::avx2,      "avx2",           sum_avx2,
    dot_avx2,           max_abs_avx2,     add_avx2,
    axpy_avx2,          rademacher_add_avx2, abs_max_update_avx2,
    count_above_avx2,   segment_mean_avx2,
};

}  // namespace

const KernelTable& avx2_table_unchecked() noexcept { return kAvx2; }

}  // namespace nclil::simd
