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

// Data-parallel inner loops of the diagonal (commutative) model.
//
// Every kernel has a scalar reference implementation and, on x86-64, an AVX2
// variant built in its own translation unit. `active()` picks the AVX2 table
// when the running CPU supports it. Elementwise kernels are bit-identical
// across variants; the reductions `sum`, `dot` and `segment_mean` may differ
// by reassociation only.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>

namespace nclil::simd {

enum class Backend { scalar, avx2 };

struct KernelTable {
  Backend backend;
  std::string_view name;

  double (*sum)(const double* x, std::size_t n);
  double (*dot)(const double* x, const double* y, std::size_t n);
  double (*max_abs)(const double* x, std::size_t n);
  // x[i] += d[i]
  void (*add)(double* x, const double* d, std::size_t n);
  // x[i] += a * d[i]
  void (*axpy)(double a, const double* d, double* x, std::size_t n);
  // x[i] += bit i of `bits` ? scale : -scale   (bit i lives in bits[i / 64])
  void (*rademacher_add)(double* x, const std::uint64_t* bits, double scale, std::size_t n);
  // running[i] = max(running[i], |x[i]| * scale)
  void (*abs_max_update)(double* running, const double* x, double scale, std::size_t n);
  // number of i with x[i] > t
  std::size_t (*count_above)(const double* x, double t, std::size_t n);
  // out[j] = mean of in[j*seg .. (j+1)*seg)
  void (*segment_mean)(const double* in, std::size_t seg, std::size_t segments, double* out);
};

const KernelTable& scalar_table() noexcept;

/// AVX2 table, or nullptr when it was not compiled in or the CPU lacks AVX2.
const KernelTable* avx2_table() noexcept;

/// Table used by the library: AVX2 when available unless the environment
/// variable NCLIL_FORCE_SCALAR is set.
const KernelTable& active() noexcept;

const KernelTable& table(Backend b);

// Convenience wrappers over the active table.
inline double sum(std::span<const double> x) { return active().sum(x.data(), x.size()); }
inline double max_abs(std::span<const double> x) { return active().max_abs(x.data(), x.size()); }

}  // namespace nclil::simd
