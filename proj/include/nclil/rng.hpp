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

#include <cstdint>
#include <limits>
#include <string_view>

namespace nclil {

// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t hash_label(std::string_view label) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a
  for (char c : label) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

/// Counter-based generator. The output at position `i` of the stream keyed by
/// (seed, replica, label) is a pure function of those four values, so new
/// streams never perturb existing ones and any position can be recomputed.
/// Satisfies UniformRandomBitGenerator.
class CounterRng {
 public:
  using result_type = std::uint64_t;

  CounterRng(std::uint64_t seed, std::uint64_t replica, std::string_view label)
      : key_(derive_key(seed, replica, hash_label(label))) {}

  explicit CounterRng(std::uint64_t key) : key_(key) {}

  static constexpr std::uint64_t derive_key(std::uint64_t seed, std::uint64_t replica,
                                            std::uint64_t label) noexcept {
    return mix64(mix64(mix64(seed ^ 0x6a09e667f3bcc909ULL) ^ replica) ^ label);
  }

  /// Value at an absolute counter position; does not advance the stream.
  std::uint64_t at(std::uint64_t counter) const noexcept {
    return mix64(key_ + (counter + 1) * 0x9e3779b97f4a7c15ULL);
  }

  std::uint64_t operator()() noexcept { return at(counter_++); }

  /// Child stream for a sub-task (e.g. step k of a path).
  CounterRng substream(std::uint64_t index) const noexcept {
    return CounterRng(mix64(key_ ^ mix64(index + 0x243f6a8885a308d3ULL)));
  }

  std::uint64_t key() const noexcept { return key_; }

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

/// Uniform double in [0, 1) from the top 53 bits.
inline double to_unit(std::uint64_t bits) noexcept {
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

}  // namespace nclil
