// Copyright 2026 The Philter Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <complex>
#include <concepts>
#include <cstdint>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace philter {

using cplx = std::complex<double>;
using Rng = std::mt19937_64;

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Largest register the dense simulator will allocate (2^24 amplitudes, 256 MiB).
inline constexpr int kMaxQubits = 24;

/// Precondition or input-format violation. Maps to CLI exit code 1.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Requested register does not fit in kMaxQubits.
class CapacityError : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

/// A protocol ran but could not produce an in-window result. Maps to exit code 2.
class ProtocolFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline void require(bool condition, const std::string& message) {
  if (!condition) throw InvalidArgument(message);
}

inline void require(bool condition, const char* message) {
  if (!condition) throw InvalidArgument(message);
}

// Same, with the message built only on failure (for checks on hot paths).
template <std::invocable F>
inline void require(bool condition, F&& message) {
  if (!condition) throw InvalidArgument(std::string(message()));
}

inline void require_capacity(int qubits, const std::string& what) {
  if (qubits > kMaxQubits) {
    throw CapacityError(what + " needs " + std::to_string(qubits) + " qubits; capacity is " +
                        std::to_string(kMaxQubits));
  }
}

// Uniform double in [0, 1) with 53 random bits; identical across standard libraries.
inline double uniform01(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

// Uniform integer in [0, n). Rejection sampling keeps it unbiased and portable.
inline std::uint64_t uniform_below(Rng& rng, std::uint64_t n) {
  if (n <= 1) return 0;
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
  std::uint64_t r;
  do {
    r = rng();
  } while (r >= limit);
  return r % n;
}

/// Independent stream for run `index` of a batch seeded with `seed`.
inline Rng derive_rng(std::uint64_t seed, std::uint64_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
  return Rng(seq);
}

inline bool is_bitstring(std::string_view bits) {
  for (char c : bits) {
    if (c != '0' && c != '1') return false;
  }
  return true;
}

/// MSB-first: "0110" -> 6.
inline std::uint64_t bits_to_uint(std::string_view bits) {
  require(bits.size() <= 63, "bitstring longer than 63 bits");
  require(is_bitstring(bits), "bitstring may only contain '0' and '1': " + std::string(bits));
  std::uint64_t v = 0;
  for (char c : bits) v = (v << 1) | static_cast<std::uint64_t>(c == '1');
  return v;
}

inline std::string uint_to_bits(std::uint64_t value, int width) {
  std::string s(static_cast<std::size_t>(width), '0');
  for (int i = width - 1; i >= 0; --i) {
    s[static_cast<std::size_t>(i)] = (value & 1U) ? '1' : '0';
    value >>= 1;
  }
  return s;
}

inline double norm_squared(const std::vector<cplx>& v) {
  double s = 0.0;
  for (const auto& a : v) s += std::norm(a);
  return s;
}

}  // namespace philter
