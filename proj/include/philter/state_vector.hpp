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

#include <Eigen/Dense>
#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "philter/common.hpp"

// Dense state-vector simulator.
//
// Qubit ordering is MSB-first: in an N-qubit register qubit 0 is the most
// significant bit of the basis index, qubit N-1 the least significant. A register
// listed as {q0, q1, ...} reads q0 as the most significant bit of its value, so an
// energy register on qubits 0..m-1 holds the phase bits E(1)..E(m) left to right.

namespace philter {

class Unitary {
 public:
  Unitary() = default;

  explicit Unitary(Eigen::MatrixXcd matrix, double tolerance = 1e-10) : m_(std::move(matrix)) {
    const auto d = m_.rows();
    require(d == m_.cols() && d >= 1, "unitary must be square");
    require((d & (d - 1)) == 0, "unitary dimension must be a power of two");
    const double dev =
        (m_ * m_.adjoint() - Eigen::MatrixXcd::Identity(d, d)).cwiseAbs().maxCoeff();
    require(dev < tolerance, "matrix is not unitary (max |UU^dag - I| = " + std::to_string(dev) + ")");
  }

  static Unitary identity(int qubits) {
    const auto d = Eigen::Index{1} << qubits;
    return Unitary(Eigen::MatrixXcd::Identity(d, d));
  }

  Eigen::Index dimension() const { return m_.rows(); }
  int num_qubits() const {
    int q = 0;
    while ((Eigen::Index{1} << q) < m_.rows()) ++q;
    return q;
  }
  const Eigen::MatrixXcd& matrix() const { return m_; }
  Unitary adjoint() const { return Unitary(m_.adjoint(), 1e-8); }
  Unitary operator*(const Unitary& rhs) const { return Unitary(m_ * rhs.m_, 1e-8); }

 private:
  Eigen::MatrixXcd m_;
};

namespace gates {

inline Unitary h() {
  const double s = 1.0 / std::sqrt(2.0);
  Eigen::MatrixXcd m(2, 2);
  m << s, s, s, -s;
  return Unitary(m);
}

inline Unitary x() {
  Eigen::MatrixXcd m(2, 2);
  m << 0, 1, 1, 0;
  return Unitary(m);
}

inline Unitary z() {
  Eigen::MatrixXcd m(2, 2);
  m << 1, 0, 0, -1;
  return Unitary(m);
}

/// exp(-i theta Y / 2)
inline Unitary ry(double theta) {
  const double c = std::cos(theta / 2), s = std::sin(theta / 2);
  Eigen::MatrixXcd m(2, 2);
  m << c, -s, s, c;
  return Unitary(m);
}

/// exp(-i theta Z / 2)
inline Unitary rz(double theta) {
  Eigen::MatrixXcd m(2, 2);
  m << std::polar(1.0, -theta / 2), 0, 0, std::polar(1.0, theta / 2);
  return Unitary(m);
}

inline Unitary phase(double phi) {
  Eigen::MatrixXcd m(2, 2);
  m << 1, 0, 0, std::polar(1.0, phi);
  return Unitary(m);
}

}  // namespace gates

namespace kernels {

inline std::uint64_t bit_of(int num_qubits, int qubit) {
  return std::uint64_t{1} << (num_qubits - 1 - qubit);
}

inline void check_qubits(int num_qubits, std::span<const int> qubits) {
  std::vector<bool> seen(static_cast<std::size_t>(num_qubits), false);
  for (int q : qubits) {
    require(q >= 0 && q < num_qubits, [&] {
      return "qubit " + std::to_string(q) + " out of range for " + std::to_string(num_qubits) +
             "-qubit register";
    });
    require(!seen[static_cast<std::size_t>(q)], [&] { return "duplicate qubit " + std::to_string(q); });
    seen[static_cast<std::size_t>(q)] = true;
  }
}

// Offsets of the 2^k local basis states of `qubits` (qubits[0] most significant).
inline std::vector<std::uint64_t> local_offsets(int num_qubits, std::span<const int> qubits) {
  const std::size_t k = qubits.size();
  std::vector<std::uint64_t> off(std::size_t{1} << k, 0);
  for (std::size_t l = 1; l < off.size(); ++l) {
    const auto i = static_cast<std::size_t>(std::countr_zero(l));  // bit i of l is qubits[k-1-i]
    off[l] = off[l & (l - 1)] | bit_of(num_qubits, qubits[k - 1 - i]);
  }
  return off;
}

// Enumerates every basis index whose `fixed` bits are all zero.
class BaseIndices {
 public:
  BaseIndices(int num_qubits, std::span<const int> fixed) : n_(num_qubits) {
    for (int q : fixed) positions_.push_back(num_qubits - 1 - q);
    std::sort(positions_.begin(), positions_.end());
    count_ = std::uint64_t{1} << (num_qubits - static_cast<int>(fixed.size()));
  }
  std::uint64_t count() const { return count_; }
  std::uint64_t operator()(std::uint64_t r) const {
    for (int p : positions_) {
      const std::uint64_t low = r & ((std::uint64_t{1} << p) - 1);
      r = ((r >> p) << (p + 1)) | low;
    }
    return r;
  }

 private:
  int n_;
  std::vector<int> positions_;
  std::uint64_t count_ = 0;
};

/// Applies `u` to `targets`, restricted to the subspace where every control is |1>.
inline void apply_matrix(std::span<cplx> amps, int num_qubits, const Eigen::MatrixXcd& u,
                         std::span<const int> targets, std::span<const int> controls = {}) {
  std::vector<int> fixed(targets.begin(), targets.end());
  fixed.insert(fixed.end(), controls.begin(), controls.end());
  check_qubits(num_qubits, fixed);
  require(u.rows() == (Eigen::Index{1} << targets.size()), [&] {
    return "unitary dimension " + std::to_string(u.rows()) + " does not match " +
           std::to_string(targets.size()) + " target qubits";
  });
  std::uint64_t control_mask = 0;
  for (int c : controls) control_mask |= bit_of(num_qubits, c);

  const auto off = local_offsets(num_qubits, targets);
  const BaseIndices bases(num_qubits, fixed);
  const std::size_t d = off.size();
  std::vector<cplx> in(d), out(d);
  for (std::uint64_t r = 0; r < bases.count(); ++r) {
    const std::uint64_t base = bases(r) | control_mask;
    for (std::size_t l = 0; l < d; ++l) in[l] = amps[base + off[l]];
    for (std::size_t row = 0; row < d; ++row) {
      cplx acc = 0.0;
      for (std::size_t col = 0; col < d; ++col) {
        acc += u(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(col)) * in[col];
      }
      out[row] = acc;
    }
    for (std::size_t l = 0; l < d; ++l) amps[base + off[l]] = out[l];
  }
}

inline void hadamard(std::span<cplx> amps, int num_qubits, int qubit) {
  const std::uint64_t b = bit_of(num_qubits, qubit);
  const double s = 1.0 / std::sqrt(2.0);
  const std::uint64_t size = amps.size();
  for (std::uint64_t hi = 0; hi < size; hi += 2 * b) {
    for (std::uint64_t i = hi; i < hi + b; ++i) {
      const cplx a = amps[i], c = amps[i + b];
      amps[i] = (a + c) * s;
      amps[i + b] = (a - c) * s;
    }
  }
}

/// Pauli Z on `qubit`.
inline void phase_flip(std::span<cplx> amps, int num_qubits, int qubit) {
  const std::uint64_t b = bit_of(num_qubits, qubit);
  for (std::uint64_t i = 0; i < amps.size(); ++i) {
    if (i & b) amps[i] = -amps[i];
  }
}

/// In-place radix-2 DFT: out[y] = sum_k exp(sign * 2 pi i y k / M) in[k]. Unnormalized.
inline void fft(std::span<cplx> a, int sign, std::span<const cplx> twiddles) {
  const std::size_t n = a.size();
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  // Butterflies on raw doubles: std::complex operator* carries inf/nan
  // recovery that dominates the runtime here.
  auto* d = reinterpret_cast<double*>(a.data());
  const double sg = sign < 0 ? -1.0 : 1.0;
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const std::size_t step = n / len, half = len / 2;
    for (std::size_t j = 0; j < half; ++j) {
      const double wr = twiddles[j * step].real(), wi = sg * twiddles[j * step].imag();
      for (std::size_t i = j; i < n; i += len) {
        double* u = d + 2 * i;
        double* v = d + 2 * (i + half);
        const double vr = v[0] * wr - v[1] * wi, vi = v[0] * wi + v[1] * wr;
        v[0] = u[0] - vr;
        v[1] = u[1] - vi;
        u[0] += vr;
        u[1] += vi;
      }
    }
  }
}

inline std::vector<cplx> fft_twiddles(std::size_t n) {
  std::vector<cplx> w(std::max<std::size_t>(n / 2, 1));
  for (std::size_t j = 0; j < w.size(); ++j) {
    w[j] = std::polar(1.0, kTwoPi * static_cast<double>(j) / static_cast<double>(n));
  }
  return w;
}

/// Normalized Fourier transform on `qubits`: sign +1 is the QFT, -1 its inverse.
inline void fourier(std::span<cplx> amps, int num_qubits, std::span<const int> qubits, int sign) {
  check_qubits(num_qubits, qubits);
  if (qubits.empty()) return;
  const auto off = local_offsets(num_qubits, qubits);
  const BaseIndices bases(num_qubits, qubits);
  thread_local std::vector<cplx> tw;
  if (tw.size() != std::max<std::size_t>(off.size() / 2, 1)) tw = fft_twiddles(off.size());
  const double scale = 1.0 / std::sqrt(static_cast<double>(off.size()));
  std::vector<cplx> buf(off.size());
  for (std::uint64_t r = 0; r < bases.count(); ++r) {
    const std::uint64_t base = bases(r);
    for (std::size_t l = 0; l < off.size(); ++l) buf[l] = amps[base + off[l]];
    fft(buf, sign, tw);
    for (std::size_t l = 0; l < off.size(); ++l) amps[base + off[l]] = buf[l] * scale;
  }
}

// Value of `qubits` in basis index i, via a per-qubit mask table.
class RegisterReader {
 public:
  RegisterReader(int num_qubits, std::span<const int> qubits) {
    for (int q : qubits) masks_.push_back(bit_of(num_qubits, q));
    // Leading contiguous block: value is a plain shift.
    contiguous_ = true;
    for (std::size_t i = 0; i < qubits.size(); ++i) {
      if (qubits[i] != static_cast<int>(i)) contiguous_ = false;
    }
    shift_ = num_qubits - static_cast<int>(qubits.size());
  }
  std::uint64_t operator()(std::uint64_t i) const {
    if (contiguous_) return i >> shift_;
    std::uint64_t v = 0;
    for (auto m : masks_) v = (v << 1) | static_cast<std::uint64_t>((i & m) != 0);
    return v;
  }

 private:
  std::vector<std::uint64_t> masks_;
  bool contiguous_ = false;
  int shift_ = 0;
};

inline std::vector<double> marginal(std::span<const cplx> amps, int num_qubits,
                                    std::span<const int> qubits) {
  check_qubits(num_qubits, qubits);
  const RegisterReader read(num_qubits, qubits);
  std::vector<double> p(std::size_t{1} << qubits.size(), 0.0);
  for (std::uint64_t i = 0; i < amps.size(); ++i) p[read(i)] += std::norm(amps[i]);
  return p;
}

}  // namespace kernels

class StateVector {
 public:
  /// |0...0> on `num_qubits` qubits.
  explicit StateVector(int num_qubits) : n_(num_qubits) {
    require(num_qubits >= 1, "state vector needs at least one qubit");
    require_capacity(num_qubits, "state vector");
    amps_.assign(std::size_t{1} << num_qubits, cplx{0.0, 0.0});
    amps_[0] = 1.0;
  }

  static StateVector basis(int num_qubits, std::uint64_t index) {
    StateVector s(num_qubits);
    require(index < s.size(), "basis index out of range");
    s.amps_[0] = 0.0;
    s.amps_[index] = 1.0;
    return s;
  }

  static StateVector from_amplitudes(std::vector<cplx> amps, double tolerance = 1e-8) {
    const std::size_t n = amps.size();
    require(n >= 2 && (n & (n - 1)) == 0, "amplitude count must be a power of two >= 2");
    int q = 0;
    while ((std::size_t{1} << q) < n) ++q;
    StateVector s(q);
    const double nrm = std::sqrt(norm_squared(amps));
    require(std::abs(nrm - 1.0) <= tolerance,
            "amplitudes are not normalized (norm " + std::to_string(nrm) + ")");
    s.amps_ = std::move(amps);
    return s;
  }

  int num_qubits() const { return n_; }
  std::size_t size() const { return amps_.size(); }
  std::span<cplx> amplitudes() { return amps_; }
  std::span<const cplx> amplitudes() const { return amps_; }
  cplx operator[](std::size_t i) const { return amps_[i]; }
  cplx& operator[](std::size_t i) { return amps_[i]; }

  double norm() const { return std::sqrt(norm_squared(amps_)); }
  void normalize() {
    const double n = norm();
    require(n > 0.0, "cannot normalize the zero vector");
    for (auto& a : amps_) a /= n;
  }

 private:
  int n_;
  std::vector<cplx> amps_;
};

/// Energy register on qubits [0, m), state register on [m, m+n), optional IQPE
/// ancilla last. Energy qubit i carries phase bit E(i+1).
struct RegisterLayout {
  int energy_bits = 0;
  int state_bits = 0;
  int ancilla = 0;

  int total() const { return energy_bits + state_bits + ancilla; }
  int ancilla_qubit() const {
    require(ancilla == 1, "layout has no ancilla");
    return energy_bits + state_bits;
  }
  std::vector<int> energy_qubits() const;
  std::vector<int> state_qubits() const;
};

inline std::vector<int> qubit_range(int first, int count) {
  std::vector<int> q(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) q[static_cast<std::size_t>(i)] = first + i;
  return q;
}

inline std::vector<int> RegisterLayout::energy_qubits() const { return qubit_range(0, energy_bits); }
inline std::vector<int> RegisterLayout::state_qubits() const {
  return qubit_range(energy_bits, state_bits);
}

inline void apply_unitary(StateVector& state, const Unitary& u, std::span<const int> targets) {
  kernels::apply_matrix(state.amplitudes(), state.num_qubits(), u.matrix(), targets);
}

inline void apply_controlled_unitary(StateVector& state, int control, const Unitary& u,
                                     std::span<const int> targets) {
  require(std::find(targets.begin(), targets.end(), control) == targets.end(),
          "control qubit " + std::to_string(control) + " is also a target");
  const int controls[] = {control};
  kernels::apply_matrix(state.amplitudes(), state.num_qubits(), u.matrix(), targets, controls);
}

inline void inverse_qft(StateVector& state, std::span<const int> qubits) {
  kernels::fourier(state.amplitudes(), state.num_qubits(), qubits, -1);
}

inline void qft(StateVector& state, std::span<const int> qubits) {
  kernels::fourier(state.amplitudes(), state.num_qubits(), qubits, +1);
}

struct Measurement {
  std::string bits;
  std::uint64_t value = 0;
  double probability = 0.0;
};

inline std::vector<double> marginal_distribution(const StateVector& state,
                                                 std::span<const int> qubits) {
  return kernels::marginal(state.amplitudes(), state.num_qubits(), qubits);
}

/// Index drawn from `p` (need not be normalized).
inline std::uint64_t sample_index(std::span<const double> p, Rng& rng) {
  double total = 0.0;
  for (double v : p) total += v;
  const double u = uniform01(rng) * total;
  double acc = 0.0;
  std::uint64_t last_nonzero = 0;
  for (std::uint64_t i = 0; i < p.size(); ++i) {
    if (p[i] <= 0.0) continue;
    acc += p[i];
    last_nonzero = i;
    if (u < acc) return i;
  }
  return last_nonzero;
}

/// Samples `qubits`, collapses `state` onto the outcome and renormalizes it.
inline Measurement measure(StateVector& state, std::span<const int> qubits, Rng& rng) {
  const auto p = marginal_distribution(state, qubits);
  const std::uint64_t outcome = sample_index(p, rng);
  const kernels::RegisterReader read(state.num_qubits(), qubits);
  const double scale = 1.0 / std::sqrt(p[outcome]);
  auto amps = state.amplitudes();
  for (std::uint64_t i = 0; i < amps.size(); ++i) {
    amps[i] = (read(i) == outcome) ? amps[i] * scale : cplx{0.0, 0.0};
  }
  return {uint_to_bits(outcome, static_cast<int>(qubits.size())), outcome, p[outcome]};
}

/// Probability that the leading |prefix| qubits of `qubits` read `prefix`.
inline double probability_of(const StateVector& state, std::span<const int> qubits,
                             std::string_view prefix) {
  require(prefix.size() <= qubits.size(), "prefix longer than the register");
  kernels::check_qubits(state.num_qubits(), qubits);
  const auto lead = qubits.first(prefix.size());
  const kernels::RegisterReader read(state.num_qubits(), lead);
  const std::uint64_t want = bits_to_uint(prefix);
  double p = 0.0;
  const auto amps = state.amplitudes();
  for (std::uint64_t i = 0; i < amps.size(); ++i) {
    if (read(i) == want) p += std::norm(amps[i]);
  }
  return p;
}

}  // namespace philter
