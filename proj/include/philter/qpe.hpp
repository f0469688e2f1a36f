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
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "philter/common.hpp"
#include "philter/spectral.hpp"
#include "philter/state_vector.hpp"

namespace philter {

// Every QpeCircuit forward or inverse application bumps a per-thread counter so
// protocol reports can be audited against what the simulator actually executed.
namespace detail {
inline thread_local std::uint64_t qpe_calls = 0;
inline thread_local int qpe_counting_suspended = 0;
inline void count_qpe_call() {
  if (qpe_counting_suspended == 0) ++qpe_calls;
}
}  // namespace detail

inline std::uint64_t qpe_call_count() { return detail::qpe_calls; }
inline void reset_qpe_call_count() { detail::qpe_calls = 0; }

/// Scoped pause of the QPE call counter (used for self-checks that are not part
/// of a protocol's cost).
class SuspendQpeCounting {
 public:
  SuspendQpeCounting() { ++detail::qpe_counting_suspended; }
  ~SuspendQpeCounting() { --detail::qpe_counting_suspended; }
  SuspendQpeCounting(const SuspendQpeCounting&) = delete;
  SuspendQpeCounting& operator=(const SuspendQpeCounting&) = delete;
};

/// frac(phi * power) computed without forming a huge product for large powers.
inline double phase_times(double phi, std::uint64_t power) {
  const std::uint64_t hi = power >> 26, lo = power & ((std::uint64_t{1} << 26) - 1);
  double a = phi * std::ldexp(1.0, 26);
  a -= std::floor(a);
  double v = a * static_cast<double>(hi);
  v -= std::floor(v);
  double w = phi * static_cast<double>(lo);
  w -= std::floor(w);
  v += w;
  return v - std::floor(v);
}

/// U^power with U = exp(-i H'), exact via the eigendecomposition.
inline Unitary evolution_power(const SpectralModel& model, std::uint64_t power) {
  const auto& eig = model.eigen();
  const auto phases = model.eigenphases();
  Eigen::VectorXcd diag(static_cast<Eigen::Index>(phases.size()));
  for (std::size_t j = 0; j < phases.size(); ++j) {
    diag(static_cast<Eigen::Index>(j)) = std::polar(1.0, kTwoPi * phase_times(phases[j], power));
  }
  return Unitary(eig.vectors * diag.asDiagonal() * eig.vectors.adjoint(), 1e-9);
}

/// A = QPE(H) O on an (m + n)-qubit block laid out energy-major: amplitude index
/// x * 2^n + s for energy value x and state basis index s.
class QpeCircuit {
 public:
  QpeCircuit(SpectralModel model, const AnsatzSpec& ansatz, int m)
      : model_(std::move(model)),
        prep_(ansatz_vector(ansatz, static_cast<std::size_t>(model_.dim()))),
        m_(m),
        n_(model_.num_qubits()) {
    require(m >= 1, "energy register needs at least one qubit");
    require_capacity(m + n_, "QPE circuit");
    const auto& eig = model_.eigen();
    v_ = eig.vectors;
    vh_ = eig.vectors.adjoint();
    phases_ = model_.eigenphases();
    build_phase_tables();
  }

  const SpectralModel& model() const { return model_; }
  const AnsatzPreparation& preparation() const { return prep_; }
  int energy_bits() const { return m_; }
  int state_bits() const { return n_; }
  int qubits() const { return m_ + n_; }
  RegisterLayout layout() const { return {m_, n_, 0}; }
  std::size_t block_size() const { return std::size_t{1} << (m_ + n_); }

  void forward(std::span<cplx> block) const {
    check(block);
    detail::count_qpe_call();
    const std::size_t d = std::size_t{1} << n_;
    for (std::size_t off = 0; off < block.size(); off += d) prep_.apply(block.subspan(off, d));
    for (int q = 0; q < m_; ++q) kernels::hadamard(block, m_ + n_, q);
    ladder(block, false);
    const auto eq = qubit_range(0, m_);
    kernels::fourier(block, m_ + n_, eq, -1);
  }

  void inverse(std::span<cplx> block) const {
    check(block);
    detail::count_qpe_call();
    const auto eq = qubit_range(0, m_);
    kernels::fourier(block, m_ + n_, eq, +1);
    ladder(block, true);
    for (int q = 0; q < m_; ++q) kernels::hadamard(block, m_ + n_, q);
    const std::size_t d = std::size_t{1} << n_;
    for (std::size_t off = 0; off < block.size(); off += d) {
      prep_.apply_inverse(block.subspan(off, d));
    }
  }

  /// A|0...0>.
  StateVector prepare() const {
    StateVector s(m_ + n_);
    forward(s.amplitudes());
    return s;
  }

 private:
  static constexpr int kLoBits = 10;

  void check(std::span<cplx> block) const {
    require(block.size() == block_size(), [&] {
      return "QPE block has " + std::to_string(block.size()) + " amplitudes, expected " +
             std::to_string(block_size());
    });
  }

  // phase(j, x) = exp(2 pi i phi_j x) = hi_[j][x >> kLoBits] * lo_[j][x & mask]
  void build_phase_tables() {
    const std::size_t d = phases_.size();
    const std::uint64_t big = std::uint64_t{1} << m_;
    const std::uint64_t n_hi = (big >> kLoBits) + 1, n_lo = std::uint64_t{1} << kLoBits;
    hi_.assign(d * n_hi, cplx{});
    lo_.assign(d * n_lo, cplx{});
    for (std::size_t j = 0; j < d; ++j) {
      for (std::uint64_t h = 0; h < n_hi; ++h) {
        hi_[j * n_hi + h] = std::polar(1.0, kTwoPi * phase_times(phases_[j], h << kLoBits));
      }
      for (std::uint64_t l = 0; l < n_lo; ++l) {
        lo_[j * n_lo + l] = std::polar(1.0, kTwoPi * phase_times(phases_[j], l));
      }
    }
    n_hi_ = n_hi;
  }

  // Controlled-U^(2^(m-1-q)) from every energy qubit q: U^x on the slice of value x.
  void ladder(std::span<cplx> block, bool adjoint) const {
    const auto d = static_cast<Eigen::Index>(std::size_t{1} << n_);
    const auto cols = static_cast<Eigen::Index>(std::size_t{1} << m_);
    Eigen::Map<Eigen::MatrixXcd> b(block.data(), d, cols);
    Eigen::MatrixXcd w = vh_ * b;
    const std::uint64_t mask = (std::uint64_t{1} << kLoBits) - 1;
    const std::size_t n_lo = std::size_t{1} << kLoBits;
    const double sg = adjoint ? -1.0 : 1.0;
    for (Eigen::Index x = 0; x < cols; ++x) {
      const auto ux = static_cast<std::uint64_t>(x);
      for (Eigen::Index j = 0; j < d; ++j) {
        const auto sj = static_cast<std::size_t>(j);
        // Plain arithmetic: std::complex operator* is slow under strict IEEE rules.
        const cplx h = hi_[sj * n_hi_ + (ux >> kLoBits)], l = lo_[sj * n_lo + (ux & mask)];
        const double pr = h.real() * l.real() - h.imag() * l.imag();
        const double pi = sg * (h.real() * l.imag() + h.imag() * l.real());
        const cplx a = w(j, x);
        w(j, x) = {a.real() * pr - a.imag() * pi, a.real() * pi + a.imag() * pr};
      }
    }
    b.noalias() = v_ * w;
  }

  SpectralModel model_;
  AnsatzPreparation prep_;
  int m_;
  int n_;
  Eigen::MatrixXcd v_;
  Eigen::MatrixXcd vh_;
  std::vector<double> phases_;
  std::vector<cplx> hi_;
  std::vector<cplx> lo_;
  std::size_t n_hi_ = 0;
};

/// QPE(H) O |0>^(m+n): energy register on qubits [0, m), state register after it.
inline StateVector run_qpe(const SpectralModel& model, const AnsatzSpec& ansatz, int m) {
  return QpeCircuit(model, ansatz, m).prepare();
}

/// The same circuit assembled from explicit gates: Hadamards, a ladder of
/// controlled evolution_unitary(2^j) and inverse_qft. Slow; kept as a cross-check.
inline StateVector run_qpe_gate_level(const SpectralModel& model, const AnsatzSpec& ansatz,
                                      int m) {
  require(m >= 1, "energy register needs at least one qubit");
  const RegisterLayout layout{m, model.num_qubits(), 0};
  require_capacity(layout.total(), "QPE circuit");
  StateVector s = prepare_ansatz(ansatz, layout);
  const auto eq = layout.energy_qubits();
  const auto sq = layout.state_qubits();
  for (int q : eq) kernels::hadamard(s.amplitudes(), s.num_qubits(), q);
  for (int q = 0; q < m; ++q) {
    const double t = std::ldexp(1.0, m - 1 - q);
    apply_controlled_unitary(s, q, evolution_unitary(model, t), sq);
  }
  inverse_qft(s, eq);
  return s;
}

/// |eps_x|^2 = sin^2(pi 2^m D) / (2^(2m) sin^2(pi D)), D = (Et - x + delta) / 2^m.
inline double qpe_amplitude(std::int64_t approx, double delta, std::int64_t x, int m) {
  require(m >= 1 && m <= 62, "m must be in [1, 62]");
  const double big = std::ldexp(1.0, m);
  const double diff = static_cast<double>(approx - x) + delta;
  const double dd = diff / big;
  if (std::abs(dd - std::round(dd)) < 1e-12) return 1.0;
  // sin(pi * 2^m * dd) = sin(pi * diff); reduce diff mod 2 first for accuracy.
  const double num = std::sin(kPi * std::remainder(diff, 2.0));
  const double den = std::sin(kPi * dd);
  return (num * num) / (big * big * den * den);
}

struct MBitApproximation {
  std::uint64_t value = 0;
  double delta = 0.0;
};

/// phi * 2^m = value + delta with 0 <= delta < 1. Products within 1e-9 of an
/// integer are snapped so exactly representable phases give delta = 0.
inline MBitApproximation best_m_bit(double phi, int m) {
  require(phi >= 0.0 && phi < 1.0, "phase must be in [0, 1)");
  require(m >= 1 && m <= 62, "m must be in [1, 62]");
  double v = std::ldexp(phi, m);
  const double r = std::round(v);
  if (std::abs(v - r) < 1e-9) v = r;
  const double fl = std::floor(v);
  MBitApproximation out;
  out.value = static_cast<std::uint64_t>(fl) & ((std::uint64_t{1} << m) - 1);
  out.delta = v - fl;
  return out;
}

/// Lower bound on the probability of reading an outcome within c of the best
/// m-bit approximation of eigenstate j.
inline double qpe_error_bound(double overlap_probability, int c) {
  require(c >= 1, "c must be a positive integer");
  if (c == 1) return overlap_probability * 8.0 / (kPi * kPi);
  return overlap_probability * (1.0 - 1.0 / (2.0 * (c - 1)));
}

struct EigenComponent {
  double energy = 0.0;
  double phase = 0.0;
  double weight = 0.0;  // |a_j|^2
  std::uint64_t approx = 0;
  double delta = 0.0;
};

/// Closed-form output distribution of QPE(H) O |0>.
class QpeOutputModel {
 public:
  QpeOutputModel(const SpectralModel& model, const AnsatzSpec& ansatz, int m) : m_(m) {
    const auto a = eigen_overlaps(model, ansatz);
    const auto& energies = model.eigen().energies;
    for (std::size_t j = 0; j < energies.size(); ++j) {
      EigenComponent c;
      c.energy = energies[j];
      c.phase = model.phase_of(energies[j]);
      c.weight = std::norm(a[j]);
      const auto mb = best_m_bit(c.phase, m);
      c.approx = mb.value;
      c.delta = mb.delta;
      comps_.push_back(c);
    }
  }

  int m() const { return m_; }
  const std::vector<EigenComponent>& components() const { return comps_; }

  double epsilon2(std::size_t j, std::uint64_t x) const {
    const auto& c = comps_.at(j);
    return qpe_amplitude(static_cast<std::int64_t>(c.approx), c.delta,
                         static_cast<std::int64_t>(x), m_);
  }

  double probability(std::uint64_t x) const {
    double p = 0.0;
    for (std::size_t j = 0; j < comps_.size(); ++j) {
      if (comps_[j].weight > 0.0) p += comps_[j].weight * epsilon2(j, x);
    }
    return p;
  }

  std::vector<double> distribution() const {
    std::vector<double> p(std::size_t{1} << m_);
    for (std::uint64_t x = 0; x < p.size(); ++x) p[x] = probability(x);
    return p;
  }

  /// Sum of |eps_x|^2 over outcomes x whose leading bits equal `prefix`.
  double prefix_mass(std::size_t j, std::string_view prefix) const {
    require(static_cast<int>(prefix.size()) <= m_, "prefix longer than the energy register");
    const int rest = m_ - static_cast<int>(prefix.size());
    const std::uint64_t first = bits_to_uint(prefix) << rest;
    const std::uint64_t count = std::uint64_t{1} << rest;
    double s = 0.0;
    for (std::uint64_t x = first; x < first + count; ++x) s += epsilon2(j, x);
    return s;
  }

 private:
  int m_;
  std::vector<EigenComponent> comps_;
};

/// Feedback angle -2 pi (0.0 E(p+1) ... E(m))_2 for the tail E(p+1) ... E(m).
inline double feedback_angle(std::string_view tail) {
  require(is_bitstring(tail), "tail may only contain '0' and '1'");
  double frac = 0.0;
  for (std::size_t i = 0; i < tail.size(); ++i) {
    if (tail[i] == '1') frac += std::ldexp(1.0, -static_cast<int>(i) - 2);
  }
  return -kTwoPi * frac;
}

struct IqpeBit {
  int bit = 0;
  double probability = 0.0;  // of the observed value
  double omega = 0.0;
};

/// One round of iterative phase estimation extracting bit E(p) of an
/// m-bit phase, m = p + |tail|. The ancilla is reset to |0> afterwards.
inline IqpeBit run_iqpe_bit(const SpectralModel& model, StateVector& state,
                            const RegisterLayout& layout, int p, std::string_view tail, Rng& rng) {
  require(layout.ancilla == 1, "iterative phase estimation needs a layout with one ancilla");
  require(layout.total() == state.num_qubits(), "layout does not match the state");
  require(layout.state_bits == model.num_qubits(), "state register does not match the model");
  require(p >= 1, "bit index p must be >= 1");
  require(p - 1 + static_cast<int>(tail.size()) <= 62, "phase precision too large");
  const int anc = layout.ancilla_qubit();
  const auto sq = layout.state_qubits();
  const int nq = state.num_qubits();

  IqpeBit out;
  out.omega = feedback_angle(tail);
  kernels::hadamard(state.amplitudes(), nq, anc);
  apply_controlled_unitary(state, anc, evolution_power(model, std::uint64_t{1} << (p - 1)), sq);
  const int a[] = {anc};
  apply_unitary(state, gates::rz(out.omega), a);
  kernels::hadamard(state.amplitudes(), nq, anc);
  const Measurement meas = measure(state, a, rng);
  out.bit = static_cast<int>(meas.value);
  out.probability = meas.probability;
  if (out.bit == 1) apply_unitary(state, gates::x(), a);
  return out;
}

/// Appends a |0> ancilla as the new least significant qubit.
inline StateVector with_ancilla(const StateVector& state) {
  std::vector<cplx> amps(state.size() * 2, cplx{0.0, 0.0});
  for (std::size_t i = 0; i < state.size(); ++i) amps[2 * i] = state[i];
  return StateVector::from_amplitudes(std::move(amps), 1e-6);
}

}  // namespace philter
