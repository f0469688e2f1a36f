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

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "philter/common.hpp"
#include "philter/qpe.hpp"
#include "philter/spectral.hpp"
#include "philter/state_vector.hpp"

namespace philter {

/// Amplified prefix F of the energy register and tolerance gamma. F selects the
/// dyadic phase interval [F / 2^f, (F + 1) / 2^f); the acceptance interval F'
/// widens it by 2^-gamma on each side, clamped to [0, 1).
class EnergyWindow {
 public:
  EnergyWindow(std::string prefix, double gamma = 1.0) : prefix_(std::move(prefix)), gamma_(gamma) {
    require(!prefix_.empty(), "window prefix must be non-empty");
    require(is_bitstring(prefix_), "window prefix may only contain '0' and '1': " + prefix_);
    require(prefix_.size() <= 62, "window prefix longer than 62 bits");
    require(gamma >= 1.0, "gamma must be >= 1");
    value_ = bits_to_uint(prefix_);
  }

  const std::string& prefix() const { return prefix_; }
  int f() const { return static_cast<int>(prefix_.size()); }
  double gamma() const { return gamma_; }
  std::uint64_t value() const { return value_; }

  double phase_lo() const { return std::ldexp(static_cast<double>(value_), -f()); }
  double phase_hi() const { return std::ldexp(static_cast<double>(value_ + 1), -f()); }
  double accept_lo() const { return std::max(0.0, phase_lo() - std::exp2(-gamma_)); }
  double accept_hi() const { return std::min(1.0, phase_hi() + std::exp2(-gamma_)); }

  bool contains_phase(double phi) const { return phi >= phase_lo() && phi < phase_hi(); }
  bool accepts_phase(double phi) const { return phi >= accept_lo() && phi < accept_hi(); }

  /// An m-bit readout lies in F exactly when its leading f bits equal F.
  bool contains(std::uint64_t y, int m) const {
    require(m >= f(), "readout shorter than the window prefix");
    return (y >> (m - f())) == value_;
  }
  bool accepts(std::uint64_t y, int m) const {
    return accepts_phase(std::ldexp(static_cast<double>(y), -m));
  }

 private:
  std::string prefix_;
  double gamma_;
  std::uint64_t value_ = 0;
};

inline void check_layout(const StateVector& state, const RegisterLayout& layout) {
  require(layout.energy_bits >= 0 && layout.state_bits >= 0 &&
              (layout.ancilla == 0 || layout.ancilla == 1),
          "invalid register layout");
  require(layout.total() == state.num_qubits(), [&] {
    return "layout has " + std::to_string(layout.total()) + " qubits, state has " +
           std::to_string(state.num_qubits());
  });
}

/// Phase flip on every basis state whose energy register starts with F.
inline void s_f(StateVector& state, const RegisterLayout& layout, const EnergyWindow& window) {
  check_layout(state, layout);
  require(window.f() <= layout.energy_bits, [&] {
    return "window prefix length " + std::to_string(window.f()) + " exceeds energy register m = " +
           std::to_string(layout.energy_bits);
  });
  const int rest = state.num_qubits() - window.f();
  const std::uint64_t first = window.value() << rest;
  const std::uint64_t last = first + (std::uint64_t{1} << rest);
  auto amps = state.amplitudes();
  for (std::uint64_t i = first; i < last; ++i) amps[i] = -amps[i];
}

struct GateCost {
  int work_qubits = 0;
  int toffoli_gates = 0;
};

/// Resources of the multi-controlled-Z realization of S_F (accounting only).
inline GateCost s_f_gate_cost(int f) {
  require(f >= 1, "prefix length must be >= 1");
  return {f - 1, 2 * (f - 1)};
}

/// Phase flip on the all-zero state of the energy and state registers; an
/// ancilla, if present, is left alone.
inline void s_0(StateVector& state, const RegisterLayout& layout) {
  check_layout(state, layout);
  auto amps = state.amplitudes();
  const std::uint64_t n = std::uint64_t{1} << layout.ancilla;
  for (std::uint64_t i = 0; i < n; ++i) amps[i] = -amps[i];
}

/// A and A^-1 acting in place on a contiguous block of 2^qubits amplitudes.
struct PreparationPair {
  int qubits = 0;
  std::function<void(std::span<cplx>)> forward;
  std::function<void(std::span<cplx>)> inverse;
};

// `circuit` must outlive the returned pair.
inline PreparationPair preparation_pair(const QpeCircuit& circuit) {
  return {circuit.qubits(), [&circuit](std::span<cplx> b) { circuit.forward(b); },
          [&circuit](std::span<cplx> b) { circuit.inverse(b); }};
}

/// Q = -A S_0 A^-1 S_F. The constructor verifies A^-1 A = 1 on a fixed probe state.
class GroverOperator {
 public:
  GroverOperator(PreparationPair a, RegisterLayout layout, EnergyWindow window)
      : a_(std::move(a)), layout_(layout), window_(std::move(window)) {
    require(layout_.ancilla == 0, "the Grover iterate acts on a layout without ancilla");
    require(a_.qubits == layout_.total(), "preparation acts on " + std::to_string(a_.qubits) +
                                              " qubits, layout has " +
                                              std::to_string(layout_.total()));
    require(window_.f() <= layout_.energy_bits,
            "window prefix length exceeds the energy register");
    check_inverse_pair();
  }

  const RegisterLayout& layout() const { return layout_; }
  const EnergyWindow& window() const { return window_; }

  void apply(StateVector& state) const {
    s_f(state, layout_, window_);
    a_.inverse(state.amplitudes());
    s_0(state, layout_);
    a_.forward(state.amplitudes());
    for (auto& v : state.amplitudes()) v = -v;
  }

  void apply(StateVector& state, int k) const {
    for (int i = 0; i < k; ++i) apply(state);
  }

  /// A|0...0>.
  StateVector prepare() const {
    StateVector s(layout_.total());
    a_.forward(s.amplitudes());
    return s;
  }

 private:
  void check_inverse_pair() const {
    SuspendQpeCounting pause;
    const std::size_t size = std::size_t{1} << a_.qubits;
    std::vector<cplx> probe(size), work;
    for (std::size_t i = 0; i < size; ++i) {
      const double t = static_cast<double>(i) + 1.0;
      probe[i] = cplx{std::cos(0.7 * t), std::sin(1.3 * t)};
    }
    const double nrm = std::sqrt(norm_squared(probe));
    for (auto& v : probe) v /= nrm;
    work = probe;
    a_.forward(work);
    a_.inverse(work);
    double dev = 0.0;
    for (std::size_t i = 0; i < size; ++i) dev = std::max(dev, std::abs(work[i] - probe[i]));
    require(dev < 1e-10, "preparation forward/inverse are not inverses (deviation " +
                             std::to_string(dev) + ")");
  }

  PreparationPair a_;
  RegisterLayout layout_;
  EnergyWindow window_;
};

/// One application of Q (including the inverse-pair check).
inline void grover_iterate(StateVector& state, const PreparationPair& a,
                           const RegisterLayout& layout, const EnergyWindow& window) {
  GroverOperator(a, layout, window).apply(state);
}

/// floor(pi / (4 asin sqrt b)); zero when b > 1/2.
inline int optimal_iterations(double b) {
  require(b > 0.0 && b <= 1.0, "success probability must be in (0, 1], got " + std::to_string(b));
  if (b > 0.5) return 0;
  return static_cast<int>(std::floor(kPi / (4.0 * std::asin(std::sqrt(b))) + 1e-12));
}

inline double amplified_probability(double b, int k) {
  require(b >= 0.0 && b <= 1.0, "probability must be in [0, 1]");
  require(k >= 0, "iteration count must be >= 0");
  const double s = std::sin((2.0 * k + 1.0) * std::asin(std::sqrt(b)));
  return s * s;
}

inline double success_lower_bound(double b) {
  require(b > 0.0 && b <= 1.0, "success probability must be in (0, 1]");
  return std::max(1.0 - b, b);
}

/// ceil(log2(2 / b) + gamma - f), never negative.
inline int stabilizer_qubits(double b, double gamma, int f) {
  require(b > 0.0 && b <= 1.0, "success probability must be in (0, 1]");
  require(gamma >= 1.0, "gamma must be >= 1");
  require(f >= 1, "prefix length must be >= 1");
  const double v = std::log2(2.0 / b) + gamma - f;
  return std::max(0, static_cast<int>(std::ceil(v - 1e-12)));
}

struct EigenWindowMass {
  double energy = 0.0;
  double phase = 0.0;
  double overlap = 0.0;  // |a_j|^2
  std::uint64_t approx = 0;
  double delta = 0.0;
  double prefix_mass = 0.0;    // sum over x in X_F of |eps_x|^2
  double weighted_mass = 0.0;  // |a_j|^2 times prefix_mass
  bool in_window = false;
};

struct AmplificationDiagnostics {
  int m = 0;
  double b = 0.0;
  double theta = 0.0;
  int k = 0;
  double wanted = 0.0;
  double unwanted = 0.0;
  double margin = 0.0;  // wanted - unwanted
  std::vector<EigenWindowMass> eigenstates;
};

/// Closed-form check that the good-prefix mass coming from eigenstates inside
/// the window exceeds the mass leaking in from eigenstates outside it.
inline std::pair<bool, AmplificationDiagnostics> success_condition(const SpectralModel& model,
                                                                   const AnsatzSpec& ansatz,
                                                                   const EnergyWindow& window,
                                                                   int m) {
  require(window.f() <= m, "window prefix longer than the energy register");
  const QpeOutputModel out(model, ansatz, m);
  AmplificationDiagnostics d;
  d.m = m;
  for (std::size_t j = 0; j < out.components().size(); ++j) {
    const auto& c = out.components()[j];
    EigenWindowMass row;
    row.energy = c.energy;
    row.phase = c.phase;
    row.overlap = c.weight;
    row.approx = c.approx;
    row.delta = c.delta;
    row.prefix_mass = out.prefix_mass(j, window.prefix());
    row.weighted_mass = c.weight * row.prefix_mass;
    row.in_window = window.contains_phase(c.phase);
    (row.in_window ? d.wanted : d.unwanted) += row.weighted_mass;
    d.eigenstates.push_back(row);
  }
  d.b = std::clamp(d.wanted + d.unwanted, 0.0, 1.0);
  d.theta = std::asin(std::sqrt(d.b));
  d.k = d.b > 0.0 ? optimal_iterations(d.b) : 0;
  d.margin = d.wanted - d.unwanted;
  return {d.wanted > d.unwanted, d};
}

}  // namespace philter
