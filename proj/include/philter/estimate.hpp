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

#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "philter/amplify.hpp"
#include "philter/common.hpp"
#include "philter/qpe.hpp"
#include "philter/state_vector.hpp"

// Amplitude estimation: phase estimation on Q with a t-qubit counting register.
//
// Q has eigenvalues exp(+-2i theta) on the span of A|0>, with b = sin^2 theta. A
// counting readout y estimates theta as pi y / 2^t, and sin^2 is symmetric under
// y -> 2^t - y, so both branches give the same estimate.
//
// The readout distribution only depends on g(d) = <Psi|Q^d|Psi>, d < 2^t:
//   P(y) = 2^-2t sum_{|d| < 2^t} (2^t - |d|) exp(-2 pi i y d / 2^t) g(d),
// with g(-d) = conj g(d). This is what the counting-register circuit measures,
// obtained with one (m + n)-qubit work vector instead of a (t + m + n)-qubit one.

namespace philter {

class EstimationError : public ProtocolFailure {
 public:
  using ProtocolFailure::ProtocolFailure;
};

inline double qae_error_bound(double b, int t, int c) {
  require(b >= 0.0 && b <= 1.0, "probability must be in [0, 1]");
  require(t >= 1 && t <= 30, "t must be in [1, 30]");
  require(c >= 1, "c must be a positive integer");
  const double big = std::ldexp(1.0, t);
  return kTwoPi * c * std::sqrt(b * (1.0 - b)) / big + c * c * kPi * kPi / (big * big);
}

/// Probability that the estimate lands within qae_error_bound(b, t, c).
inline double qae_success_probability(int c) {
  require(c >= 1, "c must be a positive integer");
  return c == 1 ? 8.0 / (kPi * kPi) : 1.0 - 1.0 / (2.0 * (c - 1));
}

inline double qae_estimate_from_readout(std::uint64_t y, int t) {
  const double s = std::sin(kPi * std::ldexp(static_cast<double>(y), -t));
  return s * s;
}

struct AmplitudeEstimate {
  int t = 0;
  std::uint64_t y = 0;
  double theta = 0.0;      // pi y / 2^t
  double b = 0.0;          // sin^2 theta
  double bound = 0.0;      // qae_error_bound(b, t, 1)
  std::uint64_t qpe_applications = 0;
};

/// Counting-register readout distribution for Q built from `grover`.
inline std::vector<double> qae_distribution(const GroverOperator& grover, int t) {
  require(t >= 1 && t <= 20, "t must be in [1, 20]");
  const std::size_t big = std::size_t{1} << t;
  StateVector psi = grover.prepare();
  StateVector work = psi;
  std::vector<cplx> g(big);
  const auto p = psi.amplitudes();
  for (std::size_t d = 0; d < big; ++d) {
    if (d > 0) grover.apply(work);
    cplx acc = 0.0;
    const auto w = work.amplitudes();
    for (std::size_t i = 0; i < p.size(); ++i) acc += std::conj(p[i]) * w[i];
    g[d] = acc;
  }
  // P(y) = T^-2 [T g(0) + 2 Re sum_{d >= 1} (T - d) g(d) e^{-2 pi i y d / T}]: one FFT.
  std::vector<cplx> c(big);
  for (std::size_t d = 1; d < big; ++d) c[d] = static_cast<double>(big - d) * g[d];
  kernels::fft(c, -1, kernels::fft_twiddles(big));
  const double tt = static_cast<double>(big);
  std::vector<double> out(big);
  for (std::size_t y = 0; y < big; ++y) {
    const double v = (tt * g[0].real() + 2.0 * c[y].real()) / (tt * tt);
    out[y] = std::max(0.0, v);
  }
  return out;
}

/// The same distribution from the explicit circuit: t counting qubits on top of
/// the (m + n) work qubits, Hadamards, controlled Q^(2^j), inverse QFT. Memory
/// grows as 2^(t + m + n); intended for cross-checks at small sizes.
inline std::vector<double> qae_distribution_full_state(const GroverOperator& grover, int t) {
  const int w = grover.layout().total();
  require(t >= 1, "t must be >= 1");
  require_capacity(t + w, "full-state amplitude estimation");
  const std::size_t big = std::size_t{1} << t, block = std::size_t{1} << w;
  StateVector work = grover.prepare();
  StateVector full(t + w);
  auto amps = full.amplitudes();
  // After the Hadamards and the controlled powers, counting value c holds Q^c Psi.
  const double s = 1.0 / std::sqrt(static_cast<double>(big));
  for (std::size_t c = 0; c < big; ++c) {
    if (c > 0) grover.apply(work);
    const auto src = work.amplitudes();
    for (std::size_t i = 0; i < block; ++i) amps[c * block + i] = src[i] * s;
  }
  const auto counting = qubit_range(0, t);
  inverse_qft(full, counting);
  return marginal_distribution(full, counting);
}

/// b estimate for the window's prefix mass of QPE(H) O |0>. Costs 2^(t+1) - 1
/// applications of QPE(H) O or its inverse.
inline AmplitudeEstimate qae(const QpeCircuit& circuit, const EnergyWindow& window, int t,
                             Rng& rng) {
  const std::uint64_t before = qpe_call_count();
  const GroverOperator grover(preparation_pair(circuit), circuit.layout(), window);
  const auto dist = qae_distribution(grover, t);
  AmplitudeEstimate est;
  est.t = t;
  est.y = sample_index(dist, rng);
  est.theta = kPi * std::ldexp(static_cast<double>(est.y), -t);
  est.b = qae_estimate_from_readout(est.y, t);
  est.bound = qae_error_bound(est.b, t, 1);
  est.qpe_applications = qpe_call_count() - before;
  return est;
}

inline AmplitudeEstimate qae(const SpectralModel& model, const AnsatzSpec& ansatz,
                             const EnergyWindow& window, int m, int t, Rng& rng) {
  return qae(QpeCircuit(model, ansatz, m), window, t, rng);
}

struct EstimateAndK {
  AmplitudeEstimate estimate;
  int k = 0;
};

/// Amplitude estimation followed by k = optimal_iterations(b estimate). A zero
/// estimate has no usable k and raises EstimationError.
inline EstimateAndK estimate_then_k(const QpeCircuit& circuit, const EnergyWindow& window, int t,
                                    Rng& rng) {
  EstimateAndK out;
  out.estimate = qae(circuit, window, t, rng);
  if (out.estimate.b <= 0.0) {
    throw EstimationError(
        "amplitude estimation returned b = 0 at t = " + std::to_string(t) +
        ": no detectable overlap with window " + window.prefix() +
        "; increase t or change the ansatz");
  }
  out.k = optimal_iterations(out.estimate.b);
  return out;
}

inline EstimateAndK estimate_then_k(const SpectralModel& model, const AnsatzSpec& ansatz,
                                    const EnergyWindow& window, int m, int t, Rng& rng) {
  return estimate_then_k(QpeCircuit(model, ansatz, m), window, t, rng);
}

}  // namespace philter
