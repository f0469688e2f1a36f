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
#include <exception>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "philter/amplify.hpp"
#include "philter/common.hpp"
#include "philter/estimate.hpp"
#include "philter/qpe.hpp"
#include "philter/spectral.hpp"
#include "philter/state_vector.hpp"

namespace philter {

/// Outcome of one protocol run. Costs are in units of QPE(H) O applications.
struct RunReport {
  std::string protocol;
  bool success = false;
  std::string message;
  std::uint64_t seed = 0;

  int m = 0;
  std::string bits;
  std::uint64_t value = 0;
  double phase = 0.0;
  double energy = 0.0;
  bool in_window = false;      // F
  bool in_acceptance = false;  // F'

  int k = 0;                         // iterations of the last attempt
  std::uint64_t grover_iterations = 0;  // over all attempts
  std::uint64_t qpe_applications = 0;   // sum of (2k + 1) over attempts
  std::uint64_t estimation_qpe_applications = 0;
  int attempts = 0;
  int retries = 0;

  std::optional<AmplitudeEstimate> estimate;
  std::map<std::string, double> probabilities;

  // iterative PHILTER
  int amplified_bits = 0;
  std::optional<bool> condition_met;
  int iqpe_rounds = 0;
  int overlap_checks = 0;
  int overlap_agreements = 0;

  // QPHILTER
  std::vector<double> l_values;
  std::vector<int> k_values;
};

inline void fill_readout(RunReport& r, const SpectralModel& model, const EnergyWindow& window,
                         const Measurement& meas, int m) {
  r.m = m;
  r.bits = meas.bits;
  r.value = meas.value;
  r.phase = std::ldexp(static_cast<double>(meas.value), -m);
  r.energy = model.decode(meas.value, m);
  r.in_window = window.contains(meas.value, m);
  r.in_acceptance = window.accepts(meas.value, m);
}

/// Energy-register size required after estimation: ceil(log2(2 / b) + gamma).
inline int required_energy_bits(double b, double gamma) {
  require(b > 0.0 && b <= 1.0, "success probability must be in (0, 1]");
  return static_cast<int>(std::ceil(std::log2(2.0 / b) + gamma - 1e-12));
}

struct PhilterOptions {
  int m = 0;
  int t = 0;
  int max_retries = 16;
  std::uint64_t seed = 0;
};

/// Estimate b, pick k, then amplify and measure until the readout is in F'.
inline RunReport philter(const SpectralModel& model, const AnsatzSpec& ansatz,
                         const EnergyWindow& window, const PhilterOptions& opt) {
  require(opt.t >= 1, "t must be >= 1");
  require(opt.max_retries >= 0, "max_retries must be >= 0");
  require(window.f() <= opt.m, "window prefix longer than the energy register");
  Rng rng(opt.seed);
  RunReport r;
  r.protocol = "philter";
  r.seed = opt.seed;
  r.m = opt.m;

  const QpeCircuit circuit(model, ansatz, opt.m);
  const auto ek = estimate_then_k(circuit, window, opt.t, rng);
  r.estimate = ek.estimate;
  r.estimation_qpe_applications = ek.estimate.qpe_applications;
  r.k = ek.k;
  r.probabilities["b_estimate"] = ek.estimate.b;
  r.probabilities["predicted_success"] = amplified_probability(ek.estimate.b, ek.k);

  const int need = required_energy_bits(ek.estimate.b, window.gamma());
  require(opt.m >= need, "energy register too small: b estimate " + std::to_string(ek.estimate.b) +
                             " with gamma " + std::to_string(window.gamma()) + " needs m >= " +
                             std::to_string(need) + ", got m = " + std::to_string(opt.m));

  const GroverOperator grover(preparation_pair(circuit), circuit.layout(), window);
  const auto eq = circuit.layout().energy_qubits();
  for (int attempt = 0; attempt <= opt.max_retries; ++attempt) {
    StateVector s = grover.prepare();
    grover.apply(s, ek.k);
    r.attempts += 1;
    r.grover_iterations += static_cast<std::uint64_t>(ek.k);
    r.qpe_applications += 2 * static_cast<std::uint64_t>(ek.k) + 1;
    if (attempt == 0) r.probabilities["window_mass"] = probability_of(s, eq, window.prefix());
    const Measurement meas = measure(s, eq, rng);
    fill_readout(r, model, window, meas, opt.m);
    if (r.in_acceptance) {
      r.success = true;
      break;
    }
  }
  r.retries = r.attempts - 1;
  if (!r.success) {
    r.message = "no readout in the acceptance interval after " + std::to_string(r.attempts) +
                " attempts";
  }
  return r;
}

struct IterativePhilterOptions {
  int m_total = 0;
  int t = 0;
  int passes = 1;
  std::uint64_t seed = 0;
  int register_bits = 0;  // amplified register size; 0 picks f + s from the estimate
  int k = -1;             // -1 derives k from the estimate
};

/// PHILTER on a small amplified register, then the remaining low-order bits by
/// iterative phase estimation on the collapsed state.
inline RunReport iterative_philter(const SpectralModel& model, const AnsatzSpec& ansatz,
                                   const EnergyWindow& window, const IterativePhilterOptions& opt) {
  require(opt.passes >= 1, "passes must be >= 1");
  require(opt.m_total >= window.f(), "window prefix longer than the target precision");
  require(opt.m_total <= 62, "target precision must be <= 62 bits");
  Rng rng(opt.seed);
  RunReport r;
  r.protocol = "iphilter";
  r.seed = opt.seed;
  r.m = opt.m_total;
  const int f = window.f();

  int reg = opt.register_bits;
  std::optional<EstimateAndK> ek;
  if (reg == 0) {
    require(opt.t >= 1, "t must be >= 1 when the register size is derived");
    // Grow the register until it holds f + s for the estimate made at that size.
    reg = std::min(f + 1, opt.m_total);
    for (int round = 0; round < 64; ++round) {
      const QpeCircuit probe(model, ansatz, reg);
      ek = estimate_then_k(probe, window, opt.t, rng);
      r.estimation_qpe_applications += ek->estimate.qpe_applications;
      const int need = f + stabilizer_qubits(ek->estimate.b, window.gamma(), f);
      if (need <= reg) break;
      require(need <= opt.m_total, "amplified register needs f + s = " + std::to_string(need) +
                                       " bits, more than m_total = " +
                                       std::to_string(opt.m_total));
      reg = need;
    }
  } else {
    require(reg >= f && reg <= opt.m_total,
            "register_bits must lie in [f, m_total] = [" + std::to_string(f) + ", " +
                std::to_string(opt.m_total) + "]");
    if (opt.k < 0) {
      require(opt.t >= 1, "t must be >= 1 when k is derived");
      const QpeCircuit probe(model, ansatz, reg);
      ek = estimate_then_k(probe, window, opt.t, rng);
      r.estimation_qpe_applications += ek->estimate.qpe_applications;
    }
  }
  if (ek) {
    r.estimate = ek->estimate;
    r.probabilities["b_estimate"] = ek->estimate.b;
  }
  const int k = opt.k >= 0 ? opt.k : ek->k;
  r.k = k;
  r.amplified_bits = reg;

  if (model.dim() <= 4096) {
    const auto cond = success_condition(model, ansatz, window, reg);
    r.condition_met = cond.first;
    r.probabilities["wanted_mass"] = cond.second.wanted;
    r.probabilities["unwanted_mass"] = cond.second.unwanted;
    if (!cond.first) r.message = "amplification not guaranteed at register size " +
                                 std::to_string(reg);
  }

  const QpeCircuit circuit(model, ansatz, reg);
  const GroverOperator grover(preparation_pair(circuit), circuit.layout(), window);
  const auto eq = circuit.layout().energy_qubits();
  const RegisterLayout ext{reg, circuit.state_bits(), 1};
  for (int pass = 0; pass < opt.passes; ++pass) {
    StateVector s = grover.prepare();
    grover.apply(s, k);
    r.attempts += 1;
    r.grover_iterations += static_cast<std::uint64_t>(k);
    r.qpe_applications += 2 * static_cast<std::uint64_t>(k) + 1;
    if (pass == 0) r.probabilities["window_mass"] = probability_of(s, eq, window.prefix());
    // The amplified readout collapses the state register; IQPE then derives
    // all m_total bits LSB-first, and its top `reg` bits are checked against
    // the amplified readout.
    const Measurement top = measure(s, eq, rng);
    StateVector sa = with_ancilla(s);
    std::string bits;
    for (int p = opt.m_total; p >= 1; --p) {
      const IqpeBit bit = run_iqpe_bit(model, sa, ext, p, bits, rng);
      bits.insert(bits.begin(), bit.bit ? '1' : '0');
      r.iqpe_rounds += 1;
    }
    for (int i = 0; i < reg; ++i) {
      r.overlap_checks += 1;
      if (bits[static_cast<std::size_t>(i)] == top.bits[static_cast<std::size_t>(i)]) {
        r.overlap_agreements += 1;
      }
    }
    Measurement full;
    full.bits = bits;
    full.value = bits_to_uint(full.bits);
    full.probability = top.probability;
    fill_readout(r, model, window, full, opt.m_total);
    if (r.in_acceptance) {
      r.success = true;
      break;
    }
  }
  r.retries = r.attempts - 1;
  if (!r.success && r.message.empty()) {
    r.message = "no assembled readout in the acceptance interval after " +
                std::to_string(r.attempts) + " passes";
  }
  return r;
}

/// Exponential search schedule: k uniform in [0, floor(l)), l grows by g after
/// every failure.
class QsearchSchedule {
 public:
  explicit QsearchSchedule(double growth = 8.0 / 7.0) : g_(growth) {
    require(growth > 1.0 && growth < 4.0 / 3.0, "growth factor must be in (1, 4/3)");
  }
  double growth() const { return g_; }
  double bound() const { return l_; }
  int draw(Rng& rng) const {
    const auto top = static_cast<std::uint64_t>(std::floor(l_));
    return static_cast<int>(uniform_below(rng, std::max<std::uint64_t>(top, 1)));
  }
  void fail() { l_ *= g_; }

  static double critical_stage(double b) {
    require(b > 0.0 && b < 1.0, "success probability must be in (0, 1)");
    return 1.0 / std::sin(2.0 * std::asin(std::sqrt(b)));
  }

 private:
  double g_;
  double l_ = 1.0;
};

/// Average of sin^2((2k + 1) theta) over k uniform in {0, ..., l - 1}.
inline double qsearch_average_success(double b, int l) {
  require(b > 0.0 && b < 1.0, "success probability must be in (0, 1)");
  require(l >= 1, "l must be >= 1");
  const double th = std::asin(std::sqrt(b));
  return 0.5 - std::sin(4.0 * l * th) / (4.0 * l * std::sin(2.0 * th));
}

struct RuntimeBounds {
  double repeat_qpe = 0.0;
  double qsearch = 0.0;
};

inline RuntimeBounds expected_runtime_bounds(double b) {
  require(b > 0.0 && b < 1.0, "success probability must be in (0, 1)");
  return {1.0 / b, 8.0 / std::sin(2.0 * std::asin(std::sqrt(b)))};
}

/// 100 * ceil(8 / sin(2 asin sqrt(2^-m))).
inline std::uint64_t default_qphilter_guard(int m) {
  const double b = std::ldexp(1.0, -m);
  return 100 * static_cast<std::uint64_t>(
                   std::ceil(8.0 / std::sin(2.0 * std::asin(std::sqrt(b))) - 1e-9));
}

struct QphilterOptions {
  int m = 0;
  std::uint64_t seed = 0;
  std::uint64_t max_total_iterations = 0;  // 0 selects default_qphilter_guard(m)
  double growth = 8.0 / 7.0;
};

/// Estimate-free sampling: randomized Grover powers on fresh states until a
/// readout lands in F.
inline RunReport qphilter(const SpectralModel& model, const AnsatzSpec& ansatz,
                          const EnergyWindow& window, const QphilterOptions& opt) {
  require(window.f() <= opt.m, "window prefix longer than the energy register");
  Rng rng(opt.seed);
  RunReport r;
  r.protocol = "qphilter";
  r.seed = opt.seed;
  r.m = opt.m;
  const std::uint64_t guard =
      opt.max_total_iterations > 0 ? opt.max_total_iterations : default_qphilter_guard(opt.m);

  const QpeCircuit circuit(model, ansatz, opt.m);
  const GroverOperator grover(preparation_pair(circuit), circuit.layout(), window);
  const auto eq = circuit.layout().energy_qubits();
  QsearchSchedule schedule(opt.growth);
  while (true) {
    const int k = schedule.draw(rng);
    r.l_values.push_back(schedule.bound());
    r.k_values.push_back(k);
    StateVector s = grover.prepare();
    grover.apply(s, k);
    r.k = k;
    r.attempts += 1;
    r.grover_iterations += static_cast<std::uint64_t>(k);
    r.qpe_applications += 2 * static_cast<std::uint64_t>(k) + 1;
    const Measurement meas = measure(s, eq, rng);
    fill_readout(r, model, window, meas, opt.m);
    if (r.in_window) {
      r.success = true;
      break;
    }
    if (r.grover_iterations >= guard) {
      r.message = "iteration guard of " + std::to_string(guard) +
                  " exceeded; the window may not satisfy the amplification condition";
      break;
    }
    schedule.fail();
  }
  r.retries = r.attempts - 1;
  return r;
}

/// Runs `fn(run_seed)` for `runs` independent seeds derived from `seed`.
/// Results are stored by index, so the output does not depend on scheduling.
inline std::vector<RunReport> run_batch(std::uint64_t seed, int runs,
                                        const std::function<RunReport(std::uint64_t)>& fn,
                                        unsigned threads = 0) {
  require(runs >= 0, "runs must be >= 0");
  std::vector<std::uint64_t> seeds(static_cast<std::size_t>(runs));
  for (int i = 0; i < runs; ++i) seeds[static_cast<std::size_t>(i)] = derive_rng(seed, i)();
  std::vector<RunReport> out(seeds.size());
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min<unsigned>(threads, static_cast<unsigned>(std::max(runs, 1)));
  std::vector<std::exception_ptr> errors(threads);
  auto worker = [&](unsigned w) {
    try {
      for (std::size_t i = w; i < seeds.size(); i += threads) out[i] = fn(seeds[i]);
    } catch (...) {
      errors[w] = std::current_exception();
    }
  };
  if (threads == 1) {
    worker(0);
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < threads; ++w) pool.emplace_back(worker, w);
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return out;
}

}  // namespace philter
