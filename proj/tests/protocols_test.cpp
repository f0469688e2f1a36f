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

#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <vector>

#include "philter/experiments.hpp"
#include "philter/protocols.hpp"
#include "test_util.hpp"

namespace philter {
namespace {

ExplicitAnsatz eigenstate(const SpectralModel& model, int j) {
  const Eigen::VectorXcd v = model.eigen().vectors.col(j);
  return {{v.data(), v.data() + v.size()}};
}

std::uint64_t total_qpe(const RunReport& r) { return r.qpe_applications + r.estimation_qpe_applications; }

void expect_report_invariants(const SpectralModel& model, const RunReport& r) {
  ASSERT_EQ(static_cast<int>(r.bits.size()), r.m);
  EXPECT_EQ(bits_to_uint(r.bits), r.value);
  // The decoded energy re-encodes to the measured bitstring.
  const double phi = model.phase_of(r.energy) * std::ldexp(1.0, r.m);
  EXPECT_NEAR(phi, static_cast<double>(r.value), 1e-6);
  EXPECT_EQ(r.retries, r.attempts - 1);
}

TEST(Philter, H2FindsExcitedState) {
  const auto model = h2::model();
  // At gamma = 1 the acceptance interval [0, 0.75) also holds the ground phase
  // 0.2956, so the excited-state hits are counted through the strict window.
  const EnergyWindow w("00");
  int excited = 0, valid = 0, close = 0;
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    PhilterOptions o;
    o.m = 12;
    o.t = 7;
    o.seed = seed;
    RunReport r;
    try {
      r = philter(model, h2::hartree_fock(), w, o);
    } catch (const InvalidArgument& e) {
      // A low estimate (y = 1) can demand more than 12 energy bits.
      EXPECT_NE(std::string(e.what()).find("energy register too small"), std::string::npos);
      continue;
    }
    ++valid;
    ASSERT_TRUE(r.success) << r.message;
    expect_report_invariants(model, r);
    EXPECT_EQ(r.qpe_applications, static_cast<std::uint64_t>(r.attempts) * (2 * r.k + 1));
    EXPECT_EQ(r.estimation_qpe_applications, (1u << 8) - 1);
    if (r.in_window) {
      ++excited;
      // Within two bins of the excited readout 37487 / 2^8 = 146.4.
      if (std::abs(static_cast<double>(r.value) - 37487.0 / 256.0) < 2.5) ++close;
    }
  }
  EXPECT_GE(valid, 25);
  EXPECT_GE(excited, static_cast<int>(0.7 * valid));
  EXPECT_GE(close, static_cast<int>(0.8 * excited));
}

TEST(Philter, InWindowEigenstateNeedsNoIterations) {
  const auto model = h2::model();
  PhilterOptions o;
  o.m = 8;
  o.t = 4;
  o.seed = 3;
  const RunReport r = philter(model, eigenstate(model, 1), EnergyWindow("00"), o);
  EXPECT_TRUE(r.success);
  EXPECT_EQ(r.k, 0);
  EXPECT_EQ(r.attempts, 1);
  EXPECT_EQ(r.qpe_applications, 1u);
}

TEST(Philter, QuarterOverlapSucceedsAfterOneIteration) {
  const auto model = h2::exact_phase_model(10);
  const auto a = h2::ansatz_with_excited_probability(0.25);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    PhilterOptions o;
    o.m = 10;
    o.t = 6;
    o.seed = seed;
    const RunReport r = philter(model, a, EnergyWindow("00"), o);
    ASSERT_TRUE(r.success);
    EXPECT_EQ(r.k, 1);
    EXPECT_EQ(r.attempts, 1);
    EXPECT_EQ(r.qpe_applications, 3u);
    EXPECT_EQ(total_qpe(r), 3u + 127u);
    EXPECT_EQ(r.value, 36u);
    EXPECT_NEAR(r.probabilities.at("window_mass"), 1.0, 1e-12);
  }
}

TEST(Philter, Preconditions) {
  PhilterOptions o;
  o.m = 2;
  o.t = 6;
  // b ~ 0.012 needs m >= 9 at gamma = 1.
  EXPECT_THROW(philter(h2::model(), h2::hartree_fock(), EnergyWindow("00"), o), InvalidArgument);
  o.m = 1;
  EXPECT_THROW(philter(h2::model(), h2::hartree_fock(), EnergyWindow("00"), o), InvalidArgument);
  o.m = 8;
  o.t = 0;
  EXPECT_THROW(philter(h2::model(), h2::hartree_fock(), EnergyWindow("00"), o), InvalidArgument);
  // No weight in the window: estimation reports b = 0.
  const auto exact = h2::exact_phase_model(10);
  o.m = 10;
  o.t = 4;
  EXPECT_THROW(philter(exact, eigenstate(exact, 0), EnergyWindow("00"), o), EstimationError);
}

// In-window rate after amplification with k = 7, measurement of the register
// and IQPE on the collapsed state, predicted from the closed-form masses.
double predicted_in_window(const SpectralModel& model, int reg, int m_total) {
  const auto hf = h2::hartree_fock();
  const auto d = success_condition(model, hf, EnergyWindow("00"), reg).second;
  const QpeOutputModel fine(model, hf, m_total);
  const double good = amplified_probability(d.b, 7);
  const double a_es = d.eigenstates[1].overlap;
  const double es = good * d.wanted / d.b + (1 - good) * (a_es - d.wanted) / (1 - d.b);
  return es * fine.prefix_mass(1, "00") + (1 - es) * fine.prefix_mass(0, "00");
}

TEST(IterativePhilter, RegisterSizeCrossover) {
  const auto model = h2::model();
  for (int reg = 2; reg <= 9; ++reg) {
    int hits = 0;
    const int runs = 60;
    for (int i = 0; i < runs; ++i) {
      IterativePhilterOptions o;
      o.m_total = 10;
      o.register_bits = reg;
      o.k = 7;
      o.seed = static_cast<std::uint64_t>(100 * reg + i);
      const RunReport r = iterative_philter(model, h2::hartree_fock(), EnergyWindow("00"), o);
      ASSERT_TRUE(r.condition_met.has_value());
      EXPECT_EQ(*r.condition_met, reg >= 6);
      if (reg <= 5) {
        EXPECT_NE(r.message.find("amplification not guaranteed"), std::string::npos);
      }
      EXPECT_EQ(r.amplified_bits, reg);
      EXPECT_EQ(r.iqpe_rounds, 10);
      EXPECT_EQ(r.overlap_checks, reg);
      expect_report_invariants(model, r);
      hits += r.in_window ? 1 : 0;
    }
    const double p = predicted_in_window(model, reg, 10);
    EXPECT_EQ(p > 0.5, reg >= 6) << "register " << reg;
    EXPECT_NEAR(static_cast<double>(hits) / runs, p, 4 * std::sqrt(p * (1 - p) / runs) + 0.02)
        << "register " << reg;
  }
}

TEST(IterativePhilter, ExactEigenstateReproducesQpeBits) {
  const auto model = h2::exact_phase_model(10);
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    IterativePhilterOptions o;
    o.m_total = 10;
    o.register_bits = 3;
    o.k = 0;
    o.seed = seed;
    const RunReport r = iterative_philter(model, eigenstate(model, 1), EnergyWindow("00"), o);
    EXPECT_TRUE(r.success);
    EXPECT_EQ(r.bits, "0000100100");
    EXPECT_EQ(r.overlap_checks, 3);
  }
}

TEST(IterativePhilter, DerivedRegisterMatchesStabilizerBound) {
  IterativePhilterOptions o;
  o.m_total = 12;
  o.t = 7;
  o.seed = 11;
  const RunReport r = iterative_philter(h2::model(), h2::hartree_fock(), EnergyWindow("00"), o);
  EXPECT_EQ(r.amplified_bits, 2 + stabilizer_qubits(0.0124, 1, 2));
  EXPECT_EQ(r.amplified_bits, 9);
  ASSERT_TRUE(r.condition_met.has_value());
  EXPECT_TRUE(*r.condition_met);
  EXPECT_TRUE(r.success);
}

TEST(IterativePhilter, Preconditions) {
  IterativePhilterOptions o;
  o.m_total = 6;
  o.register_bits = 8;
  o.k = 1;
  EXPECT_THROW(iterative_philter(h2::model(), h2::hartree_fock(), EnergyWindow("00"), o), InvalidArgument);
  o.register_bits = 0;
  o.t = 0;
  EXPECT_THROW(iterative_philter(h2::model(), h2::hartree_fock(), EnergyWindow("00"), o), InvalidArgument);
  o.t = 6;
  o.passes = 0;
  EXPECT_THROW(iterative_philter(h2::model(), h2::hartree_fock(), EnergyWindow("00"), o), InvalidArgument);
}

TEST(QsearchSchedule, GrowthAndDraws) {
  EXPECT_THROW(QsearchSchedule(1.0), InvalidArgument);
  EXPECT_THROW(QsearchSchedule(4.0 / 3.0), InvalidArgument);
  QsearchSchedule s;
  EXPECT_DOUBLE_EQ(s.growth(), 8.0 / 7.0);
  Rng rng(61);
  for (int i = 0; i < 20; ++i) EXPECT_EQ(s.draw(rng), 0);
  double prev = s.bound();
  for (int step = 0; step < 40; ++step) {
    s.fail();
    EXPECT_NEAR(s.bound(), prev * 8.0 / 7.0, 1e-12 * prev);
    prev = s.bound();
    for (int i = 0; i < 5; ++i) {
      const int k = s.draw(rng);
      EXPECT_GE(k, 0);
      EXPECT_LT(k, std::max(1, static_cast<int>(std::floor(s.bound()))));
    }
  }
  EXPECT_NEAR(QsearchSchedule::critical_stage(1e-5), 1.0 / std::sin(2 * std::asin(std::sqrt(1e-5))), 1e-9);
}

// Average success of sin^2((2k+1) theta) for k uniform in [0, l), checked on the
// circuit by Monte Carlo. The identity carries sin(2 theta) in the denominator.
TEST(QsearchSchedule, AverageSuccessIdentity) {
  Rng rng(62);
  for (double b : {0.05, 0.1}) {
    const double th = 2.0 * std::asin(std::sqrt(b));
    const int q0[] = {0};
    PreparationPair a{1,
                      [th, q0](std::span<cplx> s) { kernels::apply_matrix(s, 1, gates::ry(th).matrix(), q0); },
                      [th, q0](std::span<cplx> s) { kernels::apply_matrix(s, 1, gates::ry(-th).matrix(), q0); }};
    const RegisterLayout layout{1, 0, 0};
    const GroverOperator q(a, layout, EnergyWindow("1"));
    for (int l : {2, 4, 8}) {
      const int n = 20000;
      int hit = 0;
      for (int i = 0; i < n; ++i) {
        StateVector s = q.prepare();
        q.apply(s, static_cast<int>(uniform_below(rng, static_cast<std::uint64_t>(l))));
        hit += measure(s, layout.energy_qubits(), rng).value == 1 ? 1 : 0;
      }
      const double p = qsearch_average_success(b, l);
      const double sigma = std::sqrt(p * (1 - p) / n);
      EXPECT_NEAR(static_cast<double>(hit) / n, p, 3 * sigma) << "b=" << b << " l=" << l;
      double direct = 0.0;
      for (int k = 0; k < l; ++k) direct += amplified_probability(b, k);
      EXPECT_NEAR(direct / l, p, 1e-12);
    }
  }
}

TEST(RuntimeBounds, Values) {
  const auto r5 = expected_runtime_bounds(1e-5);
  EXPECT_NEAR(r5.repeat_qpe, 1e5, 1e-6);
  EXPECT_NEAR(r5.qsearch, 1265.0, 0.5);
  const auto rq = expected_runtime_bounds(0.25);
  EXPECT_DOUBLE_EQ(rq.repeat_qpe, 4.0);
  EXPECT_NEAR(rq.qsearch, 8.0 / std::sin(kPi / 3), 1e-12);
  EXPECT_NEAR(rq.qsearch, 9.24, 5e-3);
  const auto rh = expected_runtime_bounds(0.5 - 1e-9);
  EXPECT_NEAR(rh.qsearch, 8.0, 1e-6);
  EXPECT_NEAR(rh.repeat_qpe, 2.0, 1e-6);
  EXPECT_THROW(expected_runtime_bounds(0.0), InvalidArgument);
  EXPECT_THROW(expected_runtime_bounds(1.0), InvalidArgument);
  EXPECT_EQ(default_qphilter_guard(10), 100u * static_cast<std::uint64_t>(std::ceil(8.0 / std::sin(2 * std::asin(std::sqrt(1.0 / 1024))))));
}

TEST(Qphilter, CertainOverlapSucceedsInOneShot) {
  const auto model = h2::exact_phase_model(10);
  QphilterOptions o;
  o.m = 10;
  o.seed = 5;
  const RunReport r = qphilter(model, eigenstate(model, 1), EnergyWindow("00"), o);
  EXPECT_TRUE(r.success);
  EXPECT_EQ(r.attempts, 1);
  EXPECT_EQ(r.k, 0);
  EXPECT_EQ(r.qpe_applications, 1u);
  ASSERT_EQ(r.l_values.size(), 1u);
  EXPECT_DOUBLE_EQ(r.l_values[0], 1.0);
}

TEST(Qphilter, GuardStopsHopelessSearch) {
  const auto model = h2::exact_phase_model(10);
  QphilterOptions o;
  o.m = 10;
  o.seed = 6;
  o.max_total_iterations = 50;
  const RunReport r = qphilter(model, eigenstate(model, 0), EnergyWindow("00"), o);
  EXPECT_FALSE(r.success);
  EXPECT_GE(r.grover_iterations, 50u);
  EXPECT_NE(r.message.find("guard"), std::string::npos);
}

TEST(Qphilter, MeanIterationsWithinBound) {
  const auto model = h2::exact_phase_model(10);
  for (double b : {1e-3, 1e-4}) {
    const auto a = h2::ansatz_with_excited_probability(b);
    const auto reports = run_batch(70, 500, [&](std::uint64_t seed) {
      QphilterOptions o;
      o.m = 10;
      o.seed = seed;
      return qphilter(model, a, EnergyWindow("00"), o);
    });
    double mean = 0.0;
    for (const auto& r : reports) {
      ASSERT_TRUE(r.success);
      EXPECT_TRUE(r.in_window);
      EXPECT_EQ(r.l_values.size(), static_cast<std::size_t>(r.attempts));
      mean += static_cast<double>(r.grover_iterations);
    }
    mean /= static_cast<double>(reports.size());
    EXPECT_LE(mean, 1.15 * 8.0 * QsearchSchedule::critical_stage(b)) << "b=" << b;
  }
}

TEST(Qphilter, LargeOverlapMatchesRepeatQpe) {
  const auto model = h2::exact_phase_model(10);
  const auto a = h2::ansatz_with_excited_probability(0.2);
  const auto reports = run_batch(71, 400, [&](std::uint64_t seed) {
    QphilterOptions o;
    o.m = 10;
    o.seed = seed;
    return qphilter(model, a, EnergyWindow("00"), o);
  });
  double mean = 0.0;
  for (const auto& r : reports) mean += static_cast<double>(r.qpe_applications);
  mean /= static_cast<double>(reports.size());
  const auto bounds = expected_runtime_bounds(0.2);
  EXPECT_LT(mean, bounds.qsearch);
  EXPECT_GT(mean, 0.5 * bounds.repeat_qpe);
  EXPECT_LT(mean, 3.0 * bounds.repeat_qpe);
}

// Reported QPE applications agree with the counter inside QpeCircuit.
TEST(RuntimeAccounting, ReportsMatchCallCounter) {
  const auto model = h2::model();
  const auto exact = h2::exact_phase_model(10);
  const EnergyWindow w("00");
  reset_qpe_call_count();
  PhilterOptions po;
  po.m = 10;
  po.t = 5;
  po.seed = 1;
  const RunReport p = philter(model, h2::hartree_fock(), w, po);
  EXPECT_EQ(qpe_call_count(), total_qpe(p));

  reset_qpe_call_count();
  IterativePhilterOptions io;
  io.m_total = 12;
  io.t = 6;
  io.passes = 3;
  io.seed = 2;
  const RunReport it = iterative_philter(model, h2::hartree_fock(), w, io);
  EXPECT_EQ(qpe_call_count(), total_qpe(it));

  reset_qpe_call_count();
  QphilterOptions qo;
  qo.m = 10;
  qo.seed = 3;
  const RunReport q = qphilter(exact, h2::ansatz_with_excited_probability(1e-3), w, qo);
  EXPECT_EQ(qpe_call_count(), q.qpe_applications);
  std::uint64_t sum = 0;
  for (int k : q.k_values) sum += 2 * static_cast<std::uint64_t>(k) + 1;
  EXPECT_EQ(q.qpe_applications, sum);
}

// With k = 0 PHILTER is plain QPE: readouts follow the QPE output distribution
// conditioned on the acceptance interval (rejected readouts are retried). The
// estimate occasionally lands on k > 0 (or b = 0); only k = 0 runs are compared.
TEST(Philter, ZeroIterationsReproducesQpeDistribution) {
  const auto model = h2::model();
  const auto a = eigenstate(model, 1);
  const int m = 6;
  auto exact = QpeOutputModel(model, a, m).distribution();
  const EnergyWindow window("00");
  double kept = 0.0;
  for (std::size_t y = 0; y < exact.size(); ++y) {
    if (!window.accepts(y, m)) exact[y] = 0.0;
    kept += exact[y];
  }
  for (auto& p : exact) p /= kept;
  const auto reports = run_batch(80, 10000, [&](std::uint64_t seed) {
    PhilterOptions o;
    o.m = m;
    o.t = 5;
    o.seed = seed;
    try {
      return philter(model, a, EnergyWindow("00"), o);
    } catch (const std::exception&) {
      // b = 0 or a low estimate that asks for more than m energy bits.
      RunReport r;
      r.k = -1;
      return r;
    }
  });
  std::vector<double> hist(exact.size(), 0.0);
  int used = 0;
  for (const auto& r : reports) {
    if (r.k != 0) continue;
    hist[r.value] += 1.0;
    ++used;
  }
  ASSERT_GE(used, 9000);
  double tv = 0.0;
  for (std::size_t y = 0; y < hist.size(); ++y) tv += 0.5 * std::abs(hist[y] / used - exact[y]);
  EXPECT_LT(tv, 0.02);
}

TEST(RunBatch, DeterministicAcrossThreadCounts) {
  const auto model = h2::exact_phase_model(10);
  const auto a = h2::ansatz_with_excited_probability(0.01);
  auto fn = [&](std::uint64_t seed) {
    QphilterOptions o;
    o.m = 10;
    o.seed = seed;
    return qphilter(model, a, EnergyWindow("00"), o);
  };
  const auto one = run_batch(90, 24, fn, 1);
  const auto four = run_batch(90, 24, fn, 4);
  ASSERT_EQ(one.size(), four.size());
  for (std::size_t i = 0; i < one.size(); ++i) {
    EXPECT_EQ(one[i].seed, four[i].seed);
    EXPECT_EQ(one[i].bits, four[i].bits);
    EXPECT_EQ(one[i].k_values, four[i].k_values);
    EXPECT_EQ(one[i].qpe_applications, four[i].qpe_applications);
  }
  EXPECT_EQ(one[0].seed, derive_rng(90, 0)());
  EXPECT_THROW(run_batch(1, 2, [](std::uint64_t) -> RunReport { throw InvalidArgument("boom"); }, 2),
               InvalidArgument);
}

}  // namespace
}  // namespace philter
