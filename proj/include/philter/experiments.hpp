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
#include <cstdio>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "philter/amplify.hpp"
#include "philter/common.hpp"
#include "philter/protocols.hpp"
#include "philter/qpe.hpp"
#include "philter/spectral.hpp"

namespace philter {

using Cell = std::variant<std::int64_t, double, std::string>;

inline std::string format_cell(const Cell& c) {
  if (const auto* i = std::get_if<std::int64_t>(&c)) return std::to_string(*i);
  if (const auto* d = std::get_if<double>(&c)) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.10g", *d);
    return buf;
  }
  return std::get<std::string>(c);
}

/// Rows of computed values with named columns and provenance metadata.
struct FigureDataset {
  std::string tag;
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;
  std::vector<std::pair<std::string, std::string>> metadata;

  std::size_t column(const std::string& name) const {
    const auto it = std::find(columns.begin(), columns.end(), name);
    require(it != columns.end(), "dataset " + tag + " has no column " + name);
    return static_cast<std::size_t>(it - columns.begin());
  }

  double number(std::size_t row, const std::string& name) const {
    const Cell& c = rows.at(row).at(column(name));
    if (const auto* i = std::get_if<std::int64_t>(&c)) return static_cast<double>(*i);
    if (const auto* d = std::get_if<double>(&c)) return *d;
    throw InvalidArgument("column " + name + " is not numeric");
  }

  std::string text(std::size_t row, const std::string& name) const {
    return format_cell(rows.at(row).at(column(name)));
  }

  void add_row(std::vector<Cell> row) {
    require(row.size() == columns.size(), "row has " + std::to_string(row.size()) +
                                              " cells, dataset " + tag + " has " +
                                              std::to_string(columns.size()) + " columns");
    rows.push_back(std::move(row));
  }

  /// CSV preceded by "# key: value" provenance lines.
  std::string to_csv() const {
    std::string out = "# dataset: " + tag + "\n";
    for (const auto& [k, v] : metadata) out += "# " + k + ": " + v + "\n";
    for (std::size_t i = 0; i < columns.size(); ++i) out += (i ? "," : "") + columns[i];
    out += "\n";
    for (const auto& row : rows) {
      for (std::size_t i = 0; i < row.size(); ++i) out += (i ? "," : "") + format_cell(row[i]);
      out += "\n";
    }
    return out;
  }
};

namespace h2 {

/// H2 eigenvectors with eigenphases truncated to exactly m bits; QPE at m bits
/// resolves both eigenstates with no leakage.
inline SpectralModel exact_phase_model(int m = 10) {
  require(m >= 1 && m <= kReadoutBits, "m must be in [1, 20]");
  const auto v = eigenvectors();
  const double big = std::ldexp(1.0, m);
  const double yg = static_cast<double>(kGroundReadout >> (kReadoutBits - m));
  const double ye = static_cast<double>(kExcitedReadout >> (kReadoutBits - m));
  Eigen::Vector2cd e(-kTwoPi * yg / big, -kTwoPi * ye / big);
  Eigen::MatrixXcd h = v * e.asDiagonal() * v.adjoint();
  h = 0.5 * (h + h.adjoint()).eval();
  return SpectralModel(h);
}

/// Ry ansatz with |<E_es|psi>|^2 = p.
inline AnsatzSpec ansatz_with_excited_probability(double p) {
  return RyAnsatz{ry_angle_for_excited_probability(p)};
}

}  // namespace h2

struct Fig4Options {
  int m = 20;      // energy register for A, B, C
  int k_max = 56;  // A, B, C
  int m_min = 2;   // D, E
  int m_max = 0;   // D, E; 0 selects 10 for D and 12 for E
  int register_min = 2;  // F
  int register_max = 10;
  int f_k = 7;
  int f_runs = 50;
  std::uint64_t seed = 1;
};

namespace detail {

inline FigureDataset amplification_curve(const std::string& tag, const AnsatzSpec& ansatz,
                                         const std::string& ansatz_label, const Fig4Options& o) {
  const auto model = h2::model();
  const EnergyWindow window("00");
  const QpeCircuit circuit(model, ansatz, o.m);
  const GroverOperator grover(preparation_pair(circuit), circuit.layout(), window);
  const auto eq = circuit.layout().energy_qubits();
  const std::string gs_bits = uint_to_bits(h2::kGroundReadout >> (h2::kReadoutBits - o.m), o.m);
  const std::string es_bits = uint_to_bits(h2::kExcitedReadout >> (h2::kReadoutBits - o.m), o.m);
  const double b = success_condition(model, ansatz, window, o.m).second.b;

  FigureDataset ds;
  ds.tag = tag;
  ds.columns = {"k", "p_excited", "p_ground", "p_window", "p_predicted"};
  ds.metadata = {{"model", "h2"}, {"ansatz", ansatz_label}, {"window", "00"},
                 {"m", std::to_string(o.m)}, {"b", format_cell(b)}};
  StateVector s = grover.prepare();
  for (int k = 0; k <= o.k_max; ++k) {
    if (k > 0) grover.apply(s);
    ds.add_row({std::int64_t{k}, probability_of(s, eq, es_bits), probability_of(s, eq, gs_bits),
                probability_of(s, eq, "00"), amplified_probability(b, k)});
  }
  return ds;
}

}  // namespace detail

/// H2 data behind the PHILTER figure panels:
///   A, B, C  readout probabilities vs k for the HF, b = 1/4 and b = 1/2 ansatzes
///   D        |eps_x|^2 for both eigenstates, m = 2..10
///   E        prefix-00 mass per eigenstate and the amplification condition vs m
///   F        iterative PHILTER at fixed k vs amplified register size
inline FigureDataset fig4_sweep(char kind, const Fig4Options& o = {}) {
  const auto model = h2::model();
  const EnergyWindow window("00");
  switch (kind) {
    case 'A':
      return detail::amplification_curve("fig4A", h2::hartree_fock(), "hf", o);
    case 'B':
      return detail::amplification_curve("fig4B", h2::ansatz_with_excited_probability(0.25),
                                         "ry:" + format_cell(h2::ry_angle_for_excited_probability(0.25)), o);
    case 'C':
      return detail::amplification_curve("fig4C", h2::ansatz_with_excited_probability(0.5),
                                         "ry:" + format_cell(h2::ry_angle_for_excited_probability(0.5)), o);
    case 'D': {
      FigureDataset ds;
      ds.tag = "fig4D";
      ds.columns = {"m", "eigenstate", "x", "bits", "eps2"};
      ds.metadata = {{"model", "h2"}, {"ansatz", "hf"}};
      const int hi = o.m_max > 0 ? o.m_max : 10;
      for (int m = o.m_min; m <= hi; ++m) {
        const QpeOutputModel out(model, h2::hartree_fock(), m);
        for (std::size_t j = 0; j < 2; ++j) {
          for (std::uint64_t x = 0; x < (std::uint64_t{1} << m); ++x) {
            ds.add_row({std::int64_t{m}, std::string(j == 0 ? "ground" : "excited"),
                        static_cast<std::int64_t>(x), uint_to_bits(x, m), out.epsilon2(j, x)});
          }
        }
      }
      return ds;
    }
    case 'E': {
      FigureDataset ds;
      ds.tag = "fig4E";
      ds.columns = {"m", "ground_mass", "excited_mass", "condition"};
      ds.metadata = {{"model", "h2"}, {"ansatz", "hf"}, {"window", "00"}};
      const int hi = o.m_max > 0 ? o.m_max : 12;
      for (int m = o.m_min; m <= hi; ++m) {
        const auto [ok, d] = success_condition(model, h2::hartree_fock(), window, m);
        ds.add_row({std::int64_t{m}, d.eigenstates[0].weighted_mass,
                    d.eigenstates[1].weighted_mass, std::int64_t{ok ? 1 : 0}});
      }
      return ds;
    }
    case 'F': {
      FigureDataset ds;
      ds.tag = "fig4F";
      ds.columns = {"register_bits", "k",         "window_mass", "condition",
                    "runs",          "in_window", "excited_readout"};
      ds.metadata = {{"model", "h2"},
                     {"ansatz", "hf"},
                     {"window", "00"},
                     {"m_total", std::to_string(h2::kReadoutBits)},
                     {"seed", std::to_string(o.seed)}};
      const std::string es_bits = h2::kExcitedBits;
      for (int reg = o.register_min; reg <= o.register_max; ++reg) {
        const QpeCircuit circuit(model, h2::hartree_fock(), reg);
        const GroverOperator grover(preparation_pair(circuit), circuit.layout(), window);
        StateVector s = grover.prepare();
        grover.apply(s, o.f_k);
        const double mass = probability_of(s, circuit.layout().energy_qubits(), "00");
        const bool cond = success_condition(model, h2::hartree_fock(), window, reg).first;
        IterativePhilterOptions io;
        io.m_total = h2::kReadoutBits;
        io.register_bits = reg;
        io.k = o.f_k;
        io.passes = 1;
        const auto reports = run_batch(o.seed + static_cast<std::uint64_t>(reg), o.f_runs,
                                       [&](std::uint64_t seed) {
                                         auto opt = io;
                                         opt.seed = seed;
                                         return iterative_philter(model, h2::hartree_fock(),
                                                                  window, opt);
                                       });
        std::int64_t inside = 0, excited = 0;
        for (const auto& r : reports) {
          inside += r.in_window ? 1 : 0;
          excited += r.bits == es_bits ? 1 : 0;
        }
        ds.add_row({std::int64_t{reg}, std::int64_t{o.f_k}, mass, std::int64_t{cond ? 1 : 0},
                    std::int64_t{o.f_runs}, static_cast<double>(inside) / o.f_runs,
                    static_cast<double>(excited) / o.f_runs});
      }
      return ds;
    }
    default:
      throw InvalidArgument(std::string("unknown figure panel '") + kind + "'; use A-F");
  }
}

/// Per-m ground and excited rows for the H2 HF ansatz and window 00: delta, the
/// prefix mass of |eps_x|^2 and its overlap-weighted value, plus the verdict.
inline FigureDataset appendix_tables(int m_min = 2, int m_max = 12) {
  const auto model = h2::model();
  const EnergyWindow window("00");
  FigureDataset ds;
  ds.tag = "appendix_tables";
  ds.columns = {"m",         "ground_delta",  "ground_eps2",  "ground_mass",
                "excited_delta", "excited_eps2", "excited_mass", "condition"};
  ds.metadata = {{"model", "h2"}, {"ansatz", "hf"}, {"window", "00"}};
  for (int m = m_min; m <= m_max; ++m) {
    const auto [ok, d] = success_condition(model, h2::hartree_fock(), window, m);
    const auto& g = d.eigenstates[0];
    const auto& e = d.eigenstates[1];
    ds.add_row({std::int64_t{m}, g.delta, g.prefix_mass, g.weighted_mass, e.delta, e.prefix_mass,
                e.weighted_mass, std::int64_t{ok ? 1 : 0}});
  }
  return ds;
}

/// QPHILTER runtime samples on the exact-phase two-level model, one row per run.
inline FigureDataset fig5_runtime_study(const std::vector<double>& overlaps, int runs,
                                        std::uint64_t seed, int m = 10) {
  require(runs >= 100, "runtime study needs at least 100 runs per overlap");
  const auto model = h2::exact_phase_model(m);
  const EnergyWindow window("00");
  FigureDataset ds;
  ds.tag = "fig5";
  ds.columns = {"b",          "run",      "seed",           "qpe_applications",
                "grover_iterations", "attempts", "success", "repeat_qpe_ref", "qsearch_ref"};
  ds.metadata = {{"model", "h2_exact_phase"}, {"window", "00"}, {"m", std::to_string(m)},
                 {"runs", std::to_string(runs)}, {"seed", std::to_string(seed)}};
  for (std::size_t bi = 0; bi < overlaps.size(); ++bi) {
    const double b = overlaps[bi];
    require(b > 0.0 && b < 1.0, "overlap must be in (0, 1)");
    const auto ansatz = h2::ansatz_with_excited_probability(b);
    QphilterOptions qo;
    qo.m = m;
    const auto reports = run_batch(derive_rng(seed, bi)(), runs, [&](std::uint64_t s) {
      auto opt = qo;
      opt.seed = s;
      return qphilter(model, ansatz, window, opt);
    });
    for (std::size_t i = 0; i < reports.size(); ++i) {
      const auto& r = reports[i];
      ds.add_row({b, static_cast<std::int64_t>(i), std::to_string(r.seed),
                  static_cast<std::int64_t>(r.qpe_applications),
                  static_cast<std::int64_t>(r.grover_iterations),
                  static_cast<std::int64_t>(r.attempts), std::int64_t{r.success ? 1 : 0}, 1.0 / b,
                  4.0 / std::sqrt(b)});
    }
  }
  return ds;
}

struct RuntimeSummary {
  double b = 0.0;
  double mean = 0.0;
  double median = 0.0;
  double mean_iterations = 0.0;
  double repeat_qpe = 0.0;
  double qsearch_bound = 0.0;
};

inline std::vector<RuntimeSummary> summarize_runtime(const FigureDataset& ds) {
  std::map<double, std::vector<std::pair<double, double>>> by_b;
  for (std::size_t i = 0; i < ds.rows.size(); ++i) {
    by_b[ds.number(i, "b")].push_back(
        {ds.number(i, "qpe_applications"), ds.number(i, "grover_iterations")});
  }
  std::vector<RuntimeSummary> out;
  for (auto& [b, v] : by_b) {
    RuntimeSummary s;
    s.b = b;
    std::vector<double> q;
    double it = 0.0;
    for (const auto& [a, g] : v) {
      q.push_back(a);
      it += g;
    }
    s.mean = std::accumulate(q.begin(), q.end(), 0.0) / static_cast<double>(q.size());
    s.mean_iterations = it / static_cast<double>(v.size());
    std::sort(q.begin(), q.end());
    const std::size_t n = q.size();
    s.median = n % 2 ? q[n / 2] : 0.5 * (q[n / 2 - 1] + q[n / 2]);
    const auto bounds = expected_runtime_bounds(b);
    s.repeat_qpe = bounds.repeat_qpe;
    s.qsearch_bound = bounds.qsearch;
    out.push_back(s);
  }
  return out;
}

struct OverlapEntry {
  std::string label;
  double prob = 0.0;
};

struct WindowAssignment {
  std::string prefix;
  std::vector<std::string> labels;
};

struct OverlapSpec {
  std::vector<OverlapEntry> overlaps;
  std::vector<WindowAssignment> windows;
};

struct WindowPlan {
  std::string prefix;
  std::vector<std::string> labels;
  double b = 0.0;
  std::optional<int> k;  // empty when the window holds no overlap
};

/// k per window from eigenstate overlaps: b = sum of the assigned |a_j|^2.
inline std::vector<WindowPlan> plan_k_from_overlaps(const OverlapSpec& spec) {
  std::map<std::string, double> prob;
  double total = 0.0;
  for (const auto& e : spec.overlaps) {
    require(!e.label.empty(), "overlap entry with empty label");
    require(e.prob >= 0.0 && e.prob <= 1.0 + 1e-12,
            "overlap for " + e.label + " must be in [0, 1]");
    require(prob.emplace(e.label, e.prob).second, "duplicate overlap label " + e.label);
    total += e.prob;
  }
  require(total <= 1.0 + 1e-6, "overlaps sum to " + format_cell(total) + ", more than 1");
  std::vector<WindowPlan> out;
  for (const auto& w : spec.windows) {
    require(!w.prefix.empty() && is_bitstring(w.prefix),
            "window prefix must be a non-empty bitstring: '" + w.prefix + "'");
    WindowPlan p;
    p.prefix = w.prefix;
    p.labels = w.labels;
    std::set<std::string> seen;
    for (const auto& l : w.labels) {
      const auto it = prob.find(l);
      require(it != prob.end(), "window " + w.prefix + " references unknown label " + l);
      require(seen.insert(l).second, "window " + w.prefix + " lists " + l + " twice");
      p.b += it->second;
    }
    p.b = std::min(p.b, 1.0);
    if (p.b > 0.0) p.k = optimal_iterations(p.b);
    out.push_back(std::move(p));
  }
  return out;
}

}  // namespace philter
