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

// philter: command-line front end for the interval-filtered eigenvalue samplers.
//
// Exit codes: 0 success, 1 usage or input error, 2 protocol failure.

#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "philter/io.hpp"
#include "philter/philter.hpp"

namespace {

using philter::io::json;

struct Config {
  std::string hamiltonian;
  std::string ansatz = "hf";
  std::string window;
  int m = 0;
  int t = 0;
  double gamma = 1.0;
  std::optional<std::uint64_t> seed;
  int runs = 1;
  std::string out;
  std::string format = "json";
  int max_retries = 16;
  int passes = 1;
  int register_bits = 0;
  int k = -1;
  std::uint64_t max_iterations = 0;
  char kind = 'A';
  int k_max = 56;
  std::vector<double> overlaps{1e-5, 1e-4, 1e-3, 1e-2, 0.2};
  std::string overlap_file;
  double emin = 0.0;
  double emax = 0.0;
  bool quoted = false;
};

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

philter::SpectralModel load_model(const Config& c) {
  if (c.hamiltonian.empty()) return philter::h2::model();
  return philter::io::load_hamiltonian(c.hamiltonian);
}

philter::EnergyWindow window_of(const Config& c) {
  if (c.window.empty()) throw UsageError("--window is required");
  if (!philter::is_bitstring(c.window)) {
    throw UsageError("--window must be a string of 0 and 1, got '" + c.window + "'");
  }
  if (c.m < static_cast<int>(c.window.size())) {
    throw UsageError("--m (" + std::to_string(c.m) + ") must be at least the window length (" +
                     std::to_string(c.window.size()) + ")");
  }
  return philter::EnergyWindow(c.window, c.gamma);
}

std::uint64_t seed_of(const Config& c) {
  if (!c.seed) throw UsageError("--seed is required for sampling subcommands");
  return *c.seed;
}

void require_m(const Config& c) {
  if (c.m < 1) throw UsageError("--m must be >= 1");
}

void emit(const Config& c, const std::string& text) {
  if (c.out.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream f(c.out);
  if (!f) throw philter::io::FormatError("cannot write " + c.out);
  f << text;
}

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string o = "\"";
  for (char ch : s) o += ch == '"' ? std::string("\"\"") : std::string(1, ch);
  return o + "\"";
}

std::string reports_csv(const std::vector<philter::RunReport>& reports) {
  std::ostringstream o;
  o << "protocol,run,seed,success,bits,energy,in_window,in_acceptance,k,grover_iterations,"
       "qpe_applications,estimation_qpe_applications,attempts,message\n";
  for (std::size_t i = 0; i < reports.size(); ++i) {
    const auto& r = reports[i];
    o << r.protocol << ',' << i << ',' << r.seed << ',' << (r.success ? 1 : 0) << ',' << r.bits
      << ',' << philter::format_cell(r.energy) << ',' << (r.in_window ? 1 : 0) << ','
      << (r.in_acceptance ? 1 : 0) << ',' << r.k << ',' << r.grover_iterations << ','
      << r.qpe_applications << ',' << r.estimation_qpe_applications << ',' << r.attempts << ','
      << csv_escape(r.message) << '\n';
  }
  return o.str();
}

int emit_reports(const Config& c, const std::vector<philter::RunReport>& reports) {
  bool all = true;
  for (const auto& r : reports) all = all && r.success;
  if (c.format == "csv") {
    emit(c, reports_csv(reports));
  } else if (reports.size() == 1) {
    emit(c, philter::io::report_to_json(reports.front()).dump(2) + "\n");
  } else {
    json runs = json::array();
    double mean_q = 0.0;
    std::size_t ok = 0;
    for (const auto& r : reports) {
      runs.push_back(philter::io::report_to_json(r));
      mean_q += static_cast<double>(r.qpe_applications);
      ok += r.success ? 1 : 0;
    }
    mean_q /= static_cast<double>(reports.size());
    json j = {{"schema", philter::io::kReportSchema},
              {"runs", runs},
              {"summary",
               {{"runs", reports.size()}, {"successes", ok}, {"mean_qpe_applications", mean_q}}}};
    emit(c, j.dump(2) + "\n");
  }
  return all ? 0 : 2;
}

int emit_dataset(const Config& c, const philter::FigureDataset& ds) {
  if (c.format == "csv") {
    emit(c, ds.to_csv());
  } else {
    emit(c, philter::io::dataset_to_json(ds).dump(2) + "\n");
  }
  return 0;
}

std::vector<philter::RunReport> batch(const Config& c,
                                      const std::function<philter::RunReport(std::uint64_t)>& fn) {
  const std::uint64_t seed = seed_of(c);
  if (c.runs < 1) throw UsageError("--runs must be >= 1");
  if (c.runs == 1) return {fn(seed)};
  return philter::run_batch(seed, c.runs, fn);
}

int cmd_qpe(const Config& c) {
  require_m(c);
  const auto model = load_model(c);
  const auto ansatz = philter::io::parse_ansatz_argument(c.ansatz);
  const auto state = philter::run_qpe(model, ansatz, c.m);
  const auto eq = philter::qubit_range(0, c.m);
  const auto dist = philter::marginal_distribution(state, eq);
  std::map<std::uint64_t, std::uint64_t> counts;
  if (c.seed) {
    philter::Rng rng(*c.seed);
    for (int i = 0; i < c.runs; ++i) counts[philter::sample_index(dist, rng)] += 1;
  }
  // Outcomes listed: every sampled one plus those above 1e-6.
  std::vector<std::uint64_t> shown;
  for (std::uint64_t y = 0; y < dist.size(); ++y) {
    if (dist[y] > 1e-6 || counts.count(y)) shown.push_back(y);
  }
  if (c.format == "csv") {
    std::ostringstream o;
    o << "bits,energy,probability,count\n";
    for (auto y : shown) {
      o << philter::uint_to_bits(y, c.m) << ',' << philter::format_cell(model.decode(y, c.m))
        << ',' << philter::format_cell(dist[y]) << ',' << (counts.count(y) ? counts[y] : 0)
        << '\n';
    }
    emit(c, o.str());
  } else {
    json outcomes = json::array();
    for (auto y : shown) {
      outcomes.push_back({{"bits", philter::uint_to_bits(y, c.m)},
                          {"energy", model.decode(y, c.m)},
                          {"probability", dist[y]},
                          {"count", counts.count(y) ? counts[y] : 0}});
    }
    json j = {{"schema", "philter.qpe/1"}, {"m", c.m}, {"outcomes", outcomes}};
    if (c.seed) {
      j["seed"] = *c.seed;
      j["samples"] = c.runs;
    }
    emit(c, j.dump(2) + "\n");
  }
  return 0;
}

int cmd_philter(const Config& c) {
  require_m(c);
  if (c.t < 1) throw UsageError("--t must be >= 1");
  const auto model = load_model(c);
  const auto ansatz = philter::io::parse_ansatz_argument(c.ansatz);
  const auto window = window_of(c);
  return emit_reports(c, batch(c, [&](std::uint64_t s) {
                        philter::PhilterOptions o;
                        o.m = c.m;
                        o.t = c.t;
                        o.max_retries = c.max_retries;
                        o.seed = s;
                        return philter::philter(model, ansatz, window, o);
                      }));
}

int cmd_iphilter(const Config& c) {
  require_m(c);
  if (c.t < 1 && (c.register_bits == 0 || c.k < 0)) {
    throw UsageError("--t is required unless both --register-bits and --k are given");
  }
  const auto model = load_model(c);
  const auto ansatz = philter::io::parse_ansatz_argument(c.ansatz);
  const auto window = window_of(c);
  return emit_reports(c, batch(c, [&](std::uint64_t s) {
                        philter::IterativePhilterOptions o;
                        o.m_total = c.m;
                        o.t = c.t;
                        o.passes = c.passes;
                        o.register_bits = c.register_bits;
                        o.k = c.k;
                        o.seed = s;
                        return philter::iterative_philter(model, ansatz, window, o);
                      }));
}

int cmd_qphilter(const Config& c) {
  require_m(c);
  const auto model = load_model(c);
  const auto ansatz = philter::io::parse_ansatz_argument(c.ansatz);
  const auto window = window_of(c);
  return emit_reports(c, batch(c, [&](std::uint64_t s) {
                        philter::QphilterOptions o;
                        o.m = c.m;
                        o.seed = s;
                        o.max_total_iterations = c.max_iterations;
                        return philter::qphilter(model, ansatz, window, o);
                      }));
}

int cmd_qae(const Config& c) {
  require_m(c);
  if (c.t < 1) throw UsageError("--t must be >= 1");
  const auto model = load_model(c);
  const auto ansatz = philter::io::parse_ansatz_argument(c.ansatz);
  const auto window = window_of(c);
  const double exact = philter::success_condition(model, ansatz, window, c.m).second.b;
  const philter::QpeCircuit circuit(model, ansatz, c.m);
  const philter::GroverOperator grover(philter::preparation_pair(circuit), circuit.layout(),
                                       window);
  const auto dist = philter::qae_distribution(grover, c.t);
  const std::uint64_t seed = seed_of(c);
  if (c.runs < 1) throw UsageError("--runs must be >= 1");
  std::vector<philter::AmplitudeEstimate> est;
  for (int i = 0; i < c.runs; ++i) {
    philter::Rng rng = c.runs == 1 ? philter::Rng(seed) : philter::derive_rng(seed, i);
    philter::AmplitudeEstimate e;
    e.t = c.t;
    e.y = philter::sample_index(dist, rng);
    e.theta = philter::kPi * std::ldexp(static_cast<double>(e.y), -c.t);
    e.b = philter::qae_estimate_from_readout(e.y, c.t);
    e.bound = philter::qae_error_bound(e.b, c.t, 1);
    e.qpe_applications = (std::uint64_t{2} << c.t) - 1;
    est.push_back(e);
  }
  if (c.format == "csv") {
    std::ostringstream o;
    o << "run,y,b_estimate,bound,b_exact\n";
    for (std::size_t i = 0; i < est.size(); ++i) {
      o << i << ',' << est[i].y << ',' << philter::format_cell(est[i].b) << ','
        << philter::format_cell(est[i].bound) << ',' << philter::format_cell(exact) << '\n';
    }
    emit(c, o.str());
  } else {
    json runs = json::array();
    for (const auto& e : est) runs.push_back(philter::io::estimate_to_json(e));
    json j = {{"schema", "philter.qae/1"}, {"seed", seed},   {"m", c.m},
              {"t", c.t},                  {"b_exact", exact}, {"estimates", runs}};
    emit(c, j.dump(2) + "\n");
  }
  return 0;
}

int cmd_tables(const Config& c) { return emit_dataset(c, philter::appendix_tables()); }

int cmd_fig4(const Config& c) {
  philter::Fig4Options o;
  if (c.m > 0) o.m = c.m;
  o.k_max = c.k_max;
  if (c.seed) o.seed = *c.seed;
  if (c.runs > 1) o.f_runs = c.runs;
  if (c.kind == 'F' && !c.seed) throw UsageError("--seed is required for --kind F");
  return emit_dataset(c, philter::fig4_sweep(c.kind, o));
}

int cmd_fig5(const Config& c) {
  const int runs = c.runs > 1 ? c.runs : 1000;
  const int m = c.m > 0 ? c.m : 10;
  const auto ds = philter::fig5_runtime_study(c.overlaps, runs, seed_of(c), m);
  if (c.format == "json") {
    json j = philter::io::dataset_to_json(ds);
    json summary = json::array();
    for (const auto& s : philter::summarize_runtime(ds)) {
      summary.push_back({{"b", s.b},
                         {"mean_qpe_applications", s.mean},
                         {"median_qpe_applications", s.median},
                         {"mean_grover_iterations", s.mean_iterations},
                         {"repeat_qpe", s.repeat_qpe},
                         {"qsearch_bound", s.qsearch_bound}});
    }
    j["summary"] = summary;
    emit(c, j.dump(2) + "\n");
    return 0;
  }
  return emit_dataset(c, ds);
}

int cmd_plan_k(const Config& c) {
  if (c.overlap_file.empty()) throw UsageError("--overlaps is required");
  const auto spec = philter::io::parse_overlaps(philter::io::read_json_file(c.overlap_file));
  const auto plan = philter::plan_k_from_overlaps(spec);
  if (c.format == "csv") {
    std::ostringstream o;
    o << "F,labels,b,k\n";
    for (const auto& p : plan) {
      std::string labels;
      for (std::size_t i = 0; i < p.labels.size(); ++i) labels += (i ? ";" : "") + p.labels[i];
      o << p.prefix << ',' << csv_escape(labels) << ',' << philter::format_cell(p.b) << ','
        << (p.k ? std::to_string(*p.k) : std::string()) << '\n';
    }
    emit(c, o.str());
  } else {
    json rows = json::array();
    for (const auto& p : plan) {
      json r = {{"F", p.prefix}, {"labels", p.labels}, {"b", p.b}};
      r["k"] = p.k ? json(*p.k) : json(nullptr);
      rows.push_back(r);
    }
    emit(c, json{{"schema", "philter.plan_k/1"}, {"windows", rows}}.dump(2) + "\n");
  }
  return 0;
}

// Maximal aligned dyadic blocks covering the integer range [lo, hi) at depth m.
std::vector<std::string> dyadic_cover(std::uint64_t lo, std::uint64_t hi, int m) {
  std::vector<std::string> out;
  while (lo < hi) {
    int w = 0;
    while (w < m && ((lo >> w) & 1U) == 0 && lo + (std::uint64_t{2} << w) <= hi) ++w;
    if (w == m) --w;  // the empty prefix is not a window
    out.push_back(philter::uint_to_bits(lo >> w, m - w));
    lo += std::uint64_t{1} << w;
  }
  return out;
}

int cmd_window_for(const Config& c) {
  require_m(c);
  if (c.m > 62) throw UsageError("--m must be <= 62");
  if (!(c.emin < c.emax)) throw UsageError("--emin must be below --emax");
  const auto model = load_model(c);
  const double a = -model.scale() * (c.emax + model.shift()) / philter::kTwoPi;
  const double b = -model.scale() * (c.emin + model.shift()) / philter::kTwoPi;
  const double plo = std::min(a, b), phi = std::max(a, b);
  if (plo < 0.0 || phi > 1.0) {
    throw UsageError("energy range maps to phases [" + philter::format_cell(plo) + ", " +
                     philter::format_cell(phi) + "], outside [0, 1]");
  }
  const double big = std::ldexp(1.0, c.m);
  const double ulo = plo * big, uhi = phi * big;
  const bool exact = std::abs(ulo - std::round(ulo)) < 1e-9 && std::abs(uhi - std::round(uhi)) < 1e-9;
  const auto lo = static_cast<std::uint64_t>(exact ? std::round(ulo) : std::floor(ulo + 1e-9));
  const auto hi = static_cast<std::uint64_t>(exact ? std::round(uhi) : std::ceil(uhi - 1e-9));
  const auto cover = dyadic_cover(lo, std::max(hi, lo + 1), c.m);
  json rows = json::array();
  for (const auto& f : cover) {
    const philter::EnergyWindow w(f);
    const double e1 = -philter::kTwoPi * w.phase_lo() / model.scale() - model.shift();
    const double e2 = -philter::kTwoPi * w.phase_hi() / model.scale() - model.shift();
    rows.push_back({{"F", f}, {"energy_min", std::min(e1, e2)}, {"energy_max", std::max(e1, e2)}});
  }
  if (!exact) {
    std::string list;
    for (const auto& f : cover) list += (list.empty() ? "" : " ") + f;
    throw UsageError("no exact dyadic cover of [" + philter::format_cell(c.emin) + ", " +
                     philter::format_cell(c.emax) + "] at depth <= " + std::to_string(c.m) +
                     "; smallest enclosing cover: " + list);
  }
  emit(c, json{{"schema", "philter.window_for/1"}, {"m", c.m}, {"windows", rows}}.dump(2) + "\n");
  return 0;
}

int cmd_export_h2(const Config& c) {
  const auto model =
      philter::h2::model(c.quoted ? philter::h2::Energies::quoted : philter::h2::Energies::readout);
  emit(c, philter::io::hamiltonian_to_json(model).dump(2) + "\n");
  return 0;
}

void add_model_options(CLI::App* s, Config& c) {
  s->add_option("--hamiltonian", c.hamiltonian, "Hamiltonian JSON file (default: built-in H2)");
  s->add_option("--ansatz", c.ansatz, "hf | ry:<theta> | basis:<index> | ansatz JSON file");
}

void add_output_options(CLI::App* s, Config& c) {
  s->add_option("--out", c.out, "Output file (default: stdout)");
  s->add_option("--format", c.format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Energy-window eigenvalue sampling with phase estimation and amplitude amplification"};
  app.require_subcommand(1);
  Config c;
  std::string kind = "A";

  auto* qpe = app.add_subcommand("qpe", "QPE readout distribution (sampled with --seed)");
  auto* phil = app.add_subcommand("philter", "Estimate b, amplify, measure");
  auto* iphil = app.add_subcommand("iphilter", "Amplify a short register, finish bits by IQPE");
  auto* qphil = app.add_subcommand("qphilter", "Estimate-free randomized amplification");
  auto* qaec = app.add_subcommand("qae", "Amplitude estimation of the window probability");
  auto* tables = app.add_subcommand("tables", "Per-m eigenstate masses for window 00 (H2)");
  auto* fig4 = app.add_subcommand("fig4", "H2 PHILTER figure data");
  auto* fig5 = app.add_subcommand("fig5", "QPHILTER runtime samples");
  auto* plank = app.add_subcommand("plan-k", "Iterations per window from eigenstate overlaps");
  auto* wfor = app.add_subcommand("window-for", "Dyadic prefixes covering an energy range");
  auto* exph2 = app.add_subcommand("export-h2", "Write the H2 model as Hamiltonian JSON");

  for (auto* s : {qpe, phil, iphil, qphil, qaec}) {
    add_model_options(s, c);
    add_output_options(s, c);
    s->add_option("--m", c.m, "Energy-register qubits")->required();
    s->add_option("--seed", c.seed, "RNG seed");
    s->add_option("--runs", c.runs, "Independent runs (or samples for qpe)");
  }
  for (auto* s : {phil, iphil, qphil, qaec}) {
    s->add_option("--window", c.window, "Amplified prefix F")->required();
    s->add_option("--gamma", c.gamma, "Tolerance exponent (>= 1)");
  }
  for (auto* s : {phil, iphil, qaec}) s->add_option("--t", c.t, "Estimation qubits");
  phil->add_option("--max-retries", c.max_retries, "Measurement retries after the first");
  iphil->add_option("--passes", c.passes, "Whole-protocol repetitions");
  iphil->add_option("--register-bits", c.register_bits, "Amplified register size (default f + s)");
  iphil->add_option("--k", c.k, "Grover iterations (default from the estimate)");
  qphil->add_option("--max-iterations", c.max_iterations, "Total-iteration guard");

  for (auto* s : {tables, fig4, fig5, plank, wfor, exph2}) add_output_options(s, c);
  fig4->add_option("--kind", kind, "Panel A-F")->check(CLI::IsMember({"A", "B", "C", "D", "E", "F"}));
  fig4->add_option("--k-max", c.k_max, "Largest k for panels A-C");
  fig4->add_option("--m", c.m, "Energy-register qubits for panels A-C");
  fig4->add_option("--seed", c.seed, "RNG seed (panel F)");
  fig4->add_option("--runs", c.runs, "Runs per register size (panel F)");
  fig5->add_option("--b", c.overlaps, "Overlap values");
  fig5->add_option("--runs", c.runs, "Runs per overlap (default 1000)");
  fig5->add_option("--m", c.m, "Energy-register qubits (default 10)");
  fig5->add_option("--seed", c.seed, "RNG seed")->required();
  plank->add_option("--overlaps", c.overlap_file, "Overlap JSON file")->required();
  add_model_options(wfor, c);
  wfor->add_option("--emin", c.emin, "Lower energy")->required();
  wfor->add_option("--emax", c.emax, "Upper energy")->required();
  wfor->add_option("--m", c.m, "Maximum prefix depth")->required();
  exph2->add_flag("--quoted", c.quoted, "Use the five-figure eigenvalues");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }
  c.kind = kind.empty() ? 'A' : kind[0];

  try {
    if (*qpe) return cmd_qpe(c);
    if (*phil) return cmd_philter(c);
    if (*iphil) return cmd_iphilter(c);
    if (*qphil) return cmd_qphilter(c);
    if (*qaec) return cmd_qae(c);
    if (*tables) return cmd_tables(c);
    if (*fig4) return cmd_fig4(c);
    if (*fig5) return cmd_fig5(c);
    if (*plank) return cmd_plan_k(c);
    if (*wfor) return cmd_window_for(c);
    if (*exph2) return cmd_export_h2(c);
  } catch (const philter::ProtocolFailure& e) {
    std::cerr << "protocol failure: " << e.what() << "\n";
    return 2;
  } catch (const philter::CapacityError& e) {
    std::cerr << "capacity exceeded: " << e.what() << "\n";
    return 1;
  } catch (const philter::io::FormatError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return 1;
  } catch (const philter::InvalidArgument& e) {
    std::cerr << "invalid argument: " << e.what() << "\n";
    return 1;
  } catch (const UsageError& e) {
    std::cerr << "usage: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
