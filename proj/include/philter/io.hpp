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

#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "philter/common.hpp"
#include "philter/experiments.hpp"
#include "philter/protocols.hpp"
#include "philter/spectral.hpp"

// JSON formats.
//
// Hamiltonian: {"dim": d, "matrix": [[[re, im], ...], ...], "scale": s, "shift": c}
//   row-major; a bare number is accepted for a real entry; scale and shift optional.
// Ansatz:      {"vector": [[re, im], ...]} | {"basis": i} | {"ry_theta": theta}
// Overlaps:    {"overlaps": [{"label": str, "prob": p}], "windows": [{"F": bits, "labels": [str]}]}
// Run report:  see report_to_json; "schema" carries kReportSchema.

namespace philter::io {

using json = nlohmann::json;

inline constexpr const char* kReportSchema = "philter.run_report/1";

/// Malformed or unreadable input file.
class FormatError : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

inline json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw FormatError(path + ": invalid JSON: " + e.what());
  }
}

inline cplx parse_complex(const json& v, const std::string& where) {
  if (v.is_number()) return {v.get<double>(), 0.0};
  if (v.is_array() && v.size() == 2 && v[0].is_number() && v[1].is_number()) {
    return {v[0].get<double>(), v[1].get<double>()};
  }
  throw FormatError(where + ": expected a number or [re, im]");
}

inline json complex_to_json(cplx c) { return json::array({c.real(), c.imag()}); }

inline SpectralModel parse_hamiltonian(const json& j) {
  if (!j.is_object()) throw FormatError("Hamiltonian must be a JSON object");
  if (!j.contains("matrix") || !j["matrix"].is_array()) {
    throw FormatError("Hamiltonian needs a \"matrix\" array");
  }
  const auto& rows = j["matrix"];
  const auto d = static_cast<Eigen::Index>(rows.size());
  if (j.contains("dim")) {
    if (!j["dim"].is_number_integer() || j["dim"].get<std::int64_t>() != d) {
      throw FormatError("\"dim\" does not match the number of matrix rows (" + std::to_string(d) +
                        ")");
    }
  }
  Eigen::MatrixXcd h(d, d);
  for (Eigen::Index r = 0; r < d; ++r) {
    const auto& row = rows[static_cast<std::size_t>(r)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != d) {
      throw FormatError("matrix row " + std::to_string(r) + " must have " + std::to_string(d) +
                        " entries");
    }
    for (Eigen::Index c = 0; c < d; ++c) {
      h(r, c) = parse_complex(row[static_cast<std::size_t>(c)],
                              "matrix[" + std::to_string(r) + "][" + std::to_string(c) + "]");
    }
  }
  const double scale = j.value("scale", 1.0);
  const double shift = j.value("shift", 0.0);
  return SpectralModel(h, scale, shift);
}

inline SpectralModel load_hamiltonian(const std::string& path) {
  return parse_hamiltonian(read_json_file(path));
}

inline json hamiltonian_to_json(const SpectralModel& model) {
  json rows = json::array();
  const auto& h = model.hamiltonian();
  for (Eigen::Index r = 0; r < h.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < h.cols(); ++c) row.push_back(complex_to_json(h(r, c)));
    rows.push_back(row);
  }
  return {{"dim", h.rows()}, {"matrix", rows}, {"scale", model.scale()}, {"shift", model.shift()}};
}

inline AnsatzSpec parse_ansatz(const json& j) {
  if (!j.is_object()) throw FormatError("ansatz must be a JSON object");
  if (j.contains("vector")) {
    const auto& v = j["vector"];
    if (!v.is_array()) throw FormatError("ansatz \"vector\" must be an array");
    ExplicitAnsatz e;
    for (std::size_t i = 0; i < v.size(); ++i) {
      e.amplitudes.push_back(parse_complex(v[i], "vector[" + std::to_string(i) + "]"));
    }
    return e;
  }
  if (j.contains("basis")) {
    const auto& b = j["basis"];
    if (!b.is_number_integer() || b.get<std::int64_t>() < 0) {
      throw FormatError("ansatz \"basis\" must be a non-negative integer");
    }
    return BasisAnsatz{j["basis"].get<std::uint64_t>()};
  }
  if (j.contains("ry_theta")) {
    if (!j["ry_theta"].is_number()) throw FormatError("ansatz \"ry_theta\" must be a number");
    return RyAnsatz{j["ry_theta"].get<double>()};
  }
  throw FormatError("ansatz needs one of \"vector\", \"basis\", \"ry_theta\"");
}

/// "ry:<theta>", "basis:<index>", "hf", or a path to an ansatz JSON file.
inline AnsatzSpec parse_ansatz_argument(const std::string& arg) {
  auto number = [&](const std::string& text) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(text, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != text.size()) throw FormatError("bad number in ansatz '" + arg + "'");
    return v;
  };
  if (arg == "hf") return h2::hartree_fock();
  if (arg.rfind("ry:", 0) == 0) return RyAnsatz{number(arg.substr(3))};
  if (arg.rfind("basis:", 0) == 0) {
    const double v = number(arg.substr(6));
    if (v < 0 || v != static_cast<double>(static_cast<std::uint64_t>(v))) {
      throw FormatError("basis index must be a non-negative integer: '" + arg + "'");
    }
    return BasisAnsatz{static_cast<std::uint64_t>(v)};
  }
  return parse_ansatz(read_json_file(arg));
}

inline OverlapSpec parse_overlaps(const json& j) {
  if (!j.is_object() || !j.contains("overlaps") || !j["overlaps"].is_array()) {
    throw FormatError("overlap file needs an \"overlaps\" array");
  }
  if (!j.contains("windows") || !j["windows"].is_array()) {
    throw FormatError("overlap file needs a \"windows\" array");
  }
  OverlapSpec spec;
  for (const auto& e : j["overlaps"]) {
    if (!e.is_object() || !e.contains("label") || !e["label"].is_string() || !e.contains("prob") ||
        !e["prob"].is_number()) {
      throw FormatError("each overlap needs a string \"label\" and a numeric \"prob\"");
    }
    spec.overlaps.push_back({e["label"].get<std::string>(), e["prob"].get<double>()});
  }
  for (const auto& w : j["windows"]) {
    if (!w.is_object() || !w.contains("F") || !w["F"].is_string() || !w.contains("labels") ||
        !w["labels"].is_array()) {
      throw FormatError("each window needs a string \"F\" and a \"labels\" array");
    }
    WindowAssignment a;
    a.prefix = w["F"].get<std::string>();
    for (const auto& l : w["labels"]) {
      if (!l.is_string()) throw FormatError("window labels must be strings");
      a.labels.push_back(l.get<std::string>());
    }
    spec.windows.push_back(std::move(a));
  }
  return spec;
}

inline json estimate_to_json(const AmplitudeEstimate& e) {
  return {{"t", e.t},
          {"y", e.y},
          {"theta", e.theta},
          {"b", e.b},
          {"bound", e.bound},
          {"qpe_applications", e.qpe_applications}};
}

inline json report_to_json(const RunReport& r) {
  json j = {{"schema", kReportSchema},
            {"protocol", r.protocol},
            {"success", r.success},
            {"seed", r.seed},
            {"m", r.m},
            {"bits", r.bits},
            {"value", r.value},
            {"phase", r.phase},
            {"energy", r.energy},
            {"in_window", r.in_window},
            {"in_acceptance", r.in_acceptance},
            {"k", r.k},
            {"grover_iterations", r.grover_iterations},
            {"qpe_applications", r.qpe_applications},
            {"estimation_qpe_applications", r.estimation_qpe_applications},
            {"attempts", r.attempts},
            {"retries", r.retries},
            {"probabilities", r.probabilities}};
  if (!r.message.empty()) j["message"] = r.message;
  if (r.estimate) j["estimate"] = estimate_to_json(*r.estimate);
  if (r.protocol == "iphilter") {
    j["amplified_bits"] = r.amplified_bits;
    j["iqpe_rounds"] = r.iqpe_rounds;
    j["overlap_checks"] = r.overlap_checks;
    j["overlap_agreements"] = r.overlap_agreements;
    if (r.condition_met) j["condition_met"] = *r.condition_met;
  }
  if (r.protocol == "qphilter") {
    j["l_values"] = r.l_values;
    j["k_values"] = r.k_values;
  }
  return j;
}

inline json dataset_to_json(const FigureDataset& ds) {
  json rows = json::array();
  for (const auto& row : ds.rows) {
    json out = json::object();
    for (std::size_t i = 0; i < row.size(); ++i) {
      std::visit([&](const auto& v) { out[ds.columns[i]] = v; }, row[i]);
    }
    rows.push_back(out);
  }
  json meta = json::object();
  for (const auto& [k, v] : ds.metadata) meta[k] = v;
  return {{"dataset", ds.tag}, {"metadata", meta}, {"columns", ds.columns}, {"rows", rows}};
}

}  // namespace philter::io
