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
#include <variant>
#include <vector>

#include "philter/common.hpp"
#include "philter/state_vector.hpp"

namespace philter {

struct EigenDecomposition {
  std::vector<double> energies;  // ascending
  Eigen::MatrixXcd vectors;      // column j is the eigenvector of energies[j]
};

inline double hermiticity_defect(const Eigen::MatrixXcd& h) {
  return (h - h.adjoint()).cwiseAbs().maxCoeff();
}

/// Ascending eigenvalues; each eigenvector's first non-negligible component is made
/// real and positive so the decomposition is reproducible.
inline EigenDecomposition diagonalize(const Eigen::MatrixXcd& h) {
  require(h.rows() == h.cols() && h.rows() >= 1, "Hamiltonian must be a non-empty square matrix");
  require(h.rows() <= 4096, "diagonalization is limited to dimension 4096");
  const double defect = hermiticity_defect(h);
  require(defect < 1e-10, "Hamiltonian is not Hermitian (max |H - H^dag| = " +
                              std::to_string(defect) + ")");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(h);
  require(solver.info() == Eigen::Success, "eigensolver did not converge");
  EigenDecomposition out;
  out.energies.assign(solver.eigenvalues().data(),
                      solver.eigenvalues().data() + solver.eigenvalues().size());
  out.vectors = solver.eigenvectors();
  for (Eigen::Index j = 0; j < out.vectors.cols(); ++j) {
    for (Eigen::Index i = 0; i < out.vectors.rows(); ++i) {
      const cplx c = out.vectors(i, j);
      if (std::abs(c) > 1e-12) {
        out.vectors.col(j) *= std::conj(c) / std::abs(c);
        break;
      }
    }
  }
  return out;
}

/// Hermitian H with the affine map H' = scale * (H + shift I). The scaled spectrum
/// must sit in (-2 pi, 0] so that exp(-i H') has injective eigenphases.
class SpectralModel {
 public:
  explicit SpectralModel(Eigen::MatrixXcd h, double scale = 1.0, double shift = 0.0)
      : h_(std::move(h)), scale_(scale), shift_(shift) {
    const auto d = h_.rows();
    require(d >= 2 && (d & (d - 1)) == 0,
            "Hamiltonian dimension must be a power of two >= 2, got " + std::to_string(d));
    require(std::isfinite(scale) && scale != 0.0, "scale must be finite and non-zero");
    eig_ = diagonalize(h_);
    check_spectrum();
  }

  Eigen::Index dim() const { return h_.rows(); }
  int num_qubits() const {
    int q = 0;
    while ((Eigen::Index{1} << q) < dim()) ++q;
    return q;
  }
  const Eigen::MatrixXcd& hamiltonian() const { return h_; }
  double scale() const { return scale_; }
  double shift() const { return shift_; }
  const EigenDecomposition& eigen() const { return eig_; }

  double scaled(double energy) const { return scale_ * (energy + shift_); }

  /// phi = -E'/(2 pi) in [0, 1), the eigenphase QPE reads for exp(-i H').
  double phase_of(double energy) const {
    const double e = scaled(energy);
    require(e > -kTwoPi && e <= 1e-12, "scaled energy " + std::to_string(e) +
                                           " outside the injective range (-2pi, 0]");
    double phi = -e / kTwoPi;
    if (phi < 0.0) phi = 0.0;
    if (phi >= 1.0) phi = 0.0;
    return phi;
  }

  std::vector<double> eigenphases() const {
    std::vector<double> out;
    out.reserve(eig_.energies.size());
    for (double e : eig_.energies) out.push_back(phase_of(e));
    return out;
  }

  /// Energy (original units) of the m-bit readout y.
  double decode(std::uint64_t y, int m) const {
    const double phi = static_cast<double>(y) / std::ldexp(1.0, m);
    return -kTwoPi * phi / scale_ - shift_;
  }

 private:
  void check_spectrum() const {
    const double lo = eig_.energies.front(), hi = eig_.energies.back();
    const double e_lo = scaled(lo), e_hi = scaled(hi);
    const double min_scaled = std::min(e_lo, e_hi), max_scaled = std::max(e_lo, e_hi);
    if (min_scaled > -kTwoPi && max_scaled <= 1e-12) return;
    std::string hint;
    if (hi + shift_ <= 0.0 && lo + shift_ < 0.0) {
      hint = "admissible scale range for this shift is (0, " +
             std::to_string(kTwoPi / -(lo + shift_)) + ")";
    } else {
      hint = "choose shift <= " + std::to_string(-hi) +
             " so that every E + shift is non-positive";
    }
    throw InvalidArgument("scaled spectrum [" + std::to_string(min_scaled) + ", " +
                          std::to_string(max_scaled) + "] is outside (-2pi, 0]; " + hint);
  }

  Eigen::MatrixXcd h_;
  double scale_;
  double shift_;
  EigenDecomposition eig_;
};

inline EigenDecomposition diagonalize(const SpectralModel& model) { return model.eigen(); }

inline double phase_map(const SpectralModel& model, double energy) {
  return model.phase_of(energy);
}

inline double decode_energy(const SpectralModel& model, std::uint64_t y, int m) {
  return model.decode(y, m);
}

/// exp(-i H' t) built from the eigendecomposition.
inline Unitary evolution_unitary(const SpectralModel& model, double t) {
  const auto& eig = model.eigen();
  Eigen::VectorXcd phases(static_cast<Eigen::Index>(eig.energies.size()));
  for (std::size_t j = 0; j < eig.energies.size(); ++j) {
    phases(static_cast<Eigen::Index>(j)) = std::polar(1.0, -model.scaled(eig.energies[j]) * t);
  }
  return Unitary(eig.vectors * phases.asDiagonal() * eig.vectors.adjoint(), 1e-9);
}

// ---------------------------------------------------------------------------
// Ansatz preparation

struct ExplicitAnsatz {
  std::vector<cplx> amplitudes;
};
struct BasisAnsatz {
  std::uint64_t index = 0;
};
/// Ry(theta)|0> on a single qubit.
struct RyAnsatz {
  double theta = 0.0;
};
using AnsatzSpec = std::variant<ExplicitAnsatz, BasisAnsatz, RyAnsatz>;

inline std::vector<cplx> ansatz_vector(const AnsatzSpec& spec, std::size_t dim) {
  std::vector<cplx> v(dim, cplx{0.0, 0.0});
  if (const auto* e = std::get_if<ExplicitAnsatz>(&spec)) {
    require(e->amplitudes.size() == dim, "ansatz vector has " +
                                             std::to_string(e->amplitudes.size()) +
                                             " entries, model dimension is " + std::to_string(dim));
    const double n = std::sqrt(norm_squared(e->amplitudes));
    require(std::abs(n - 1.0) <= 1e-8,
            "ansatz vector is not normalized (norm " + std::to_string(n) + ")");
    for (std::size_t i = 0; i < dim; ++i) v[i] = e->amplitudes[i] / n;
  } else if (const auto* b = std::get_if<BasisAnsatz>(&spec)) {
    require(b->index < dim, "ansatz basis index " + std::to_string(b->index) +
                                " out of range for dimension " + std::to_string(dim));
    v[b->index] = 1.0;
  } else {
    const auto& r = std::get<RyAnsatz>(spec);
    require(dim == 2, "Ry ansatz needs a single-qubit (dimension 2) model");
    v[0] = std::cos(r.theta / 2);
    v[1] = std::sin(r.theta / 2);
  }
  return v;
}

/// Overlaps a_j = <E_j|ansatz>.
inline std::vector<cplx> eigen_overlaps(const SpectralModel& model, const AnsatzSpec& spec) {
  const auto v = ansatz_vector(spec, static_cast<std::size_t>(model.dim()));
  const Eigen::Map<const Eigen::VectorXcd> psi(v.data(), static_cast<Eigen::Index>(v.size()));
  const Eigen::VectorXcd a = model.eigen().vectors.adjoint() * psi;
  return {a.data(), a.data() + a.size()};
}

/// The state-preparation unitary O with O|0> = psi, realized as a phased
/// Householder reflection so both O and O^dag cost O(d) per block.
class AnsatzPreparation {
 public:
  explicit AnsatzPreparation(std::vector<cplx> psi) : psi_(std::move(psi)) {
    const double n = std::sqrt(norm_squared(psi_));
    require(std::abs(n - 1.0) <= 1e-8, "ansatz vector is not normalized");
    for (auto& a : psi_) a /= n;
    phase_ = std::abs(psi_[0]) > 0.0 ? psi_[0] / std::abs(psi_[0]) : cplx{1.0, 0.0};
    w_ = psi_;
    for (auto& a : w_) a = -a;
    w_[0] += phase_;
    w_norm2_ = norm_squared(w_);
  }

  std::size_t dim() const { return psi_.size(); }
  const std::vector<cplx>& vector() const { return psi_; }

  void apply(std::span<cplx> block) const {
    reflect(block);
    for (auto& a : block) a *= phase_;
  }
  void apply_inverse(std::span<cplx> block) const {
    reflect(block);
    const cplx c = std::conj(phase_);
    for (auto& a : block) a *= c;
  }

  Unitary matrix() const {
    const auto d = static_cast<Eigen::Index>(dim());
    Eigen::MatrixXcd m(d, d);
    std::vector<cplx> col(dim());
    for (Eigen::Index j = 0; j < d; ++j) {
      std::fill(col.begin(), col.end(), cplx{0.0, 0.0});
      col[static_cast<std::size_t>(j)] = 1.0;
      apply(col);
      for (Eigen::Index i = 0; i < d; ++i) m(i, j) = col[static_cast<std::size_t>(i)];
    }
    return Unitary(m, 1e-9);
  }

 private:
  void reflect(std::span<cplx> x) const {
    if (w_norm2_ < 1e-28) return;
    cplx dot = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) dot += std::conj(w_[i]) * x[i];
    const cplx f = 2.0 * dot / w_norm2_;
    for (std::size_t i = 0; i < x.size(); ++i) x[i] -= f * w_[i];
  }

  std::vector<cplx> psi_;
  std::vector<cplx> w_;
  cplx phase_{1.0, 0.0};
  double w_norm2_ = 0.0;
};

/// Full layout state with the ansatz on the state register and zeros elsewhere.
inline StateVector prepare_ansatz(const AnsatzSpec& spec, const RegisterLayout& layout) {
  require(layout.state_bits >= 1, "layout has an empty state register");
  const std::size_t dim = std::size_t{1} << layout.state_bits;
  const auto v = ansatz_vector(spec, dim);
  StateVector s(layout.total());
  auto amps = s.amplitudes();
  const int low = layout.ancilla;
  for (std::size_t i = 0; i < dim; ++i) amps[i << low] = v[i];
  return s;
}

// ---------------------------------------------------------------------------
// Molecular hydrogen in the two-configuration singlet subspace (one qubit).

namespace h2 {

/// 20-bit QPE readouts of the two eigenphases.
inline constexpr std::uint64_t kGroundReadout = 309986;
inline constexpr std::uint64_t kExcitedReadout = 37487;
inline constexpr int kReadoutBits = 20;
inline constexpr const char* kGroundBits = "01001011101011100010";
inline constexpr const char* kExcitedBits = "00001001001001101111";

/// Eigenvalues to five significant figures, as usually quoted (Hartree).
inline constexpr double kQuotedGround = -1.8574;
inline constexpr double kQuotedExcited = -0.22441;

enum class Energies {
  /// E = -2 pi y / 2^20 with the 20-bit readouts above; reproduces them exactly.
  readout,
  /// The five-figure values; their phases differ from the readouts in the low bits.
  quoted,
};

inline Eigen::MatrixXcd eigenvectors() {
  Eigen::Vector2d gs(-0.9938, 0.1115);
  Eigen::Vector2d es(0.1115, 0.9938);
  gs.normalize();
  es -= es.dot(gs) * gs;
  es.normalize();
  Eigen::MatrixXcd v(2, 2);
  v.col(0) = gs.cast<cplx>();
  v.col(1) = es.cast<cplx>();
  return v;
}

inline double ground_energy(Energies which = Energies::readout) {
  return which == Energies::quoted
             ? kQuotedGround
             : -kTwoPi * static_cast<double>(kGroundReadout) / std::ldexp(1.0, kReadoutBits);
}

inline double excited_energy(Energies which = Energies::readout) {
  return which == Energies::quoted
             ? kQuotedExcited
             : -kTwoPi * static_cast<double>(kExcitedReadout) / std::ldexp(1.0, kReadoutBits);
}

inline SpectralModel model(Energies which = Energies::readout) {
  const auto v = eigenvectors();
  Eigen::Vector2cd e(ground_energy(which), excited_energy(which));
  Eigen::MatrixXcd h = v * e.asDiagonal() * v.adjoint();
  h = 0.5 * (h + h.adjoint()).eval();
  return SpectralModel(h);
}

inline AnsatzSpec hartree_fock() { return BasisAnsatz{0}; }

/// Ry angle whose ansatz has |<E_es|psi>|^2 = p (0 <= p <= 1).
inline double ry_angle_for_excited_probability(double p) {
  require(p >= 0.0 && p <= 1.0, "probability must be in [0, 1]");
  const auto v = eigenvectors();
  // E_es = (sin a, cos a) so <E_es|Ry(theta)|0> = sin(a + theta/2).
  const double a = std::atan2(v(0, 1).real(), v(1, 1).real());
  return 2.0 * (std::asin(std::sqrt(p)) - a);
}

}  // namespace h2

}  // namespace philter
