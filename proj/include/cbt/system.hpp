#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "cbt/qmat.hpp"

namespace cbt {

class DegenerateSpectrum : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct Transition {
  int lower{0};
  int upper{1};
  double omega{0.0};
};

using TransitionTable = std::vector<Transition>;

struct SystemModel {
  ComplexMatrix h_s;
  Index dim{0};
  std::vector<std::string> labels;
  Eigen::VectorXd energies;        // ascending, ground state shifted to 0
  ComplexMatrix eigenvectors;      // columns ordered like energies
  std::vector<ComplexMatrix> projectors;
  ComplexMatrix coupling;          // default system-side coupling operator A
  TransitionTable transitions;
  double resonance_tol{1e-9};
};

inline TransitionTable transition_table(const Eigen::VectorXd& energies, double tol) {
  TransitionTable t;
  const Index n = energies.size();
  for (Index i = 0; i < n; ++i)
    for (Index j = i + 1; j < n; ++j) {
      const double w = energies(j) - energies(i);
      if (w > tol) t.push_back({static_cast<int>(i), static_cast<int>(j), w});
    }
  std::stable_sort(t.begin(), t.end(), [](const Transition& a, const Transition& b) {
    if (a.omega != b.omega) return a.omega < b.omega;
    if (a.lower != b.lower) return a.lower < b.lower;
    return a.upper < b.upper;
  });
  return t;
}

inline SystemModel make_model(const ComplexMatrix& h_s, const ComplexMatrix& coupling,
                              std::vector<std::string> labels = {}) {
  require_square(h_s, "make_model");
  if (hermiticity_error(h_s) > 1e-12) throw InvalidParameter("h_s", "system Hamiltonian must be Hermitian");
  if (coupling.rows() != h_s.rows() || coupling.cols() != h_s.cols())
    throw DimensionMismatch("make_model: coupling operator does not act on the system space");
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(h_s);
  if (es.info() != Eigen::Success) throw NumericFailure("make_model: eigensolver failed");
  SystemModel m;
  m.h_s = h_s;
  m.dim = h_s.rows();
  m.energies = es.eigenvalues().array() - es.eigenvalues()(0);
  m.eigenvectors = es.eigenvectors();
  for (Index k = 0; k < m.dim; ++k) {
    ComplexVector v = m.eigenvectors.col(k);
    m.projectors.push_back(v * v.adjoint());
  }
  m.coupling = coupling;
  const double emax = std::max(es.eigenvalues().cwiseAbs().maxCoeff(), 1.0);
  m.resonance_tol = 1e-9 * emax;
  m.transitions = transition_table(m.energies, m.resonance_tol);
  if (labels.empty())
    for (Index k = 0; k < m.dim; ++k) labels.push_back(std::to_string(k));
  m.labels = std::move(labels);
  return m;
}

// Spin-1 x operator in the ladder basis |0>,|1>,|2>.
inline ComplexMatrix spin1_x() {
  const double r = 1.0 / std::sqrt(2.0);
  return (ComplexMatrix(3, 3) << 0, r, 0, r, 0, r, 0, r, 0).finished();
}

inline SystemModel three_level_model(double omega10, double omega21) {
  if (!(omega10 > 0.0)) throw InvalidParameter("omega_10", "must be > 0");
  if (!(omega21 > 0.0)) throw InvalidParameter("omega_21", "must be > 0");
  ComplexMatrix h = ComplexMatrix::Zero(3, 3);
  h(1, 1) = omega10;
  h(2, 2) = omega10 + omega21;
  return make_model(h, spin1_x(), {"0", "1", "2"});
}

// Spin-1/2 operator s^axis = sigma^axis / 2 acting on spin `site` of two.
inline ComplexMatrix two_spin_op(char axis, int site) {
  ComplexMatrix s;
  switch (axis) {
    case 'x': s = 0.5 * pauli_x(); break;
    case 'y': s = 0.5 * pauli_y(); break;
    case 'z': s = 0.5 * pauli_z(); break;
    default: throw std::invalid_argument("two_spin_op: axis must be x, y or z");
  }
  if (site == 0) return kron(s, identity(2));
  if (site == 1) return kron(identity(2), s);
  throw std::invalid_argument("two_spin_op: site must be 0 or 1");
}

inline SystemModel two_spin_model(double j_coupling, double h_x, double h_z) {
  const ComplexMatrix h = j_coupling * two_spin_op('z', 0) * two_spin_op('z', 1) +
                          h_x * (two_spin_op('x', 0) + two_spin_op('x', 1)) +
                          h_z * (two_spin_op('z', 0) + two_spin_op('z', 1));
  SystemModel m = make_model(h, two_spin_op('x', 0));
  for (Index k = 0; k + 1 < m.dim; ++k)
    if (m.energies(k + 1) - m.energies(k) <= m.resonance_tol)
      throw DegenerateSpectrum("two_spin_model: degenerate energy levels");
  for (std::size_t k = 0; k + 1 < m.transitions.size(); ++k)
    if (m.transitions[k + 1].omega - m.transitions[k].omega <= m.resonance_tol)
      throw DegenerateSpectrum("two_spin_model: coinciding Bohr frequencies");
  return m;
}

struct BohrParts {
  ComplexMatrix a_plus;   // lowering part A_omega
  ComplexMatrix a_minus;  // raising part A_{-omega}
};

inline BohrParts bohr_decompose(const ComplexMatrix& a, const SystemModel& model, double omega, double tol) {
  if (a.rows() != model.dim || a.cols() != model.dim)
    throw DimensionMismatch("bohr_decompose: operator does not act on the model space");
  if (!(omega > 0.0)) throw InvalidParameter("omega", "must be > 0");
  BohrParts p{ComplexMatrix::Zero(model.dim, model.dim), ComplexMatrix::Zero(model.dim, model.dim)};
  for (Index i = 0; i < model.dim; ++i)
    for (Index j = 0; j < model.dim; ++j) {
      if (std::abs(model.energies(j) - model.energies(i) - omega) > tol) continue;
      p.a_plus += model.projectors[static_cast<std::size_t>(i)] * a * model.projectors[static_cast<std::size_t>(j)];
      p.a_minus += model.projectors[static_cast<std::size_t>(j)] * a * model.projectors[static_cast<std::size_t>(i)];
    }
  if (hermiticity_error(a) <= 1e-12 && (p.a_minus - p.a_plus.adjoint()).cwiseAbs().maxCoeff() > 1e-10)
    throw NumericFailure("bohr_decompose: raising part is not the adjoint of the lowering part");
  return p;
}

inline BohrParts bohr_decompose(const ComplexMatrix& a, const SystemModel& model, double omega) {
  return bohr_decompose(a, model, omega, model.resonance_tol);
}

// Truncated annihilation operator with entries sqrt(k) on the first superdiagonal.
inline ComplexMatrix annihilation(int cutoff) {
  if (cutoff < 1) throw InvalidParameter("cutoff", "must be >= 1");
  ComplexMatrix p = ComplexMatrix::Zero(cutoff + 1, cutoff + 1);
  for (int k = 1; k <= cutoff; ++k) p(k - 1, k) = std::sqrt(static_cast<double>(k));
  return p;
}

struct PhotonSector {
  double omega21{1.0}, omega10{1.0};
  int cutoff{2};
  double g_int{0.4};
  double kappa{0.1};
  ComplexMatrix p1, p2;  // on the joint two-mode photon space, mode 1 first
  ComplexMatrix h_p;
  ComplexMatrix h_sp;  // on system (three-level) x photon space

  Index photon_dim() const { return p1.rows(); }
  Index system_dim() const { return h_sp.rows() / p1.rows(); }
  ComplexMatrix lift(const ComplexMatrix& photon_op) const { return kron(identity(system_dim()), photon_op); }
};

inline PhotonSector photon_sector(double omega21, double omega10, int cutoff, double g_int, double kappa) {
  if (!(kappa >= 0.0)) throw InvalidParameter("kappa", "must be >= 0");
  PhotonSector s;
  s.omega21 = omega21;
  s.omega10 = omega10;
  s.cutoff = cutoff;
  s.g_int = g_int;
  s.kappa = kappa;
  const ComplexMatrix p = annihilation(cutoff);
  const ComplexMatrix id = identity(cutoff + 1);
  s.p1 = kron(p, id);
  s.p2 = kron(id, p);
  s.h_p = omega21 * s.p1.adjoint() * s.p1 + omega10 * s.p2.adjoint() * s.p2;
  const ComplexMatrix jc = kron(basis_projector(3, 2, 1), s.p1) + kron(basis_projector(3, 1, 0), s.p2);
  s.h_sp = g_int * (jc + jc.adjoint());
  return s;
}

}  // namespace cbt
