#pragma once

#include <string>
#include <vector>

#include "cbt/collision.hpp"
#include "cbt/qmat.hpp"
#include "cbt/reservoir.hpp"
#include "cbt/system.hpp"

namespace cbt {

// Rates below are effective rates, already multiplied by g^2 t_bar.
struct JumpTerm {
  ComplexMatrix op;  // A_omega, acts as rate * A rho A^dagger
  double rate{0.0};
};

struct DissipationTerm {
  ComplexMatrix op;  // A_{-omega} A_omega, acts as -(X rho + rho X^dagger)/2 with X = rate * op
  double rate{0.0};
};

struct LindbladTerm {
  ComplexMatrix op;
  double rate{0.0};
};

struct GeneratorSlot {
  ComplexMatrix h_coherent;
  std::vector<JumpTerm> jumps;
  std::vector<DissipationTerm> dissipations;
  std::vector<LindbladTerm> extra_lindblads;

  Index dim() const { return h_coherent.rows(); }
};

inline GeneratorSlot qme_generator(const SystemModel& model, const CollisionSlot& slot, const SpectralData& sd,
                                   double g, double t_bar) {
  const BohrParts p = bohr_decompose(slot.a_op, model, slot.qubit.omega);
  if ((p.a_minus - p.a_plus.adjoint()).cwiseAbs().maxCoeff() > 1e-10)
    throw NumericFailure("qme_generator: A_{-omega} is not the adjoint of A_omega");
  if (sd.gammabar_plus < -1e-12 || sd.gammabar_minus < -1e-12)
    throw NumericFailure("qme_generator: negative gain rate");
  const double k = g * g * t_bar;
  GeneratorSlot gen;
  gen.h_coherent = model.h_s;
  gen.jumps = {{p.a_plus, k * sd.gammabar_plus}, {p.a_minus, k * sd.gammabar_minus}};
  gen.dissipations = {{p.a_minus * p.a_plus, k * sd.gamma_plus}, {p.a_plus * p.a_minus, k * sd.gamma_minus}};
  return gen;
}

inline GeneratorSlot qme_generator(const SystemModel& model, const CollisionSlot& slot, double g, double t_bar) {
  return qme_generator(model, slot, spectral_functions(slot.qubit), g, t_bar);
}

// Embeds a system generator into system x photons and adds H_p, H_sp and photon loss.
inline GeneratorSlot lift_to_photons(const GeneratorSlot& gen, const PhotonSector& sector) {
  if (gen.dim() != sector.system_dim()) throw DimensionMismatch("lift_to_photons: system dimension mismatch");
  const ComplexMatrix ip = identity(sector.photon_dim());
  GeneratorSlot out;
  out.h_coherent = kron(gen.h_coherent, ip) + kron(identity(gen.dim()), sector.h_p) + sector.h_sp;
  for (const auto& j : gen.jumps) out.jumps.push_back({kron(j.op, ip), j.rate});
  for (const auto& d : gen.dissipations) out.dissipations.push_back({kron(d.op, ip), d.rate});
  for (const auto& l : gen.extra_lindblads) out.extra_lindblads.push_back({kron(l.op, ip), l.rate});
  out.extra_lindblads.push_back({sector.lift(sector.p1), sector.kappa});
  out.extra_lindblads.push_back({sector.lift(sector.p2), sector.kappa});
  return out;
}

inline ComplexMatrix apply_generator(const GeneratorSlot& gen, const ComplexMatrix& rho) {
  if (rho.rows() != gen.dim() || rho.cols() != gen.dim()) throw DimensionMismatch("generator: state dimension mismatch");
  ComplexMatrix out = -kI * (gen.h_coherent * rho - rho * gen.h_coherent);
  for (const auto& j : gen.jumps)
    if (j.rate != 0.0) out.noalias() += j.rate * (j.op * rho * j.op.adjoint());
  for (const auto& d : gen.dissipations) {
    if (d.rate == 0.0) continue;
    const ComplexMatrix x = d.rate * d.op;
    out.noalias() -= 0.5 * (x * rho + rho * x.adjoint());
  }
  for (const auto& l : gen.extra_lindblads) {
    if (l.rate == 0.0) continue;
    const ComplexMatrix n = l.op.adjoint() * l.op;
    out.noalias() += l.rate * (l.op * rho * l.op.adjoint() - 0.5 * (n * rho + rho * n));
  }
  return out;
}

// Column-stacking superoperator: vec(A rho B) = (B^T (x) A) vec(rho).
inline ComplexMatrix superoperator(const GeneratorSlot& gen) {
  const Index d = gen.dim();
  const ComplexMatrix id = identity(d);
  ComplexMatrix l = -kI * (kron(id, gen.h_coherent) - kron(gen.h_coherent.transpose(), id));
  for (const auto& j : gen.jumps)
    if (j.rate != 0.0) l += j.rate * kron(j.op.conjugate(), j.op);
  for (const auto& t : gen.dissipations) {
    if (t.rate == 0.0) continue;
    const ComplexMatrix x = t.rate * t.op;
    l -= 0.5 * (kron(id, x) + kron(x.conjugate(), id));
  }
  for (const auto& t : gen.extra_lindblads) {
    if (t.rate == 0.0) continue;
    const ComplexMatrix n = t.op.adjoint() * t.op;
    l += t.rate * (kron(t.op.conjugate(), t.op) - 0.5 * (kron(id, n) + kron(n.transpose(), id)));
  }
  return l;
}

inline ComplexVector vec(const ComplexMatrix& m) {
  return Eigen::Map<const ComplexVector>(m.data(), m.size());
}

inline ComplexMatrix unvec(const ComplexVector& v, Index d) {
  if (v.size() != d * d) throw DimensionMismatch("unvec: length is not d^2");
  return Eigen::Map<const ComplexMatrix>(v.data(), d, d);
}

inline ComplexMatrix euler_step(const ComplexMatrix& rho, const GeneratorSlot& gen, double t_bar, int substeps = 1) {
  if (substeps < 1) throw InvalidParameter("substeps", "must be >= 1");
  const double h = t_bar / substeps;
  ComplexMatrix r = rho;
  for (int k = 0; k < substeps; ++k) r += h * apply_generator(gen, r);
  return r;
}

inline ComplexMatrix rk4_step(const ComplexMatrix& rho, const GeneratorSlot& gen, double t_bar, int substeps = 1) {
  if (substeps < 1) throw InvalidParameter("substeps", "must be >= 1");
  const double h = t_bar / substeps;
  ComplexMatrix r = rho;
  for (int k = 0; k < substeps; ++k) {
    const ComplexMatrix k1 = apply_generator(gen, r);
    const ComplexMatrix k2 = apply_generator(gen, r + 0.5 * h * k1);
    const ComplexMatrix k3 = apply_generator(gen, r + 0.5 * h * k2);
    const ComplexMatrix k4 = apply_generator(gen, r + h * k3);
    r += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  return r;
}

enum class Integrator { euler, rk4, exact };

inline const char* to_string(Integrator i) {
  switch (i) {
    case Integrator::euler: return "euler";
    case Integrator::rk4: return "rk4";
    case Integrator::exact: return "exact";
  }
  return "unknown";
}

// Periodic QME engine: generator (n mod N_q) drives step n.
class QmeEngine {
 public:
  QmeEngine(std::vector<GeneratorSlot> slots, double t_bar, Integrator integrator = Integrator::euler,
            int substeps = 1)
      : slots_(std::move(slots)), t_bar_(t_bar), integrator_(integrator), substeps_(substeps) {
    if (slots_.empty()) throw InvalidParameter("slots", "QME engine needs at least one generator");
    if (!(t_bar > 0.0)) throw InvalidParameter("t_bar", "must be > 0");
    if (substeps < 1) throw InvalidParameter("substeps", "must be >= 1");
    if (integrator_ == Integrator::exact)
      for (const auto& s : slots_) propagators_.push_back(expm(t_bar_ * superoperator(s)));
  }

  std::size_t period() const { return slots_.size(); }
  const GeneratorSlot& generator(std::size_t l) const { return slots_.at(l); }
  double t_bar() const { return t_bar_; }

  ComplexMatrix step(const ComplexMatrix& rho, std::size_t n) const {
    const std::size_t l = n % slots_.size();
    switch (integrator_) {
      case Integrator::euler: return euler_step(rho, slots_[l], t_bar_, substeps_);
      case Integrator::rk4: return rk4_step(rho, slots_[l], t_bar_, substeps_);
      case Integrator::exact: {
        const ComplexVector v = propagators_[l] * vec(rho);
        return unvec(v, rho.rows());
      }
    }
    return rho;
  }

 private:
  std::vector<GeneratorSlot> slots_;
  double t_bar_;
  Integrator integrator_;
  int substeps_;
  std::vector<ComplexMatrix> propagators_;
};

// Population-transfer superoperators as 2x2 diagonal actions on the basis (+, -).
struct PmeRates {
  Eigen::Matrix2d plus_to_minus;
  Eigen::Matrix2d minus_to_plus;
};

struct PmeReduction {
  PmeRates gammas;
  double flux{0.0};
};

inline PmeRates pme_rates(const SpectralData& d) {
  PmeRates r;
  r.plus_to_minus << -d.gamma_plus, 0.0, 0.0, d.gammabar_plus;
  r.minus_to_plus << d.gammabar_minus, 0.0, 0.0, -d.gamma_minus;
  return r;
}

inline PmeReduction pme_reduce(const SpectralData& d, double chi_plus, double chi_minus) {
  if (chi_plus < 0.0 || chi_minus < 0.0) throw InvalidParameter("chi", "populations must be >= 0");
  return {pme_rates(d), d.delta_plus * chi_plus + d.delta_minus * chi_minus};
}

inline PmeRates time_reversed_pme(const PmeRates& r) {
  PmeRates t;
  t.plus_to_minus << -r.plus_to_minus(1, 1), 0.0, 0.0, -r.plus_to_minus(0, 0);
  t.minus_to_plus << -r.minus_to_plus(1, 1), 0.0, 0.0, -r.minus_to_plus(0, 0);
  return t;
}

inline PmeRates time_reversed_pme(const SpectralData& d) { return time_reversed_pme(pme_rates(d)); }

// Sum of elementwise distances between the forward and reversed superoperators of each transition.
inline double irreversibility(const PmeRates& a, const PmeRates& b) {
  return (a.plus_to_minus - b.plus_to_minus).cwiseAbs().maxCoeff() +
         (a.minus_to_plus - b.minus_to_plus).cwiseAbs().maxCoeff();
}

// Second-order expansion of one collision without the rotating-wave approximation. The joint free
// evolution (system plus reservoir qubit) runs for half a step on each side, and the shifted coupling
// step between them is expanded to O(t_bar^2).
inline ComplexMatrix second_order_map(const ComplexMatrix& rho_s, const SystemModel& model, const CollisionSlot& slot,
                                      double g, double t_bar) {
  const BiorthogonalQubit q = biorthogonalize(slot.qubit);
  const ComplexMatrix rho_q = boltzmann_right_state(slot.qubit, q);
  const ComplexMatrix b = stability_shift(coupling_operator(slot.qubit.theta_c), rho_q).b_shifted;
  const ComplexMatrix v = g * kron(slot.a_op, b);
  const ComplexMatrix h0 = kron(model.h_s, identity(2)) + kron(identity(model.dim), qubit_hamiltonian(slot.qubit));
  const ComplexMatrix half = expm(-kI * 0.5 * t_bar * h0);
  const ComplexMatrix x = half * kron(rho_s, rho_q) * half.adjoint();
  const ComplexMatrix v2 = v * v;
  const ComplexMatrix mid = x - kI * t_bar * (v * x - x * v.adjoint()) +
                            t_bar * t_bar * (v * x * v.adjoint() - 0.5 * (v2 * x + x * v2.adjoint()));
  return partial_trace(half * mid * half.adjoint(), SpaceShape{model.dim, 2}, 0);
}

}  // namespace cbt
