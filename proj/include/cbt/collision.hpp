#pragma once

#include <functional>
#include <iostream>
#include <string>
#include <vector>

#include "cbt/qmat.hpp"
#include "cbt/reservoir.hpp"
#include "cbt/system.hpp"

namespace cbt {

// full: H_sq = g A (x) B. resonant: H_sq = g (A_w (x) B_{-w} + A_{-w} (x) B_w).
enum class CouplingMode { full, resonant };

enum class Splitting { lie, strang };

struct MapOptions {
  bool shift_enabled{true};
  CouplingMode coupling{CouplingMode::full};
};

struct CollisionSlot {
  ReservoirQubitSpec qubit;
  ComplexMatrix a_op;
  Transition transition;
};

struct CollisionSchedule {
  std::vector<CollisionSlot> slots;
  double g{1.0};
  double t_bar{0.05};
  std::size_t periods{0};
  MapOptions options;

  std::size_t period() const { return slots.size(); }
  std::size_t total_collisions() const { return periods * slots.size(); }

  void validate() const {
    if (slots.empty()) throw InvalidParameter("slots", "schedule needs at least one slot");
    if (!(std::isfinite(t_bar) && t_bar > 0.0)) throw InvalidParameter("t_bar", "must be finite and > 0");
    if (!(std::isfinite(g) && g >= 0.0)) throw InvalidParameter("g", "must be finite and >= 0");
    for (const auto& s : slots) s.qubit.validate();
  }
};

// Operators of the space the reservoir qubit couples to (the system, or system x photons).
struct HostSpace {
  ComplexMatrix h;
  ComplexMatrix a_full;
  ComplexMatrix a_lower;  // A_omega
  ComplexMatrix a_raise;  // A_{-omega}
};

inline HostSpace host_space(const SystemModel& model, const CollisionSlot& slot) {
  if (slot.a_op.rows() != model.dim || slot.a_op.cols() != model.dim)
    throw DimensionMismatch("collision slot operator does not act on the system space");
  const BohrParts parts = bohr_decompose(slot.a_op, model, slot.qubit.omega);
  return {model.h_s, slot.a_op, parts.a_plus, parts.a_minus};
}

// One collision as a precomputed channel rho -> sum_k K_k rho K_k^dagger.
class CollisionChannel {
 public:
  CollisionChannel(const HostSpace& host, const ReservoirQubitSpec& qubit, double g, double t_bar,
                   MapOptions opts = {}) {
    qubit.validate();
    require_square(host.h, "CollisionChannel");
    const Index d = host.h.rows();
    const BiorthogonalQubit q = biorthogonalize(qubit);
    rho_q_ = boltzmann_right_state(qubit, q);
    ComplexMatrix b = coupling_operator(qubit.theta_c);
    const ShiftedCoupling sh = stability_shift(b, rho_q_);
    mu_b_ = sh.mu_b;
    ComplexMatrix h_sq;
    if (opts.coupling == CouplingMode::full) {
      if (opts.shift_enabled) b = sh.b_shifted;
      h_sq = g * kron(host.a_full, b);
    } else {
      const ResonantParts r = resonant_parts(q, b);
      h_sq = g * (kron(host.a_lower, r.b_minus) + kron(host.a_raise, r.b_plus));
    }
    const ComplexMatrix h = kron(host.h, identity(2)) + kron(identity(d), qubit_hamiltonian(qubit)) + h_sq;
    unitary_ = expm(-kI * t_bar * h);
    const auto [wa, wb] = boltzmann_weights(qubit);
    const std::pair<double, const ComplexVector*> ensemble[2] = {{wa, &q.a_right}, {wb, &q.b_right}};
    for (const auto& [w, phi] : ensemble) {
      if (w <= 0.0) continue;
      const ComplexMatrix in = kron(identity(d), ComplexMatrix(*phi));
      const ComplexMatrix u_in = unitary_ * in;
      for (Index m = 0; m < 2; ++m) {
        ComplexMatrix k(d, d);
        for (Index i = 0; i < d; ++i) k.row(i) = u_in.row(2 * i + m);
        kraus_.push_back(std::sqrt(w) * k);
      }
    }
  }

  ComplexMatrix apply(const ComplexMatrix& rho) const {
    if (rho.rows() != dim() || rho.cols() != dim()) throw DimensionMismatch("collision: state dimension mismatch");
    ComplexMatrix out = ComplexMatrix::Zero(dim(), dim());
    for (const auto& k : kraus_) out.noalias() += k * rho * k.adjoint();
    return out;
  }

  Index dim() const { return kraus_.front().rows(); }
  const std::vector<ComplexMatrix>& kraus() const { return kraus_; }
  const ComplexMatrix& unitary() const { return unitary_; }
  const ComplexMatrix& qubit_state() const { return rho_q_; }
  Complex mu_b() const { return mu_b_; }

 private:
  std::vector<ComplexMatrix> kraus_;
  ComplexMatrix unitary_;
  ComplexMatrix rho_q_;
  Complex mu_b_{0.0};
};

inline void warn_if_not_state(const ComplexMatrix& rho, const char* where) {
  if (hermiticity_error(rho) > 1e-10) {
    std::clog << "warning: " << where << ": input state is not Hermitian\n";
    return;
  }
  const ComplexMatrix herm = 0.5 * (rho + rho.adjoint());
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(herm, Eigen::EigenvaluesOnly);
  if (es.eigenvalues()(0) < -1e-10 * std::max(1.0, std::abs(rho.trace())))
    std::clog << "warning: " << where << ": input state has negative eigenvalue " << es.eigenvalues()(0) << "\n";
}

inline ComplexMatrix collide(const ComplexMatrix& rho_s, const SystemModel& model, const CollisionSlot& slot,
                             double g, double t_bar, MapOptions opts = {}) {
  warn_if_not_state(rho_s, "collide");
  return CollisionChannel(host_space(model, slot), slot.qubit, g, t_bar, opts).apply(rho_s);
}

inline HostSpace joint_host_space(const SystemModel& model, const CollisionSlot& slot, const PhotonSector& sector) {
  if (sector.system_dim() != model.dim) throw DimensionMismatch("photon sector does not match the system");
  const HostSpace sys = host_space(model, slot);
  const Index dp = sector.photon_dim();
  const ComplexMatrix ip = identity(dp);
  return {kron(model.h_s, ip) + kron(identity(model.dim), sector.h_p) + sector.h_sp, kron(sys.a_full, ip),
          kron(sys.a_lower, ip), kron(sys.a_raise, ip)};
}

// Lindblad photon loss sum_x kappa (P_x rho P_x^dagger - {P_x^dagger P_x, rho}/2) with P_x = I (x) p_x.
inline ComplexMatrix photon_dissipator(const ComplexMatrix& rho, const PhotonSector& sector) {
  if (rho.rows() != sector.h_sp.rows() || rho.cols() != sector.h_sp.cols())
    throw DimensionMismatch("photon_dissipator: state is not on the system x photon space");
  ComplexMatrix out = ComplexMatrix::Zero(rho.rows(), rho.cols());
  for (const ComplexMatrix* p : {&sector.p1, &sector.p2}) {
    const ComplexMatrix l = sector.lift(*p);
    const ComplexMatrix n = l.adjoint() * l;
    out += sector.kappa * (l * rho * l.adjoint() - 0.5 * (n * rho + rho * n));
  }
  return out;
}

inline ComplexMatrix photon_step(const ComplexMatrix& rho, const PhotonSector& sector, double dt) {
  if (sector.kappa == 0.0) return rho;
  return rho + dt * photon_dissipator(rho, sector);
}

inline ComplexMatrix collide_joint(const ComplexMatrix& rho_sp, const SystemModel& model, const CollisionSlot& slot,
                                   double g, double t_bar, const PhotonSector& sector, MapOptions opts = {},
                                   Splitting split = Splitting::lie) {
  const CollisionChannel ch(joint_host_space(model, slot, sector), slot.qubit, g, t_bar, opts);
  if (split == Splitting::lie) return photon_step(ch.apply(rho_sp), sector, t_bar);
  return photon_step(ch.apply(photon_step(rho_sp, sector, 0.5 * t_bar)), sector, 0.5 * t_bar);
}

// Periodic collision engine: slot (n mod N_q) acts at step n. Exactly N_q channels are built.
class CollisionEngine {
 public:
  CollisionEngine(const SystemModel& model, const CollisionSchedule& schedule) {
    schedule.validate();
    for (const auto& s : schedule.slots)
      channels_.emplace_back(host_space(model, s), s.qubit, schedule.g, schedule.t_bar, schedule.options);
  }
  CollisionEngine(const SystemModel& model, const CollisionSchedule& schedule, const PhotonSector& sector,
                  Splitting split = Splitting::lie)
      : sector_(sector), split_(split), joint_(true) {
    schedule.validate();
    for (const auto& s : schedule.slots)
      channels_.emplace_back(joint_host_space(model, s, sector), s.qubit, schedule.g, schedule.t_bar,
                             schedule.options);
    t_bar_ = schedule.t_bar;
  }

  std::size_t period() const { return channels_.size(); }
  const CollisionChannel& channel(std::size_t l) const { return channels_.at(l); }

  ComplexMatrix step(const ComplexMatrix& rho, std::size_t n) const {
    const CollisionChannel& ch = channels_[n % channels_.size()];
    if (!joint_) return ch.apply(rho);
    if (split_ == Splitting::lie) return photon_step(ch.apply(rho), sector_, t_bar_);
    return photon_step(ch.apply(photon_step(rho, sector_, 0.5 * t_bar_)), sector_, 0.5 * t_bar_);
  }

 private:
  std::vector<CollisionChannel> channels_;
  PhotonSector sector_;
  Splitting split_{Splitting::lie};
  bool joint_{false};
  double t_bar_{0.0};
};

struct Observable {
  std::string name;
  std::function<double(const ComplexMatrix&)> eval;
};

struct RecorderSpec {
  std::size_t stride{1};
  std::vector<Observable> observables;
  bool keep_states{false};
};

struct Trajectory {
  double t_bar{0.0};
  std::vector<std::size_t> steps;
  std::vector<double> times;
  std::vector<double> traces;
  std::vector<std::string> names;
  std::vector<std::vector<double>> series;
  std::vector<ComplexMatrix> states;
  ComplexMatrix final_state;
  std::size_t final_step{0};

  std::size_t size() const { return steps.size(); }

  const std::vector<double>& column(const std::string& name) const {
    for (std::size_t k = 0; k < names.size(); ++k)
      if (names[k] == name) return series[k];
    throw std::out_of_range("trajectory has no column " + name);
  }

  void add_column(std::string name, std::vector<double> values) {
    if (values.size() != steps.size()) throw DimensionMismatch("trajectory column length mismatch");
    names.push_back(std::move(name));
    series.push_back(std::move(values));
  }
};

// Iterates a periodic stepper from step `first_step`, recording every `stride` steps and at the end.
template <class Stepper>
Trajectory propagate(const ComplexMatrix& rho0, const Stepper& stepper, std::size_t steps, double t_bar,
                     const RecorderSpec& rec, std::size_t first_step = 0) {
  if (rec.stride == 0) throw InvalidParameter("stride", "must be >= 1");
  Trajectory tr;
  tr.t_bar = t_bar;
  for (const auto& o : rec.observables) tr.names.push_back(o.name);
  tr.series.resize(rec.observables.size());
  auto record = [&](std::size_t n, const ComplexMatrix& rho) {
    if (!rho.allFinite()) throw NumericFailure("propagation produced non-finite state at step " + std::to_string(n));
    tr.steps.push_back(n);
    tr.times.push_back(static_cast<double>(n) * t_bar);
    tr.traces.push_back(rho.trace().real());
    for (std::size_t k = 0; k < rec.observables.size(); ++k) tr.series[k].push_back(rec.observables[k].eval(rho));
    if (rec.keep_states) tr.states.push_back(rho);
  };
  ComplexMatrix rho = rho0;
  record(0, rho);
  for (std::size_t n = 0; n < steps; ++n) {
    rho = stepper.step(rho, first_step + n);
    if (n + 1 == steps || (n + 1) % rec.stride == 0) record(n + 1, rho);
  }
  if (!rho.allFinite()) throw NumericFailure("propagation produced non-finite state");
  tr.final_state = rho;
  tr.final_step = steps;
  return tr;
}

inline Trajectory run_collisions(const ComplexMatrix& rho0, const SystemModel& model, const CollisionSchedule& schedule,
                                 const RecorderSpec& rec) {
  const CollisionEngine engine(model, schedule);
  return propagate(rho0, engine, schedule.total_collisions(), schedule.t_bar, rec);
}

// Choi matrix sum_ij |i><j| (x) Phi(|i><j|) of a linear map on d x d matrices.
template <class Map>
ComplexMatrix choi_matrix(const Map& phi, Index d) {
  ComplexMatrix c = ComplexMatrix::Zero(d * d, d * d);
  for (Index i = 0; i < d; ++i)
    for (Index j = 0; j < d; ++j) c += kron(basis_projector(d, i, j), phi(basis_projector(d, i, j)));
  return c;
}

}  // namespace cbt
