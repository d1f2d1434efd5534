#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <functional>
#include <limits>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "cbt/collision.hpp"
#include "cbt/config.hpp"
#include "cbt/observables.hpp"
#include "cbt/qme.hpp"
#include "cbt/reservoir.hpp"
#include "cbt/spectral.hpp"
#include "cbt/system.hpp"

namespace cbt {

struct SlotConstants {
  Transition transition;
  ReservoirQubitSpec qubit;
  SpectralData spectral;
  KmsResult kms;
  Complex mu_b{0.0};
};

struct ScenarioSetup {
  SystemModel model;
  CollisionSchedule schedule;
  std::optional<PhotonSector> photons;
  std::vector<SlotConstants> constants;
  ComplexMatrix rho0;
};

inline double qs_other_angle(double theta_q) { return std::asin(std::tanh(theta_q)); }

inline SlotConstants slot_constants(const CollisionSlot& slot) {
  SlotConstants k;
  k.transition = slot.transition;
  k.qubit = slot.qubit;
  const BiorthogonalQubit q = biorthogonalize(slot.qubit);
  k.spectral = spectral_functions(slot.qubit, q, coupling_operator(slot.qubit.theta_c));
  k.kms = modified_kms(k.spectral, slot.qubit.omega, slot.qubit.beta);
  k.mu_b = stability_shift(coupling_operator(slot.qubit.theta_c), boltzmann_right_state(slot.qubit, q)).mu_b;
  return k;
}

inline void finish_setup(ScenarioSetup& s, const ScenarioConfig& c) {
  s.schedule.g = c.g;
  s.schedule.t_bar = c.t_bar;
  s.schedule.periods = c.steps / std::max<std::size_t>(1, s.schedule.slots.size());
  s.schedule.options = {c.shift, c.coupling};
  s.schedule.validate();
  for (const auto& slot : s.schedule.slots) s.constants.push_back(slot_constants(slot));
}

inline ComplexMatrix level_state(const SystemModel& m, int level) {
  const ComplexVector v = m.eigenvectors.col(level);
  return v * v.adjoint();
}

inline ScenarioSetup single_qubit_setup(const ScenarioConfig& c) {
  ScenarioSetup s;
  ComplexMatrix h = ComplexMatrix::Zero(2, 2);
  h(1, 1) = c.omega;
  s.model = make_model(h, pauli_x(), {"-", "+"});
  s.schedule.slots.push_back({{c.omega, c.theta_q, c.beta, c.theta_c}, pauli_x(), s.model.transitions.front()});
  finish_setup(s, c);
  s.rho0 = level_state(s.model, c.initial.level);
  return s;
}

inline ScenarioSetup dichromatic_setup(const ScenarioConfig& c) {
  ScenarioSetup s;
  s.model = three_level_model(c.omega_10, c.omega_21);
  for (const auto& t : s.model.transitions)
    s.schedule.slots.push_back({{t.omega, c.theta_q, c.beta, c.theta_c}, s.model.coupling, t});
  s.photons = photon_sector(c.omega_21, c.omega_10, c.cutoff, c.g_int, c.kappa);
  finish_setup(s, c);
  const Index dp = s.photons->photon_dim();
  s.rho0 = kron(level_state(s.model, c.initial.level), basis_projector(dp, 0, 0));
  return s;
}

inline ComplexVector spin_state(double angle) {
  ComplexVector v(2);
  v << std::cos(angle / 2), std::sin(angle / 2);
  return v;
}

inline ScenarioSetup qs_setup(const ScenarioConfig& c) {
  ScenarioSetup s;
  s.model = two_spin_model(c.J, c.h_x, c.h_z);
  for (const auto& t : s.model.transitions) {
    const double theta_c = (t.lower == 0 && t.upper == 1) ? c.phi0 : qs_other_angle(c.theta_q);
    s.schedule.slots.push_back({{t.omega, c.theta_q, c.beta, theta_c}, s.model.coupling, t});
  }
  finish_setup(s, c);
  const ComplexVector psi = kron(ComplexMatrix(spin_state(c.initial.spin1_angle)),
                                 ComplexMatrix(spin_state(c.initial.spin2_angle)));
  s.rho0 = psi * psi.adjoint();
  return s;
}

inline ScenarioSetup make_setup(const ScenarioConfig& c) {
  switch (c.scenario) {
    case ScenarioKind::single_qubit: return single_qubit_setup(c);
    case ScenarioKind::dichromatic: return dichromatic_setup(c);
    case ScenarioKind::qs:
    case ScenarioKind::phase_scan:
    case ScenarioKind::bench: return qs_setup(c);
  }
  throw ConfigError("scenario", "unsupported scenario");
}

inline std::vector<GeneratorSlot> qme_slots(const ScenarioSetup& s) {
  std::vector<GeneratorSlot> out;
  for (std::size_t l = 0; l < s.schedule.slots.size(); ++l) {
    GeneratorSlot gen =
        qme_generator(s.model, s.schedule.slots[l], s.constants[l].spectral, s.schedule.g, s.schedule.t_bar);
    out.push_back(s.photons ? lift_to_photons(gen, *s.photons) : gen);
  }
  return out;
}

inline CollisionEngine make_collision_engine(const ScenarioSetup& s, const ScenarioConfig& c) {
  if (s.photons) return CollisionEngine(s.model, s.schedule, *s.photons, c.splitting);
  return CollisionEngine(s.model, s.schedule);
}

inline QmeEngine make_qme_engine(const ScenarioSetup& s, const ScenarioConfig& c) {
  return QmeEngine(qme_slots(s), c.t_bar, c.integrator, c.substeps);
}

inline std::vector<std::string> engine_names(EngineKind e) {
  if (e == EngineKind::both) return {"collision", "qme"};
  return {enum_name(e)};
}

// Runs `fn(engine)` with the stepper selected by name.
template <class Fn>
auto with_engine(const ScenarioSetup& s, const ScenarioConfig& c, const std::string& name, Fn&& fn) {
  if (name == "collision") return fn(make_collision_engine(s, c));
  return fn(make_qme_engine(s, c));
}

struct EngineRun {
  std::string engine;
  Trajectory traj;
};

// ---------------------------------------------------------------- single qubit

struct SingleQubitResult {
  ScenarioSetup setup;
  std::vector<EngineRun> runs;
};

inline SingleQubitResult single_qubit_run(const ScenarioConfig& c) {
  SingleQubitResult r{single_qubit_setup(c), {}};
  const SpectralData sd = r.setup.constants.front().spectral;
  RecorderSpec rec;
  rec.stride = c.stride;
  auto pop = [](const ComplexMatrix& rho, Index k) { return (rho(k, k) / rho.trace()).real(); };
  rec.observables = {{"p_plus", [=](const ComplexMatrix& rho) { return pop(rho, 1); }},
                     {"p_minus", [=](const ComplexMatrix& rho) { return pop(rho, 0); }},
                     {"flux", [=](const ComplexMatrix& rho) {
                        return pme_reduce(sd, std::max(0.0, pop(rho, 1)), std::max(0.0, pop(rho, 0))).flux;
                      }}};
  for (const auto& name : engine_names(c.engine)) {
    Trajectory t = with_engine(r.setup, c, name, [&](const auto& eng) {
      return propagate(r.setup.rho0, eng, c.steps, c.t_bar, rec);
    });
    r.runs.push_back({name, std::move(t)});
  }
  return r;
}

// ---------------------------------------------------------------- dichromatic emission

struct DichromaticResult {
  ScenarioSetup setup;
  std::vector<EngineRun> runs;
  std::vector<std::vector<G2Curve>> g2;  // per run: pairs 11, 22, 12
};

inline std::vector<std::size_t> lag_grid(const G2Spec& s) {
  std::vector<std::size_t> lags;
  for (std::size_t l = 0; l <= s.max_lag; l += s.lag_stride) lags.push_back(l);
  if (lags.back() != s.max_lag) lags.push_back(s.max_lag);
  return lags;
}

inline DichromaticResult dichromatic_run(const ScenarioConfig& c, bool with_g2 = true) {
  DichromaticResult r{dichromatic_setup(c), {}, {}};
  const PhotonSector ps = *r.setup.photons;
  const ComplexMatrix l1 = ps.lift(ps.p1), l2 = ps.lift(ps.p2);
  const ComplexMatrix n1 = l1.adjoint() * l1, n2 = l2.adjoint() * l2;
  RecorderSpec rec;
  rec.stride = c.stride;
  rec.observables = {{"n1", [=](const ComplexMatrix& rho) { return expval(rho, n1); }},
                     {"n2", [=](const ComplexMatrix& rho) { return expval(rho, n2); }}};
  const std::vector<std::size_t> lags = lag_grid(c.g2);
  for (const auto& name : engine_names(c.engine)) {
    std::vector<G2Curve> curves;
    Trajectory t = with_engine(r.setup, c, name, [&](const auto& eng) {
      Trajectory tr = propagate(r.setup.rho0, eng, c.steps, c.t_bar, rec);
      if (with_g2) {
        const std::pair<const char*, std::pair<const ComplexMatrix*, const ComplexMatrix*>> pairs[] = {
            {"11", {&l1, &l1}}, {"22", {&l2, &l2}}, {"12", {&l1, &l2}}};
        for (const auto& [label, ops] : pairs) {
          G2Curve cv = g2(tr.final_state, *ops.first, *ops.second, lags, eng, tr.final_step, c.g2.ordering);
          cv.pair = label;
          curves.push_back(std::move(cv));
        }
      }
      return tr;
    });
    r.runs.push_back({name, std::move(t)});
    r.g2.push_back(std::move(curves));
  }
  return r;
}

// ---------------------------------------------------------------- quantum synchronization

struct QsRun {
  std::string engine;
  Trajectory traj;  // every step: sx1, sx2, bloch_x, bloch_y, bloch_z
  double c12{std::numeric_limits<double>::quiet_NaN()};
  double amplitude{0.0};
};

struct QsResult {
  ScenarioSetup setup;
  std::vector<QsRun> runs;
  std::vector<double> deviation;  // |sx1_collision - sx1_qme| per step when both engines ran
  double max_deviation{std::numeric_limits<double>::quiet_NaN()};
};

inline RecorderSpec qs_recorder() {
  RecorderSpec rec;
  rec.stride = 1;
  rec.observables = {{"sx1", [](const ComplexMatrix& r) { return expval(r, two_spin_op('x', 0)); }},
                     {"sx2", [](const ComplexMatrix& r) { return expval(r, two_spin_op('x', 1)); }},
                     {"bloch_x", [](const ComplexMatrix& r) { return expval(r, two_spin_op('x', 0)); }},
                     {"bloch_y", [](const ComplexMatrix& r) { return expval(r, two_spin_op('y', 0)); }},
                     {"bloch_z", [](const ComplexMatrix& r) { return expval(r, two_spin_op('z', 0)); }}};
  return rec;
}

inline double safe_pearson(const std::vector<double>& a, const std::vector<double>& b, std::size_t window) {
  try {
    return pearson(a, b, window);
  } catch (const ZeroVariance&) {
    return std::numeric_limits<double>::quiet_NaN();
  }
}

inline QsResult qs_run(const ScenarioConfig& c) {
  QsResult r{qs_setup(c), {}, {}, std::numeric_limits<double>::quiet_NaN()};
  const RecorderSpec rec = qs_recorder();
  for (const auto& name : engine_names(c.engine)) {
    QsRun run;
    run.engine = name;
    run.traj = with_engine(r.setup, c, name, [&](const auto& eng) {
      return propagate(r.setup.rho0, eng, c.steps, c.t_bar, rec);
    });
    const auto& s1 = run.traj.column("sx1");
    const auto& s2 = run.traj.column("sx2");
    const std::size_t w = std::min(c.window, s1.size());
    if (w >= 2) run.c12 = safe_pearson(s1, s2, w);
    run.amplitude = oscillation_amplitude(s1, c.window);
    r.runs.push_back(std::move(run));
  }
  if (r.runs.size() == 2) {
    const auto& a = r.runs[0].traj.column("sx1");
    const auto& b = r.runs[1].traj.column("sx1");
    r.max_deviation = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
      r.deviation.push_back(std::abs(a[k] - b[k]));
      r.max_deviation = std::max(r.max_deviation, r.deviation.back());
    }
  }
  return r;
}

// Trailing-window Pearson coefficient evaluated at every `stride`-th sample (NaN until the window fills).
inline std::vector<double> rolling_pearson(const std::vector<double>& a, const std::vector<double>& b,
                                           std::size_t window, const std::vector<std::size_t>& at) {
  std::vector<double> out;
  for (std::size_t k : at) {
    if (k + 1 < window) {
      out.push_back(std::numeric_limits<double>::quiet_NaN());
      continue;
    }
    try {
      out.push_back(pearson(a, b, k + 1 - window, window));
    } catch (const ZeroVariance&) {
      out.push_back(std::numeric_limits<double>::quiet_NaN());
    }
  }
  return out;
}

// ---------------------------------------------------------------- phase scan

struct ScanRow {
  std::size_t grid_index{0};
  double phi0{0}, temperature{0}, beta{0};
  double amplitude{0};
  double c12{std::numeric_limits<double>::quiet_NaN()};
};

struct ScanPoint {
  std::size_t grid_index;
  double phi0, temperature;
};

inline std::vector<ScanPoint> scan_grid(const ScenarioConfig& c) {
  std::vector<ScanPoint> pts;
  std::size_t k = 0;
  for (double t : c.scan.temperature.points())
    for (double p : c.scan.phi0.points()) pts.push_back({k++, p, t});
  return pts;
}

inline double beta_for_temperature(double t, const ScanSpec& s) { return t > 0.0 ? 1.0 / t : s.zero_temperature_beta; }

inline ScanRow scan_point(const ScenarioConfig& base, const ScanPoint& p) {
  ScenarioConfig c = base;
  c.scenario = ScenarioKind::qs;
  c.phi0 = p.phi0;
  c.beta = beta_for_temperature(p.temperature, base.scan);
  if (c.engine == EngineKind::both) c.engine = EngineKind::qme;
  const QsResult r = qs_run(c);
  return {p.grid_index, p.phi0, p.temperature, c.beta, r.runs.front().amplitude, r.runs.front().c12};
}

// Evaluates all grid points not in `skip` on `workers` threads; rows come back sorted by grid index.
inline std::vector<ScanRow> phase_scan(const ScenarioConfig& c, unsigned workers = 1,
                                       const std::set<std::size_t>& skip = {},
                                       const std::function<void(const ScanRow&)>& on_row = {}) {
  std::vector<ScanPoint> todo;
  for (const auto& p : scan_grid(c))
    if (!skip.count(p.grid_index)) todo.push_back(p);
  std::vector<ScanRow> rows(todo.size());
  std::atomic<std::size_t> next{0};
  std::mutex mu;
  std::exception_ptr failure;
  auto worker = [&] {
    for (;;) {
      const std::size_t k = next.fetch_add(1);
      if (k >= todo.size()) return;
      try {
        rows[k] = scan_point(c, todo[k]);
        if (on_row) {
          std::lock_guard<std::mutex> lock(mu);
          on_row(rows[k]);
        }
      } catch (...) {
        std::lock_guard<std::mutex> lock(mu);
        if (!failure) failure = std::current_exception();
        next = todo.size();
      }
    }
  };
  const unsigned n = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(std::max<std::size_t>(1, todo.size()))));
  std::vector<std::thread> pool;
  for (unsigned k = 1; k < n; ++k) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
  std::sort(rows.begin(), rows.end(), [](const ScanRow& a, const ScanRow& b) { return a.grid_index < b.grid_index; });
  return rows;
}

// ---------------------------------------------------------------- collision map vs QME

struct BenchRow {
  double sweep_value{0};
  double max_dev{0};
};

inline BenchRow bench_point(const ScenarioConfig& base, double value) {
  ScenarioConfig c = base;
  c.scenario = ScenarioKind::qs;
  c.engine = EngineKind::both;
  if (base.sweep.parameter == "g")
    c.g = value;
  else
    c.t_bar = value;
  validate(c);
  return {value, qs_run(c).max_deviation};
}

inline std::vector<BenchRow> benchmark_map_vs_qme(const ScenarioConfig& c, const std::set<double>& skip = {},
                                                  const std::function<void(const BenchRow&)>& on_row = {}) {
  std::vector<BenchRow> rows;
  for (double v : c.sweep.values) {
    if (skip.count(v)) continue;
    rows.push_back(bench_point(c, v));
    if (on_row) on_row(rows.back());
  }
  return rows;
}

// ---------------------------------------------------------------- spectrum

struct SpectrumReport {
  std::string source;
  LiouvillianMatrix liouvillian;
  LepReport lep;
  bool defective{false};
  double condition{0.0};
};

inline SpectrumReport spectrum_analysis(const ScenarioConfig& c) {
  const ScenarioSetup s = make_setup(c);
  const std::vector<GeneratorSlot> slots = qme_slots(s);
  SpectrumReport r;
  r.source = enum_name(c.spectrum.source);
  switch (c.spectrum.source) {
    case SpectrumSource::average: r.liouvillian = vectorize(period_average(slots), "average"); break;
    case SpectrumSource::composite: r.liouvillian = composite_liouvillian(slots, c.t_bar); break;
    case SpectrumSource::slot:
      if (c.spectrum.slot >= slots.size()) throw ConfigError("spectrum.slot", "index out of range");
      r.liouvillian = vectorize(slots[c.spectrum.slot], "slot");
      break;
  }
  r.lep = lep_detect(r.liouvillian, c.spectrum.tol_cluster, c.spectrum.tol_rank);
  try {
    const BiorthogonalEigensystem es = eig_biorthogonal(r.liouvillian.matrix);
    ComplexMatrix rights(r.liouvillian.matrix.rows(), static_cast<Index>(es.size()));
    for (std::size_t k = 0; k < es.size(); ++k) rights.col(static_cast<Index>(k)) = es.rights[k];
    r.condition = condition_number(rights);
  } catch (const DefectiveMatrix& e) {
    r.defective = true;
    r.condition = e.condition_number();
  }
  return r;
}

}  // namespace cbt
