#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <limits>
#include <random>
#include <sstream>
#include <string>

#include "cbt/collision.hpp"
#include "cbt/config.hpp"
#include "cbt/observables.hpp"
#include "cbt/qme.hpp"
#include "cbt/reservoir.hpp"
#include "cbt/scenarios.hpp"
#include "cbt/spectral.hpp"

using namespace cbt;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Outcome {
  bool pass{true};
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " [failed: " << what << "]";
    }
  }
};

ComplexMatrix random_matrix(Index d, unsigned seed) {
  std::mt19937 gen(seed);
  std::normal_distribution<double> n(0.0, 1.0);
  ComplexMatrix a(d, d);
  for (Index i = 0; i < d; ++i)
    for (Index j = 0; j < d; ++j) a(i, j) = Complex(n(gen), n(gen));
  return a;
}

ComplexMatrix random_state(Index d, unsigned seed) {
  const ComplexMatrix a = random_matrix(d, seed);
  const ComplexMatrix r = a * a.adjoint();
  return r / r.trace();
}

SystemModel qubit_model(double omega) {
  ComplexMatrix h = ComplexMatrix::Zero(2, 2);
  h(1, 1) = omega;
  return make_model(h, pauli_x());
}

CollisionSlot slot_for(const SystemModel& m, std::size_t k, double theta_q, double beta, double theta_c) {
  const Transition& t = m.transitions.at(k);
  return {{t.omega, theta_q, beta, theta_c}, m.coupling, t};
}

// Rates from scalar matrix elements: B_ab = s + c sinh(t), B_ba = s - c sinh(t).
struct ScalarRates {
  double gp, gbp, gm, gbm, bab, bba, wa, wb;
};

ScalarRates scalar_rates(double omega, double theta_q, double beta, double theta_c) {
  const double s = std::sin(theta_c), c = std::cos(theta_c);
  const double bab = s + c * std::sinh(theta_q), bba = s - c * std::sinh(theta_q);
  const double wa = 1.0 / (1.0 + std::exp(beta * omega)), wb = 1.0 - wa;
  return {wb * bab * bba, wb * bab * bab, wa * bab * bba, wa * bba * bba, bab, bba, wa, wb};
}

double rel(double x, double y) { return std::abs(x - y) / std::max(1.0, std::abs(y)); }

double min_choi_eigenvalue(const std::function<ComplexMatrix(const ComplexMatrix&)>& lambda, Index d) {
  const ComplexMatrix c = choi_matrix(lambda, d);
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(0.5 * (c + c.adjoint()), Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

double c12(const ScenarioConfig& c) { return qs_run(c).runs.front().c12; }

// ---------------------------------------------------------------- criteria

Outcome criterion_1() {
  Outcome o;
  const double omegas[] = {0.5, 1.0, 2.0, 3.0, 5.0};
  const double betas[] = {0.25, 0.5, 1.0, 2.0, 4.0};
  const double thetas[] = {0.3, 0.7, 1.1, 1.5, 2.5};
  double max_rate = 0.0, max_beta = 0.0;
  for (double w : omegas)
    for (double b : betas)
      for (double tc : thetas) {
        const SpectralData d = spectral_functions({w, 0.0, b, tc});
        max_rate = std::max({max_rate, std::abs(d.gamma_plus - d.gammabar_plus),
                             std::abs(d.gamma_minus - d.gammabar_minus)});
        max_beta = std::max(max_beta, d.beta_bar ? std::abs(*d.beta_bar - b) : kInf);
      }
  o.require(max_rate <= 1e-12, "gamma == gammabar to 1e-12");
  o.require(max_beta <= 1e-10, "beta_bar == beta to 1e-10");

  // omega * t_bar = pi so the counter-rotating part of the full coupling averages out within a collision.
  const double omega = 20 * kPi, beta = 1.0 / omega;
  const SystemModel m = qubit_model(omega);
  CollisionSchedule sched;
  sched.slots = {slot_for(m, 0, 0.0, beta, kPi / 2)};
  sched.g = 0.3;
  sched.t_bar = 0.05;
  sched.periods = 50000;
  const CollisionEngine eng(m, sched);
  ComplexMatrix rho = basis_projector(2, 0, 0);
  for (std::size_t n = 0; n < sched.total_collisions(); ++n) rho = eng.step(rho, n);
  const double ratio = rho(1, 1).real() / rho(0, 0).real(), target = std::exp(-beta * omega);
  o.require(std::abs(ratio - target) <= 1e-4, "map stationary ratio within 1e-4");
  o.detail << "max|gamma-gammabar|=" << max_rate << " max|beta_bar-beta|=" << max_beta << " ratio=" << ratio
           << " target=" << target;
  return o;
}

Outcome criterion_2() {
  Outcome o;
  double worst = 0.0;
  int checked = 0;
  for (double tq : {0.25, 0.55, 1.0})
    for (double tc : {0.0, kPi / 6, kPi / 3})
      for (double b : {0.5, 1.0, 2.0}) {
        const ReservoirQubitSpec spec{1.0, tq, b, tc};
        const SpectralData d = spectral_functions(spec);
        if (std::abs(d.gamma_plus) < 1e-14) continue;
        const ScalarRates s = scalar_rates(1.0, tq, b, tc);
        const double eta_rates = d.gammabar_minus / d.gamma_plus;
        const double eta_elements = std::exp(-b) * s.bba / s.bab;
        const KmsResult k = modified_kms(d, spec.omega, spec.beta);
        double err = rel(eta_rates, eta_elements);
        if (k.status == KmsStatus::ok) {
          err = std::max(err, rel(std::exp(-*k.beta_bar), eta_elements));
        } else if (eta_elements > 0.0) {
          err = kInf;
        }
        worst = std::max(worst, err);
        ++checked;
      }
  o.require(checked > 0 && worst <= 1e-10, "three eta expressions agree to 1e-10");
  o.detail << "points=" << checked << " max_rel_err=" << worst;
  return o;
}

Outcome criterion_3() {
  Outcome o;
  const SystemModel m = qubit_model(1.0);
  const CollisionSlot s = slot_for(m, 0, kPi / 6, 1.0, kPi / 3);
  const SpectralData d = spectral_functions(s.qubit);
  const QmeEngine eng({qme_generator(m, s, d, 1.0, 0.05)}, 0.05, Integrator::exact);
  ComplexMatrix rho = basis_projector(2, 0, 0);
  for (std::size_t n = 0; n < 50000; ++n) rho = eng.step(rho, n);
  const double tr = rho.trace().real();
  const double flux = pme_reduce(d, rho(1, 1).real() / tr, rho(0, 0).real() / tr).flux;
  o.require(std::abs(flux) < 1e-8, "|J| < 1e-8");
  o.detail << "|J|=" << std::abs(flux);
  return o;
}

Outcome criterion_4() {
  Outcome o;
  double worst = 0.0;
  int points = 0;
  for (double w : {0.5, 1.0, 2.0})
    for (double tq : {0.0, 0.25, 0.55, 1.0, 1.5})
      for (double tc : {0.0, kPi / 6, kPi / 3, kPi / 2, 2.0})
        for (double b : {0.0, 0.5, 1.0, 2.0, kInf}) {
          const ReservoirQubitSpec spec{w, tq, b, tc};
          const BiorthogonalQubit q = biorthogonalize(spec);
          const ComplexMatrix bop = coupling_operator(tc);
          try {
            const SpectralData d = spectral_functions(spec, q, bop);
            const ScalarRates s = scalar_rates(w, tq, b, tc);
            const double wa = std::isinf(b) ? 0.0 : s.wa, wb = 1.0 - wa;
            worst = std::max({worst, rel(d.gamma_plus, wb * s.bab * s.bba), rel(d.gammabar_plus, wb * s.bab * s.bab),
                              rel(d.gamma_minus, wa * s.bab * s.bba), rel(d.gammabar_minus, wa * s.bba * s.bba)});
          } catch (const ClosedFormMismatch&) {
            worst = kInf;
          }
          ++points;
        }
  o.require(worst <= 1e-10, "closed form and trace path agree to 1e-10");
  o.detail << "points=" << points << " max_rel_err=" << worst;
  return o;
}

Outcome criterion_5() {
  Outcome o;
  ScenarioConfig c = defaults_for(ScenarioKind::bench);
  c.sweep = {"g", {1.0, 0.5, 0.25}};
  const auto by_g = benchmark_map_vs_qme(c);
  c.sweep = {"t_bar", {0.2, 0.1, 0.05}};
  const auto by_t = benchmark_map_vs_qme(c);
  const bool decreasing = by_g[0].max_dev > by_g[1].max_dev && by_g[1].max_dev > by_g[2].max_dev;
  o.require(decreasing, "deviation strictly decreases in g");
  o.require(by_t[2].max_dev >= 0.5 * by_t[0].max_dev, "t_bar sweep does not drive deviation to zero");
  o.detail << "g-sweep dev=" << by_g[0].max_dev << "," << by_g[1].max_dev << "," << by_g[2].max_dev
           << " t_bar-sweep dev=" << by_t[0].max_dev << "," << by_t[1].max_dev << "," << by_t[2].max_dev;
  return o;
}

Outcome criterion_6() {
  Outcome o;
  ScenarioConfig c = defaults_for(ScenarioKind::dichromatic);
  c.stride = 10;
  const DichromaticResult r = dichromatic_run(c);
  const Trajectory& t = r.runs.front().traj;
  double sat = 0.0;
  for (const char* col : {"n1", "n2"}) {
    const auto& v = t.column(col);
    const std::size_t k0 = (9 * (v.size() - 1)) / 10;
    sat = std::max(sat, std::abs(v.back() - v[k0]) / std::abs(v.back()));
  }
  const G2Curve& g12 = r.g2.front().at(2);
  const double small = g12.values.front(), large = g12.values.back();
  o.require(sat < 0.01, "n1 and n2 saturate within 1%");
  o.require(small > 2.0, "G12 at zero lag > 2");
  o.require(large < 1.0, "G12 at the largest lag < 1");

  std::vector<double> trend;
  for (double tq : {0.1, 0.3, 0.5}) {
    ScenarioConfig s = c;
    s.theta_q = tq;
    s.g2.max_lag = 0;
    trend.push_back(dichromatic_run(s).g2.front().at(2).values.front());
  }
  o.require(trend[0] < trend[1] && trend[1] < trend[2], "small-lag G12 increases over theta_q");
  o.detail << "saturation=" << sat << " G12(0)=" << small << " G12(" << c.g2.max_lag << ")=" << large
           << " trend=" << trend[0] << "," << trend[1] << "," << trend[2];
  return o;
}

Outcome criterion_7() {
  Outcome o;
  const ScenarioConfig base = defaults_for(ScenarioKind::qs);
  const double def = c12(base);
  ScenarioConfig anti = base;
  anti.J = -0.2;
  const double neg = c12(anti);
  o.require(def >= 0.99, "default C12 >= 0.99");
  o.require(neg <= -0.99, "J=-0.2 C12 <= -0.99");
  o.detail << "default=" << def << " J=-0.2:" << neg;
  for (double a : {2 * kPi / 3, kPi / 3, 0.0}) {
    ScenarioConfig v = base;
    v.initial.spin2_angle = a;
    const double x = c12(v);
    o.require(x >= 0.99, "initial-state variant C12 >= 0.99");
    o.detail << " angle=" << a << ":" << x;
  }
  return o;
}

Outcome criterion_8() {
  Outcome o;
  ScenarioConfig c = defaults_for(ScenarioKind::phase_scan);
  c.scenario = ScenarioKind::qs;
  c.beta = c.scan.zero_temperature_beta;
  const double cold = qs_run(c).runs.front().amplitude;
  c.beta = 1.0;
  const double warm = qs_run(c).runs.front().amplitude;
  o.require(cold < 1e-3, "amplitude at beta=50 < 1e-3");
  o.require(warm > 1e-2, "amplitude at the default point > 1e-2");
  o.detail << "amplitude(beta=50)=" << cold << " amplitude(beta=1)=" << warm;
  return o;
}

Outcome criterion_9() {
  Outcome o;
  for (Index n : {2, 3, 4}) {
    ComplexMatrix j = ComplexMatrix::Zero(n, n);
    for (Index k = 0; k + 1 < n; ++k) j(k, k + 1) = 1.0;
    o.require(lep_detect({0, j, "jordan"}).max_order() == n, "Jordan block order");
  }
  ScenarioConfig c = defaults_for(ScenarioKind::qs);
  c.theta_q = std::atanh(std::sin(kPi / 3));
  const int order = spectrum_analysis(c).lep.max_order();
  o.require(order == 4, "fourth-order coalescence");
  c.theta_q = 0.55;
  const LepReport r = spectrum_analysis(c).lep;
  const bool pair = r.oscillation && r.oscillation->dominant && r.oscillation->upper.imag() > 1e-6 &&
                    std::abs(r.oscillation->lower - std::conj(r.oscillation->upper)) < 1e-8;
  o.require(pair, "dominant conjugate oscillation pair at theta_q=0.55");
  o.detail << "lep_order=" << order;
  if (r.oscillation) o.detail << " oscillation=" << r.oscillation->upper.real() << "+-" << r.oscillation->upper.imag() << "i";
  return o;
}

Outcome criterion_10() {
  Outcome o;
  // Complete positivity of the one-collision channel.
  double min_eig = kInf;
  const SystemModel q = qubit_model(1.0), t = three_level_model(1.0, 1.4);
  for (CouplingMode mode : {CouplingMode::full, CouplingMode::resonant})
    for (double tq : {0.0, 0.55, 1.0}) {
      const MapOptions opts{true, mode};
      const CollisionSlot sq = slot_for(q, 0, tq, 1.0, kPi / 3);
      const CollisionChannel cq(host_space(q, sq), sq.qubit, 1.0, 0.2, opts);
      min_eig = std::min(min_eig, min_choi_eigenvalue([&](const ComplexMatrix& x) { return cq.apply(x); }, 2));
      for (std::size_t k = 0; k < t.transitions.size(); ++k) {
        const CollisionSlot st = slot_for(t, k, tq, 1.0, kPi / 3);
        const CollisionChannel ct(host_space(t, st), st.qubit, 1.0, 0.2, opts);
        min_eig = std::min(min_eig, min_choi_eigenvalue([&](const ComplexMatrix& x) { return ct.apply(x); }, 3));
      }
    }
  o.require(min_eig >= -1e-10, "Choi matrices are PSD");

  // Linear-algebra property suites.
  double err = 0.0;
  const ComplexMatrix a = random_matrix(2, 1), b = random_matrix(3, 2), c = random_matrix(2, 3), d = random_matrix(3, 4);
  err = std::max(err, (kron(a, b) * kron(c, d) - kron(a * c, b * d)).cwiseAbs().maxCoeff());
  const ComplexMatrix r1 = random_state(2, 5), r2 = random_state(3, 6);
  err = std::max(err, (partial_trace(kron(r1, r2), {2, 3}, 0) - r1).cwiseAbs().maxCoeff());
  err = std::max(err, (partial_trace(kron(r1, r2), {2, 3}, 1) - r2).cwiseAbs().maxCoeff());
  const ComplexMatrix g = random_matrix(4, 7);
  err = std::max(err, (expm(g) * expm(-g) - identity(4)).cwiseAbs().maxCoeff());
  const BiorthogonalEigensystem es = eig_biorthogonal(g);
  for (std::size_t k = 0; k < es.size(); ++k) {
    err = std::max(err, (g * es.rights[k] - es.values[k] * es.rights[k]).cwiseAbs().maxCoeff());
    for (std::size_t l = 0; l < es.size(); ++l)
      err = std::max(err, std::abs((es.lefts[l] * es.rights[k])(0, 0) - (k == l ? 1.0 : 0.0)));
  }
  o.require(err <= 1e-10, "kron/partial_trace/expm/eig properties");

  // Quantum-regression zero lag against the direct expectation.
  const SystemModel m = three_level_model(1.0, 1.0);
  const PhotonSector ps = photon_sector(1.0, 1.0, 1, 0.4, 0.1);
  std::vector<GeneratorSlot> slots;
  for (std::size_t k = 0; k < m.transitions.size(); ++k)
    slots.push_back(lift_to_photons(qme_generator(m, slot_for(m, k, kPi / 6, 1.0, kPi / 3), 1.0, 0.05), ps));
  const QmeEngine eng(slots, 0.05, Integrator::exact);
  const ComplexMatrix rho = random_state(m.dim * ps.p1.rows(), 8);
  const ComplexMatrix l1 = ps.lift(ps.p1), l2 = ps.lift(ps.p2);
  const double num = (rho * l1.adjoint() * l2.adjoint() * l2 * l1).trace().real();
  const double den = (rho * l1.adjoint() * l1).trace().real() * (rho * l2.adjoint() * l2).trace().real();
  const double qrt = std::abs(g2(rho, l1, l2, {0}, eng, 3, G2Ordering::normal).values[0] - num / den);
  o.require(qrt <= 1e-10, "QRT zero lag matches to 1e-10");
  o.detail << "min_choi_eig=" << min_eig << " property_err=" << err << " qrt_err=" << qrt;
  return o;
}

const std::function<Outcome()> kCriteria[] = {criterion_1, criterion_2, criterion_3, criterion_4, criterion_5,
                                              criterion_6, criterion_7, criterion_8, criterion_9, criterion_10};

}  // namespace

int main(int argc, char** argv) {
  int first = 1, last = 10;
  if (argc > 1) {
    first = last = std::atoi(argv[1]);
    if (first < 1 || first > 10) {
      std::fprintf(stderr, "usage: acceptance [1-10]\n");
      return 2;
    }
  }
  bool all = true;
  for (int k = first; k <= last; ++k) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = kCriteria[k - 1]();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail << "exception: " << e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("criterion %d: %s  %s  (%.1f s)\n", k, o.pass ? "PASS" : "FAIL", o.detail.str().c_str(), secs);
    std::fflush(stdout);
    all = all && o.pass;
  }
  return all ? 0 : 1;
}
