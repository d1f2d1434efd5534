#pragma once

#include <cmath>
#include <optional>
#include <string>

#include "cbt/qmat.hpp"

namespace cbt {

class ClosedFormMismatch : public NumericFailure {
 public:
  using NumericFailure::NumericFailure;
};

struct ReservoirQubitSpec {
  double omega{1.0};
  double theta_q{0.0};
  double beta{1.0};  // +infinity is accepted and means zero temperature
  double theta_c{0.0};

  void validate() const {
    if (!(std::isfinite(omega) && omega > 0.0)) throw InvalidParameter("omega", "must be finite and > 0");
    if (!(theta_q >= 0.0 && theta_q <= kPi)) throw InvalidParameter("theta_q", "must lie in [0, pi]");
    if (std::isnan(beta) || beta < 0.0) throw InvalidParameter("beta", "must be >= 0");
    if (!std::isfinite(theta_c)) throw InvalidParameter("theta_c", "must be finite");
  }
};

struct BiorthogonalQubit {
  BiorthogonalEigensystem eigensystem;  // index 0 is b (-omega/2), index 1 is a (+omega/2)
  ComplexVector a_right, b_right;
  ComplexRowVector a_left, b_left;
  double overlap{0.0};  // <a_R|b_R>
};

struct SpectralData {
  double gamma_plus{0}, gamma_minus{0};
  double gammabar_plus{0}, gammabar_minus{0};
  double delta_plus{0}, delta_minus{0};
  Complex b_ab{0}, b_ba{0};
  double w_a{0}, w_b{0};
  std::optional<double> beta_bar;
};

enum class KmsStatus { ok, negative_ratio, degenerate };

struct KmsResult {
  KmsStatus status{KmsStatus::degenerate};
  double eta{std::numeric_limits<double>::quiet_NaN()};  // gammabar_minus / gamma_plus
  std::optional<double> beta_bar;
};

inline const char* to_string(KmsStatus s) {
  switch (s) {
    case KmsStatus::ok: return "ok";
    case KmsStatus::negative_ratio: return "negative_ratio";
    case KmsStatus::degenerate: return "degenerate";
  }
  return "unknown";
}

inline ComplexMatrix qubit_hamiltonian(const ReservoirQubitSpec& spec) {
  spec.validate();
  ComplexMatrix h(2, 2);
  h << 0.0, std::exp(spec.theta_q), std::exp(-spec.theta_q), 0.0;
  return 0.5 * spec.omega * h;
}

// Analytic eigendata of H_q, used as the independent path for the closed-form rates.
inline BiorthogonalQubit closed_form_qubit(const ReservoirQubitSpec& spec) {
  spec.validate();
  const double t = spec.theta_q;
  const double n = std::sqrt(2.0 * std::cosh(t));
  BiorthogonalQubit q;
  q.a_right = ComplexVector(2);
  q.b_right = ComplexVector(2);
  q.a_left = ComplexRowVector(2);
  q.b_left = ComplexRowVector(2);
  q.a_right << std::exp(t / 2) / n, std::exp(-t / 2) / n;
  q.b_right << std::exp(t / 2) / n, -std::exp(-t / 2) / n;
  q.a_left << 0.5 * n * std::exp(-t / 2), 0.5 * n * std::exp(t / 2);
  q.b_left << 0.5 * n * std::exp(-t / 2), -0.5 * n * std::exp(t / 2);
  q.overlap = std::tanh(t);
  q.eigensystem.values = {Complex(-spec.omega / 2, 0.0), Complex(spec.omega / 2, 0.0)};
  q.eigensystem.rights = {q.b_right, q.a_right};
  q.eigensystem.lefts = {q.b_left, q.a_left};
  return q;
}

inline BiorthogonalQubit biorthogonalize(const ReservoirQubitSpec& spec) {
  const ComplexMatrix h = qubit_hamiltonian(spec);
  BiorthogonalEigensystem es = eig_biorthogonal(h);
  for (auto v : es.values)
    if (std::abs(v.imag()) > 1e-12 || std::abs(std::abs(v.real()) - spec.omega / 2) > 1e-12 * spec.omega)
      throw NumericFailure("biorthogonalize: eigenvalues are not +-omega/2");
  // Fix the gauge so the first right component is real and positive.
  for (std::size_t k = 0; k < 2; ++k) {
    const Complex c = es.rights[k](0);
    const Complex phase = std::abs(c) > 0 ? c / std::abs(c) : Complex(1.0);
    es.rights[k] /= phase;
    es.lefts[k] *= phase;
  }
  BiorthogonalQubit q;
  const std::size_t ia = es.values[0].real() > 0 ? 0 : 1;
  const std::size_t ib = 1 - ia;
  q.a_right = es.rights[ia];
  q.b_right = es.rights[ib];
  q.a_left = es.lefts[ia];
  q.b_left = es.lefts[ib];
  q.eigensystem = std::move(es);
  const Complex overlap = q.a_right.dot(q.b_right);
  if (std::abs(overlap - std::tanh(spec.theta_q)) > 1e-10)
    throw ClosedFormMismatch("biorthogonalize: overlap differs from tanh(theta_q)");
  q.overlap = overlap.real();
  return q;
}

// Boltzmann weights (w_a, w_b) for the levels +omega/2 and -omega/2.
inline std::pair<double, double> boltzmann_weights(const ReservoirQubitSpec& spec) {
  const double x = spec.beta * spec.omega;
  if (std::isinf(x)) return {0.0, 1.0};
  return {1.0 / (1.0 + std::exp(x)), 1.0 / (1.0 + std::exp(-x))};
}

inline ComplexMatrix boltzmann_right_state(const ReservoirQubitSpec& spec, const BiorthogonalQubit& q) {
  const auto [wa, wb] = boltzmann_weights(spec);
  ComplexMatrix rho = wa * q.a_right * q.a_right.adjoint() + wb * q.b_right * q.b_right.adjoint();
  return rho;
}

inline ComplexMatrix coupling_operator(double theta_c) {
  const double s = std::sin(theta_c), c = std::cos(theta_c);
  return (ComplexMatrix(2, 2) << s, c, c, -s).finished();
}

struct ShiftedCoupling {
  ComplexMatrix b_shifted;
  Complex mu_b;
};

inline ShiftedCoupling stability_shift(const ComplexMatrix& b, const ComplexMatrix& rho_q) {
  if (b.rows() != 2 || b.cols() != 2 || rho_q.rows() != 2 || rho_q.cols() != 2)
    throw DimensionMismatch("stability_shift: operands must be 2x2");
  const Complex mu = (b * rho_q).trace();
  return {b - mu * identity(2), mu};
}

// Resonant parts of B in the biorthogonal basis: B_{-omega} = B_ab |a_R><b_L| and B_omega = B_ba |b_R><a_L|.
struct ResonantParts {
  ComplexMatrix b_minus;  // B_{-omega}
  ComplexMatrix b_plus;   // B_{omega}
  Complex b_ab, b_ba;
};

inline ResonantParts resonant_parts(const BiorthogonalQubit& q, const ComplexMatrix& b) {
  ResonantParts r;
  r.b_ab = (q.a_left * b * q.b_right)(0, 0);
  r.b_ba = (q.b_left * b * q.a_right)(0, 0);
  r.b_minus = r.b_ab * q.a_right * q.b_left;
  r.b_plus = r.b_ba * q.b_right * q.a_left;
  return r;
}

inline KmsResult modified_kms(const SpectralData& d, double omega, double beta) {
  KmsResult r;
  const double scale = std::max({std::abs(d.gammabar_plus), std::abs(d.gammabar_minus), 1e-300});
  if (std::abs(d.gamma_plus) <= 1e-14 * scale || std::abs(d.b_ab) <= 1e-14) {
    r.status = KmsStatus::degenerate;
    return r;
  }
  const double eta1 = d.gammabar_minus / d.gamma_plus;
  const double boltz = std::isinf(beta * omega) ? 0.0 : std::exp(-beta * omega);
  const Complex eta2 = boltz * std::conj(d.b_ba) / d.b_ab;
  if (std::abs(eta2 - eta1) > 1e-10 * std::max(1.0, std::abs(eta1)))
    throw ClosedFormMismatch("modified_kms: rate ratio disagrees with the matrix-element form");
  r.eta = eta1;
  if (!(eta1 > 0.0)) {
    r.status = KmsStatus::negative_ratio;
    return r;
  }
  const double bb = -std::log(eta1) / omega;
  if (std::abs(std::exp(-bb * omega) - eta1) > 1e-10 * std::max(1.0, eta1))
    throw ClosedFormMismatch("modified_kms: effective temperature does not reproduce the ratio");
  r.status = KmsStatus::ok;
  r.beta_bar = bb;
  return r;
}

inline SpectralData spectral_functions(const ReservoirQubitSpec& spec, const BiorthogonalQubit& q,
                                       const ComplexMatrix& b) {
  if (b.rows() != 2 || b.cols() != 2) throw DimensionMismatch("spectral_functions: B must be 2x2");
  const auto [wa, wb] = boltzmann_weights(spec);
  const ComplexMatrix rho_q = boltzmann_right_state(spec, q);

  // Trace definition with the numerically diagonalized eigenvectors.
  const ResonantParts r = resonant_parts(q, b);
  const Complex g_plus = (r.b_plus * r.b_minus * rho_q).trace();
  const Complex gb_plus = (r.b_minus.adjoint() * r.b_minus * rho_q).trace();
  const Complex g_minus = (r.b_minus * r.b_plus * rho_q).trace();
  const Complex gb_minus = (r.b_plus.adjoint() * r.b_plus * rho_q).trace();

  // Closed forms with the analytic eigenvectors.
  const BiorthogonalQubit cf = closed_form_qubit(spec);
  const Complex cab = (cf.a_left * b * cf.b_right)(0, 0);
  const Complex cba = (cf.b_left * b * cf.a_right)(0, 0);
  const Complex c_plus = wb * cba * cab;
  const Complex cb_plus = wb * std::norm(cab);
  const Complex c_minus = wa * cab * cba;
  const Complex cb_minus = wa * std::norm(cba);

  const double tol = 1e-10;
  auto close = [&](Complex x, Complex y) { return std::abs(x - y) <= tol * std::max(1.0, std::abs(y)); };
  if (!close(g_plus, c_plus) || !close(gb_plus, cb_plus) || !close(g_minus, c_minus) ||
      !close(gb_minus, cb_minus) || !close(r.b_ab, cab) || !close(r.b_ba, cba))
    throw ClosedFormMismatch("spectral_functions: trace and closed-form paths disagree");
  for (Complex x : {g_plus, gb_plus, g_minus, gb_minus})
    if (std::abs(x.imag()) > tol) throw ClosedFormMismatch("spectral_functions: complex rate");

  // The closed forms keep full relative accuracy when a Boltzmann weight is tiny; the trace path
  // only matches them to an absolute tolerance there.
  SpectralData d;
  d.gamma_plus = c_plus.real();
  d.gammabar_plus = cb_plus.real();
  d.gamma_minus = c_minus.real();
  d.gammabar_minus = cb_minus.real();
  d.delta_plus = d.gammabar_plus - d.gamma_plus;
  d.delta_minus = d.gammabar_minus - d.gamma_minus;
  d.b_ab = r.b_ab;
  d.b_ba = r.b_ba;
  d.w_a = wa;
  d.w_b = wb;
  d.beta_bar = modified_kms(d, spec.omega, spec.beta).beta_bar;
  return d;
}

inline SpectralData spectral_functions(const ReservoirQubitSpec& spec) {
  return spectral_functions(spec, biorthogonalize(spec), coupling_operator(spec.theta_c));
}

}  // namespace cbt
