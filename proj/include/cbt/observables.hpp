#pragma once

#include <array>
#include <cmath>
#include <string>
#include <vector>

#include "cbt/qmat.hpp"
#include "cbt/system.hpp"

namespace cbt {

class ZeroTrace : public NumericFailure {
 public:
  ZeroTrace() : NumericFailure("state has zero trace") {}
};

class ZeroVariance : public NumericFailure {
 public:
  ZeroVariance() : NumericFailure("windowed variance vanishes") {}
};

inline Complex expval_complex(const ComplexMatrix& rho, const ComplexMatrix& op) {
  if (rho.rows() != op.rows() || rho.cols() != op.cols()) throw DimensionMismatch("expval: operator dimension mismatch");
  const Complex tr = rho.trace();
  if (std::abs(tr) < 1e-300) throw ZeroTrace();
  return (rho.cwiseProduct(op.transpose())).sum() / tr;
}

// Normalized expectation tr(rho op) / tr(rho) of a Hermitian operator.
inline double expval(const ComplexMatrix& rho, const ComplexMatrix& op) {
  const Complex v = expval_complex(rho, op);
  if (std::abs(v.imag()) > 1e-9 * std::max(1.0, std::abs(v.real())))
    throw NumericFailure("expval: complex expectation value of a Hermitian observable");
  return v.real();
}

inline std::array<double, 2> photon_numbers(const ComplexMatrix& rho_sp, const PhotonSector& sector) {
  const ComplexMatrix l1 = sector.lift(sector.p1), l2 = sector.lift(sector.p2);
  return {expval(rho_sp, l1.adjoint() * l1), expval(rho_sp, l2.adjoint() * l2)};
}

// as_written: <p1 p2(n') p2(n')^dagger p1^dagger> / (<p1 p1^dagger><p2 p2^dagger>).
// normal: <p1^dagger p2^dagger(n') p2(n') p1> / (<p1^dagger p1><p2^dagger p2>).
enum class G2Ordering { as_written, normal };

inline const char* to_string(G2Ordering o) { return o == G2Ordering::normal ? "normal" : "as_written"; }

struct G2Curve {
  std::string pair;
  std::size_t n_base{0};
  std::vector<std::size_t> lags;
  std::vector<double> values;
  double max_imag_residue{0.0};
};

// Quantum regression: sigma(0) = P1 rho P1^dagger is propagated with the trajectory's own stepper,
// starting at the slot that follows step n_base.
template <class Stepper>
G2Curve g2(const ComplexMatrix& rho_n, const ComplexMatrix& p1, const ComplexMatrix& p2,
           const std::vector<std::size_t>& lags, const Stepper& stepper, std::size_t n_base,
           G2Ordering ordering = G2Ordering::as_written) {
  const Complex tr = rho_n.trace();
  if (std::abs(tr) < 1e-300) throw ZeroTrace();
  const ComplexMatrix jump = ordering == G2Ordering::as_written ? ComplexMatrix(p1.adjoint()) : p1;
  const ComplexMatrix d1 = ordering == G2Ordering::as_written ? ComplexMatrix(p1 * p1.adjoint())
                                                               : ComplexMatrix(p1.adjoint() * p1);
  const ComplexMatrix d2 = ordering == G2Ordering::as_written ? ComplexMatrix(p2 * p2.adjoint())
                                                               : ComplexMatrix(p2.adjoint() * p2);
  const double den = expval(rho_n, d1) * expval(rho_n, d2);
  if (!(std::abs(den) > 1e-300)) throw NumericFailure("g2: vanishing denominator");
  for (std::size_t k = 1; k < lags.size(); ++k)
    if (lags[k] < lags[k - 1]) throw InvalidParameter("lags", "must be non-decreasing");

  G2Curve c;
  c.n_base = n_base;
  ComplexMatrix sigma = jump * rho_n * jump.adjoint();
  std::size_t at = 0;
  for (std::size_t lag : lags) {
    for (; at < lag; ++at) sigma = stepper.step(sigma, n_base + at);
    const Complex num = (sigma.cwiseProduct(d2.transpose())).sum() / tr;
    c.max_imag_residue = std::max(c.max_imag_residue, std::abs(num.imag()));
    c.lags.push_back(lag);
    c.values.push_back(num.real() / den);
  }
  if (c.max_imag_residue > 1e-9 * std::max(1.0, std::abs(den)))
    throw NumericFailure("g2: correlation has a non-negligible imaginary part");
  return c;
}

// Windowed Pearson coefficient over [start, start + window).
inline double pearson(const std::vector<double>& a, const std::vector<double>& b, std::size_t start,
                      std::size_t window) {
  if (window < 2) throw InvalidParameter("window", "must be >= 2");
  if (start + window > a.size() || start + window > b.size())
    throw InvalidParameter("window", "exceeds the series length");
  double ma = 0, mb = 0;
  for (std::size_t k = start; k < start + window; ++k) {
    ma += a[k];
    mb += b[k];
  }
  ma /= static_cast<double>(window);
  mb /= static_cast<double>(window);
  double sab = 0, saa = 0, sbb = 0;
  for (std::size_t k = start; k < start + window; ++k) {
    sab += (a[k] - ma) * (b[k] - mb);
    saa += (a[k] - ma) * (a[k] - ma);
    sbb += (b[k] - mb) * (b[k] - mb);
  }
  const double w = static_cast<double>(window);
  if (saa / w < 1e-14 || sbb / w < 1e-14) throw ZeroVariance();
  return std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0);
}

inline double pearson(const std::vector<double>& a, const std::vector<double>& b, std::size_t window) {
  const std::size_t n = std::min(a.size(), b.size());
  if (window > n) throw InvalidParameter("window", "exceeds the series length");
  return pearson(a, b, n - window, window);
}

inline std::array<double, 3> bloch_vector(const ComplexMatrix& rho, int spin_index) {
  if (rho.rows() != 4) throw DimensionMismatch("bloch_vector: needs a two-spin state");
  return {expval(rho, two_spin_op('x', spin_index)), expval(rho, two_spin_op('y', spin_index)),
          expval(rho, two_spin_op('z', spin_index))};
}

// Peak-to-peak half amplitude over the final `window` samples.
inline double oscillation_amplitude(const std::vector<double>& s, std::size_t window) {
  if (s.empty()) return 0.0;
  const std::size_t start = s.size() > window ? s.size() - window : 0;
  const auto [lo, hi] = std::minmax_element(s.begin() + static_cast<std::ptrdiff_t>(start), s.end());
  return 0.5 * (*hi - *lo);
}

}  // namespace cbt
