#include <gtest/gtest.h>

#include "cbt/reservoir.hpp"

using namespace cbt;

namespace reservoir_test {

const double kThetaQ[] = {0.0, 0.25, 0.55, 1.0};
const double kThetaC[] = {0.0, kPi / 6, kPi / 3, kPi / 2, 2.0};
const double kBeta[] = {0.0, 0.5, 1.0, 2.0};

// Rates from scalar matrix elements: B_ab = s + c sinh(t), B_ba = s - c sinh(t).
struct ScalarRates {
  double gp, gbp, gm, gbm;
};

ScalarRates scalar_rates(double omega, double theta_q, double beta, double theta_c) {
  const double s = std::sin(theta_c), c = std::cos(theta_c);
  const double bab = s + c * std::sinh(theta_q), bba = s - c * std::sinh(theta_q);
  const double wa = 1.0 / (1.0 + std::exp(beta * omega)), wb = 1.0 - wa;
  return {wb * bab * bba, wb * bab * bab, wa * bab * bba, wa * bba * bba};
}


TEST(QubitHamiltonian, HermitianLimitIsHalfSigmaX) {
  EXPECT_LT((qubit_hamiltonian({1.0, 0.0, 1.0, 0.0}) - 0.5 * pauli_x()).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(QubitHamiltonian, OffDiagonalsAreHalfExponentials) {
  const ComplexMatrix h = qubit_hamiltonian({1.0, 0.5, 1.0, 0.0});
  EXPECT_NEAR(h(0, 1).real(), 0.5 * std::exp(0.5), 1e-15);
  EXPECT_NEAR(h(1, 0).real(), 0.5 * std::exp(-0.5), 1e-15);
  EXPECT_NEAR(h(0, 1).real(), 0.8243606353500641, 1e-12);
  EXPECT_NEAR(h(1, 0).real(), 0.3032653298563167, 1e-12);
}

TEST(QubitHamiltonian, EigenvaluesArePlusMinusHalfOmega) {
  for (double t : kThetaQ)
    for (double w : {0.5, 1.0, 3.0}) {
      const BiorthogonalEigensystem es = eig_biorthogonal(qubit_hamiltonian({w, t, 1.0, 0.0}));
      EXPECT_NEAR(es.values[0].real(), -w / 2, 1e-12);
      EXPECT_NEAR(es.values[1].real(), w / 2, 1e-12);
      EXPECT_NEAR(es.values[0].imag(), 0.0, 1e-12);
    }
}

TEST(QubitHamiltonian, InvalidSpecsThrow) {
  EXPECT_THROW(qubit_hamiltonian({-1.0, 0.0, 1.0, 0.0}), InvalidParameter);
  EXPECT_THROW(qubit_hamiltonian({1.0, -0.1, 1.0, 0.0}), InvalidParameter);
  EXPECT_THROW(qubit_hamiltonian({1.0, 0.1, -1.0, 0.0}), InvalidParameter);
  EXPECT_NO_THROW(qubit_hamiltonian({1.0, 0.1, std::numeric_limits<double>::infinity(), 0.0}));
}

TEST(Biorthogonalize, HermitianCase) {
  const BiorthogonalQubit q = biorthogonalize({1.0, 0.0, 1.0, 0.0});
  const double r = 1.0 / std::sqrt(2.0);
  EXPECT_NEAR(std::abs(q.a_right(0) - r) + std::abs(q.a_right(1) - r), 0.0, 1e-12);
  EXPECT_NEAR(std::abs(q.b_right(0) - r) + std::abs(q.b_right(1) + r), 0.0, 1e-12);
  EXPECT_LT((q.a_left - q.a_right.adjoint()).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LT((q.b_left - q.b_right.adjoint()).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Biorthogonalize, OverlapIsTanhAndVectorsMatchClosedForm) {
  for (double t : {0.25, 0.55, 1.0}) {
    const ReservoirQubitSpec spec{1.0, t, 1.0, 0.0};
    const BiorthogonalQubit q = biorthogonalize(spec);
    // Direct 2x2 oracle: right eigenvectors proportional to (e^{t/2}, +-e^{-t/2}).
    const double n = std::hypot(std::exp(t / 2), std::exp(-t / 2));
    EXPECT_NEAR(q.overlap, std::tanh(t), 1e-12);
    EXPECT_LT(std::abs(q.a_right(0) - std::exp(t / 2) / n) + std::abs(q.a_right(1) - std::exp(-t / 2) / n), 1e-12);
    EXPECT_LT(std::abs(q.b_right(0) - std::exp(t / 2) / n) + std::abs(q.b_right(1) + std::exp(-t / 2) / n), 1e-12);
    EXPECT_NEAR(std::abs((q.a_left * q.a_right)(0, 0) - 1.0), 0.0, 1e-12);
    EXPECT_NEAR(std::abs((q.b_left * q.b_right)(0, 0) - 1.0), 0.0, 1e-12);
    EXPECT_NEAR(std::abs((q.a_left * q.b_right)(0, 0)), 0.0, 1e-12);
    EXPECT_NEAR(std::abs((q.b_left * q.a_right)(0, 0)), 0.0, 1e-12);
    const ComplexMatrix h = qubit_hamiltonian(spec);
    EXPECT_LT((h * q.a_right - 0.5 * q.a_right).norm(), 1e-12);
    EXPECT_LT((h * q.b_right + 0.5 * q.b_right).norm(), 1e-12);
  }
}

TEST(Biorthogonalize, ExceptionalAngleOverlapIsSinPiOverThree) {
  const BiorthogonalQubit q = biorthogonalize({1.0, 1.317, 1.0, 0.0});
  EXPECT_NEAR(q.overlap, std::tanh(1.317), 1e-12);
  EXPECT_NEAR(q.overlap, std::sin(kPi / 3), 1e-4);
}

TEST(BoltzmannState, InfiniteTemperature) {
  const ReservoirQubitSpec spec{1.0, 0.55, 0.0, 0.0};
  const BiorthogonalQubit q = biorthogonalize(spec);
  const ComplexMatrix rho = boltzmann_right_state(spec, q);
  const ComplexMatrix oracle = 0.5 * (q.a_right * q.a_right.adjoint() + q.b_right * q.b_right.adjoint());
  EXPECT_LT((rho - oracle).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_NEAR(rho.trace().real(), 1.0, 1e-12);
}

TEST(BoltzmannState, WeightsAtBetaOne) {
  const auto [wa, wb] = boltzmann_weights({1.0, 0.3, 1.0, 0.0});
  EXPECT_NEAR(wa, std::exp(-0.5) / (2 * std::cosh(0.5)), 1e-15);
  EXPECT_NEAR(wa, 0.2689414213699951, 1e-12);
  EXPECT_NEAR(wa + wb, 1.0, 1e-15);
}

TEST(BoltzmannState, LowTemperatureIsGround) {
  for (double beta : {50.0, std::numeric_limits<double>::infinity()}) {
    const ReservoirQubitSpec spec{1.0, 0.55, beta, 0.0};
    const BiorthogonalQubit q = biorthogonalize(spec);
    EXPECT_LT((boltzmann_right_state(spec, q) - q.b_right * q.b_right.adjoint()).cwiseAbs().maxCoeff(), 1e-10);
  }
}

TEST(BoltzmannState, IsAStateOnGrid) {
  for (double t : kThetaQ)
    for (double beta : kBeta) {
      const ReservoirQubitSpec spec{1.0, t, beta, 0.0};
      const ComplexMatrix rho = boltzmann_right_state(spec, biorthogonalize(spec));
      EXPECT_LT(hermiticity_error(rho), 1e-12);
      EXPECT_NEAR(rho.trace().real(), 1.0, 1e-12);
      Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(rho);
      EXPECT_GE(es.eigenvalues()(0), -1e-12);
      EXPECT_LE(es.eigenvalues()(1), 1.0 + 1e-12);
    }
}

TEST(CouplingOperator, Values) {
  EXPECT_LT((coupling_operator(0.0) - pauli_x()).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_LT((coupling_operator(kPi / 2) - pauli_z()).cwiseAbs().maxCoeff(), 1e-15);
  const ComplexMatrix b = coupling_operator(kPi / 3);
  EXPECT_NEAR(b(0, 0).real(), std::sqrt(3.0) / 2, 1e-15);
  EXPECT_NEAR(b(0, 1).real(), 0.5, 1e-15);
  EXPECT_NEAR(b(1, 0).real(), 0.5, 1e-15);
  EXPECT_NEAR(b(1, 1).real(), -std::sqrt(3.0) / 2, 1e-15);
}

TEST(StabilityShift, ShiftedCouplingHasZeroMean) {
  for (double t : kThetaQ)
    for (double tc : kThetaC)
      for (double beta : kBeta) {
        const ReservoirQubitSpec spec{1.0, t, beta, tc};
        const ComplexMatrix rho = boltzmann_right_state(spec, biorthogonalize(spec));
        const ShiftedCoupling sh = stability_shift(coupling_operator(tc), rho);
        EXPECT_LT(std::abs((sh.b_shifted * rho).trace()), 1e-12);
      }
}

TEST(StabilityShift, HermitianSigmaXMean) {
  const ReservoirQubitSpec spec{1.0, 0.0, 1.0, 0.0};
  const auto [wa, wb] = boltzmann_weights(spec);
  const ShiftedCoupling sh = stability_shift(pauli_x(), boltzmann_right_state(spec, biorthogonalize(spec)));
  EXPECT_NEAR(sh.mu_b.real(), wa - wb, 1e-12);
  EXPECT_NEAR(sh.mu_b.imag(), 0.0, 1e-12);
}

TEST(StabilityShift, InfiniteTemperatureMean) {
  for (double t : kThetaQ)
    for (double tc : kThetaC) {
      const ReservoirQubitSpec spec{1.0, t, 0.0, tc};
      const ShiftedCoupling sh = stability_shift(coupling_operator(tc), boltzmann_right_state(spec, biorthogonalize(spec)));
      EXPECT_NEAR(sh.mu_b.real(), std::sin(tc) * std::tanh(t), 1e-12);
    }
}

TEST(SpectralFunctions, HermitianLimitAllEqual) {
  for (double tc : kThetaC)
    for (double beta : kBeta) {
      const SpectralData d = spectral_functions({1.0, 0.0, beta, tc});
      EXPECT_NEAR(d.gamma_plus, d.gammabar_plus, 1e-12);
      EXPECT_NEAR(d.gamma_minus, d.gammabar_minus, 1e-12);
      EXPECT_NEAR(d.delta_plus, 0.0, 1e-12);
      EXPECT_NEAR(d.delta_minus, 0.0, 1e-12);
    }
}

TEST(SpectralFunctions, DefaultPointMatchesScalarOracle) {
  const SpectralData d = spectral_functions({1.0, kPi / 6, 1.0, kPi / 3});
  const ScalarRates o = scalar_rates(1.0, kPi / 6, 1.0, kPi / 3);
  EXPECT_NEAR(d.gamma_plus, o.gp, 1e-12);
  EXPECT_NEAR(d.gammabar_plus, o.gbp, 1e-12);
  EXPECT_NEAR(d.gamma_minus, o.gm, 1e-12);
  EXPECT_NEAR(d.gammabar_minus, o.gbm, 1e-12);
  EXPECT_GT(std::abs(d.delta_plus), 1e-3);
}

TEST(SpectralFunctions, MatrixElementAsymmetry) {
  for (double t : {0.25, 0.55, 1.0})
    for (double tc : {0.0, kPi / 6, kPi / 3}) {
      const SpectralData d = spectral_functions({1.0, t, 1.0, tc});
      EXPECT_GT(std::abs(d.b_ab - std::conj(d.b_ba)), 1e-3);
      EXPECT_NEAR(d.b_ab.real(), std::sin(tc) + std::cos(tc) * std::sinh(t), 1e-12);
      EXPECT_NEAR(d.b_ba.real(), std::sin(tc) - std::cos(tc) * std::sinh(t), 1e-12);
    }
}

TEST(SpectralFunctions, GridInvariants) {
  for (double w : {0.5, 1.0, 2.0})
    for (double t : kThetaQ)
      for (double tc : kThetaC)
        for (double beta : kBeta) {
          const SpectralData d = spectral_functions({w, t, beta, tc});
          EXPECT_GE(d.gammabar_plus, -1e-14);
          EXPECT_GE(d.gammabar_minus, -1e-14);
          EXPECT_NEAR(d.w_a + d.w_b, 1.0, 1e-15);
          const ScalarRates o = scalar_rates(w, t, beta, tc);
          EXPECT_NEAR(d.gamma_plus, o.gp, 1e-10);
          EXPECT_NEAR(d.gammabar_minus, o.gbm, 1e-10);
        }
}

TEST(ModifiedKms, HermitianRecoversBeta) {
  for (double beta : {0.5, 1.0, 2.0}) {
    const SpectralData d = spectral_functions({1.0, 0.0, beta, kPi / 6});
    const KmsResult k = modified_kms(d, 1.0, beta);
    ASSERT_EQ(k.status, KmsStatus::ok);
    EXPECT_NEAR(*k.beta_bar, beta, 1e-10);
  }
}

TEST(ModifiedKms, NonHermitianShiftsTemperature) {
  const SpectralData d = spectral_functions({1.0, kPi / 6, 1.0, kPi / 3});
  const KmsResult k = modified_kms(d, 1.0, 1.0);
  ASSERT_EQ(k.status, KmsStatus::ok);
  const ScalarRates o = scalar_rates(1.0, kPi / 6, 1.0, kPi / 3);
  EXPECT_NEAR(*k.beta_bar, -std::log(o.gbm / o.gp), 1e-10);
  EXPECT_GT(std::abs(*k.beta_bar - 1.0), 1e-3);
}

TEST(ModifiedKms, VanishingElementIsDegenerate) {
  const double t = 0.55;
  const double tc = std::atan(std::sinh(t));
  const SpectralData d = spectral_functions({1.0, t, 1.0, tc});
  EXPECT_NEAR(std::abs(d.b_ba), 0.0, 1e-12);
  EXPECT_NE(modified_kms(d, 1.0, 1.0).status, KmsStatus::ok);
  EXPECT_FALSE(d.beta_bar.has_value());
}

TEST(ModifiedKms, NegativeRatioFlagged) {
  // Between the roots of B_ba and B_ab the ratio changes sign.
  const double t = 0.55;
  const double tc = -0.5 * std::atan(std::sinh(t));
  const SpectralData d = spectral_functions({1.0, t, 1.0, tc});
  const KmsResult k = modified_kms(d, 1.0, 1.0);
  EXPECT_EQ(k.status, KmsStatus::negative_ratio);
  EXPECT_FALSE(k.beta_bar.has_value());
  EXPECT_LT(k.eta, 0.0);
}

TEST(SpectralFunctions, ClosedFormMismatchOnWrongEigensystem) {
  const ReservoirQubitSpec spec{1.0, 0.55, 1.0, kPi / 3};
  BiorthogonalQubit q = biorthogonalize(spec);
  std::swap(q.a_right, q.b_right);
  std::swap(q.a_left, q.b_left);
  EXPECT_THROW(spectral_functions(spec, q, coupling_operator(spec.theta_c)), ClosedFormMismatch);
}

}  // namespace reservoir_test
