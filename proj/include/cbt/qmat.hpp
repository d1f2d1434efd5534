#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <initializer_list>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <unsupported/Eigen/KroneckerProduct>
#include <unsupported/Eigen/MatrixFunctions>

namespace cbt {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using ComplexRowVector = Eigen::RowVectorXcd;
using Index = Eigen::Index;

inline constexpr Complex kI{0.0, 1.0};
inline constexpr double kPi = 3.14159265358979323846;

class DimensionMismatch : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Raised when a computation produces non-finite values or loses required accuracy.
class NumericFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DefectiveMatrix : public NumericFailure {
 public:
  explicit DefectiveMatrix(double condition)
      : NumericFailure("eigenvector matrix is ill-conditioned (condition number " +
                       std::to_string(condition) + ")"),
        condition_(condition) {}
  double condition_number() const { return condition_; }

 private:
  double condition_;
};

// A physical or configuration parameter outside its admissible range. Carries the field name.
class InvalidParameter : public std::invalid_argument {
 public:
  InvalidParameter(std::string field, const std::string& message)
      : std::invalid_argument(field + ": " + message), field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

inline void require_square(const ComplexMatrix& m, const char* where) {
  if (m.rows() != m.cols() || m.rows() < 1)
    throw DimensionMismatch(std::string(where) + ": matrix must be square and non-empty");
}

inline const ComplexMatrix& ensure_finite(const ComplexMatrix& m, const char* where) {
  if (!m.allFinite()) throw NumericFailure(std::string(where) + ": non-finite entries");
  return m;
}

struct SpaceShape {
  std::vector<Index> dims;

  SpaceShape() = default;
  SpaceShape(std::initializer_list<Index> d) : dims(d) { validate(); }
  explicit SpaceShape(std::vector<Index> d) : dims(std::move(d)) { validate(); }

  Index total() const {
    return std::accumulate(dims.begin(), dims.end(), Index{1}, std::multiplies<>());
  }

 private:
  void validate() const {
    if (dims.empty()) throw DimensionMismatch("SpaceShape: no subsystems");
    for (Index d : dims)
      if (d < 2) throw DimensionMismatch("SpaceShape: subsystem dimension must be >= 2");
  }
};

inline ComplexMatrix identity(Index n) { return ComplexMatrix::Identity(n, n); }

inline ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b) {
  return Eigen::kroneckerProduct(a, b).eval();
}

inline ComplexMatrix kron(std::initializer_list<ComplexMatrix> factors) {
  if (factors.size() == 0) throw DimensionMismatch("kron: empty factor list");
  auto it = factors.begin();
  ComplexMatrix out = *it++;
  for (; it != factors.end(); ++it) out = kron(out, *it);
  return out;
}

inline ComplexMatrix partial_trace(const ComplexMatrix& m, const SpaceShape& shape, std::size_t keep) {
  require_square(m, "partial_trace");
  if (keep >= shape.dims.size()) throw DimensionMismatch("partial_trace: subsystem index out of range");
  if (m.rows() != shape.total()) throw DimensionMismatch("partial_trace: matrix does not match shape");
  Index left = 1, right = 1;
  for (std::size_t k = 0; k < keep; ++k) left *= shape.dims[k];
  for (std::size_t k = keep + 1; k < shape.dims.size(); ++k) right *= shape.dims[k];
  const Index mid = shape.dims[keep];
  ComplexMatrix out = ComplexMatrix::Zero(mid, mid);
  for (Index a = 0; a < mid; ++a)
    for (Index b = 0; b < mid; ++b) {
      Complex s{0.0, 0.0};
      for (Index l = 0; l < left; ++l)
        for (Index r = 0; r < right; ++r) s += m((l * mid + a) * right + r, (l * mid + b) * right + r);
      out(a, b) = s;
    }
  return out;
}

inline ComplexMatrix expm(const ComplexMatrix& m) {
  require_square(m, "expm");
  ComplexMatrix out = m.exp();
  return ensure_finite(out, "expm");
}

inline ComplexMatrix commutator(const ComplexMatrix& a, const ComplexMatrix& b) { return a * b - b * a; }

inline double hermiticity_error(const ComplexMatrix& m) {
  return (m - m.adjoint()).cwiseAbs().maxCoeff();
}

inline ComplexMatrix basis_projector(Index dim, Index i, Index j) {
  ComplexMatrix p = ComplexMatrix::Zero(dim, dim);
  p(i, j) = 1.0;
  return p;
}

inline ComplexMatrix pauli_x() { return (ComplexMatrix(2, 2) << 0, 1, 1, 0).finished(); }
inline ComplexMatrix pauli_y() { return (ComplexMatrix(2, 2) << 0, -kI, kI, 0).finished(); }
inline ComplexMatrix pauli_z() { return (ComplexMatrix(2, 2) << 1, 0, 0, -1).finished(); }

struct BiorthogonalEigensystem {
  std::vector<Complex> values;
  std::vector<ComplexVector> rights;
  std::vector<ComplexRowVector> lefts;

  std::size_t size() const { return values.size(); }

  ComplexMatrix reconstruct() const {
    const Index n = static_cast<Index>(values.size());
    ComplexMatrix m = ComplexMatrix::Zero(n, n);
    for (std::size_t i = 0; i < values.size(); ++i) m += values[i] * rights[i] * lefts[i];
    return m;
  }
};

inline double condition_number(const ComplexMatrix& m) {
  Eigen::JacobiSVD<ComplexMatrix> svd(m);
  const auto& s = svd.singularValues();
  const double smin = s(s.size() - 1);
  if (!(smin > 0.0)) return std::numeric_limits<double>::infinity();
  return s(0) / smin;
}

inline BiorthogonalEigensystem eig_biorthogonal(const ComplexMatrix& m, double max_condition = 1e12) {
  require_square(m, "eig_biorthogonal");
  Eigen::ComplexEigenSolver<ComplexMatrix> solver(m, true);
  if (solver.info() != Eigen::Success) throw NumericFailure("eig_biorthogonal: eigensolver did not converge");
  const Index n = m.rows();
  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  const auto& vals = solver.eigenvalues();
  std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) {
    if (vals(a).real() != vals(b).real()) return vals(a).real() < vals(b).real();
    return vals(a).imag() < vals(b).imag();
  });

  ComplexMatrix rights(n, n);
  for (Index k = 0; k < n; ++k) {
    ComplexVector v = solver.eigenvectors().col(order[static_cast<std::size_t>(k)]);
    const double nv = v.norm();
    if (!(nv > 0.0) || !v.allFinite()) throw DefectiveMatrix(std::numeric_limits<double>::infinity());
    rights.col(k) = v / nv;
  }
  const double cond = condition_number(rights);
  if (!(cond <= max_condition)) throw DefectiveMatrix(cond);
  const ComplexMatrix lefts = rights.inverse();

  BiorthogonalEigensystem out;
  for (Index k = 0; k < n; ++k) {
    out.values.push_back(vals(order[static_cast<std::size_t>(k)]));
    out.rights.emplace_back(rights.col(k));
    out.lefts.emplace_back(lefts.row(k));
  }
  return out;
}

}  // namespace cbt
