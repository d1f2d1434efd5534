#pragma once

#include <algorithm>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "cbt/qmat.hpp"
#include "cbt/qme.hpp"

namespace cbt {

struct LiouvillianMatrix {
  Index dim{0};  // system dimension d; matrix is d^2 x d^2
  ComplexMatrix matrix;
  std::string source;
};

inline LiouvillianMatrix vectorize(const GeneratorSlot& gen, std::string source = "slot") {
  return {gen.dim(), superoperator(gen), std::move(source)};
}

// Mean generator over one period; every term keeps its operator and carries rate / N_q.
inline GeneratorSlot period_average(const std::vector<GeneratorSlot>& slots) {
  if (slots.empty()) throw InvalidParameter("slots", "period_average needs at least one generator");
  const double inv = 1.0 / static_cast<double>(slots.size());
  GeneratorSlot avg;
  avg.h_coherent = ComplexMatrix::Zero(slots.front().dim(), slots.front().dim());
  for (const auto& s : slots) {
    if (s.dim() != avg.dim()) throw DimensionMismatch("period_average: generators act on different spaces");
    avg.h_coherent += inv * s.h_coherent;
    for (const auto& j : s.jumps) avg.jumps.push_back({j.op, inv * j.rate});
    for (const auto& d : s.dissipations) avg.dissipations.push_back({d.op, inv * d.rate});
    for (const auto& l : s.extra_lindblads) avg.extra_lindblads.push_back({l.op, inv * l.rate});
  }
  return avg;
}

// Logarithm of the one-period composite propagator, scaled by 1 / (N_q t_bar).
inline LiouvillianMatrix composite_liouvillian(const std::vector<GeneratorSlot>& slots, double t_bar) {
  if (slots.empty()) throw InvalidParameter("slots", "composite map needs at least one generator");
  const Index d = slots.front().dim();
  ComplexMatrix p = identity(d * d);
  for (const auto& s : slots) p = expm(t_bar * superoperator(s)) * p;
  ComplexMatrix l = p.log();
  l /= static_cast<double>(slots.size()) * t_bar;
  return {d, ensure_finite(l, "composite_liouvillian"), "composite"};
}

struct Spectrum {
  std::vector<Complex> values;  // descending real part, ties by ascending imaginary part
  ComplexMatrix vectors;        // columns match values
  bool has_growth{false};       // some real part exceeds +1e-9
};

inline Spectrum liouvillian_spectrum(const LiouvillianMatrix& lm) {
  require_square(lm.matrix, "liouvillian_spectrum");
  Eigen::ComplexEigenSolver<ComplexMatrix> es(lm.matrix, true);
  if (es.info() != Eigen::Success) throw NumericFailure("liouvillian_spectrum: eigensolver did not converge");
  const Index n = lm.matrix.rows();
  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  const auto& v = es.eigenvalues();
  std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) {
    if (v(a).real() != v(b).real()) return v(a).real() > v(b).real();
    return v(a).imag() < v(b).imag();
  });
  Spectrum s;
  s.vectors.resize(n, n);
  for (Index k = 0; k < n; ++k) {
    const Index src = order[static_cast<std::size_t>(k)];
    s.values.push_back(v(src));
    s.vectors.col(k) = es.eigenvectors().col(src);
    if (v(src).real() > 1e-9) s.has_growth = true;
  }
  return s;
}

struct EigenCluster {
  std::vector<std::size_t> members;  // indices into the sorted spectrum
  Complex centroid{0.0};
  int algebraic{0};
  int geometric{0};
  int order{1};  // algebraic - geometric + 1; values >= 2 mark an exceptional point
  bool is_lep() const { return order >= 2; }
};

struct OscillationPair {
  Complex upper{0.0};  // positive imaginary part
  Complex lower{0.0};
  std::size_t cluster_upper{0}, cluster_lower{0};
  bool dominant{false};  // real part is maximal among all clusters within tolerance
};

struct LepReport {
  std::vector<Complex> values;
  std::vector<std::size_t> cluster_of;
  std::vector<EigenCluster> clusters;
  std::optional<OscillationPair> oscillation;
  std::optional<std::size_t> stationary_index;
  double norm{0.0};
  double tol_cluster{0.0};  // absolute
  double tol_rank{0.0};     // absolute
  bool has_growth{false};

  int max_order() const {
    int m = 1;
    for (const auto& c : clusters) m = std::max(m, c.order);
    return m;
  }
};

inline double operator_norm(const ComplexMatrix& m) {
  if (m.size() == 0) return 0.0;
  Eigen::BDCSVD<ComplexMatrix> svd(m);
  return svd.singularValues()(0);
}

// Clusters eigenvalues by single linkage within tol_cluster * |L| and estimates geometric
// multiplicities as n - rank(L - centroid I) with singular-value threshold tol_rank * |L|.
inline LepReport lep_detect(const LiouvillianMatrix& lm, double tol_cluster = 1e-5, double tol_rank = 1e-6) {
  if (!(tol_cluster > 0.0)) throw InvalidParameter("tol_cluster", "must be > 0");
  if (!(tol_rank > 0.0)) throw InvalidParameter("tol_rank", "must be > 0");
  const Spectrum sp = liouvillian_spectrum(lm);
  const Index n = lm.matrix.rows();
  LepReport rep;
  rep.values = sp.values;
  rep.has_growth = sp.has_growth;
  rep.norm = operator_norm(lm.matrix);
  const double scale = rep.norm > 0.0 ? rep.norm : 1.0;
  rep.tol_cluster = tol_cluster * scale;
  rep.tol_rank = tol_rank * scale;

  const std::size_t m = sp.values.size();
  std::vector<std::size_t> parent(m);
  std::iota(parent.begin(), parent.end(), std::size_t{0});
  auto find = [&](std::size_t i) {
    while (parent[i] != i) i = parent[i] = parent[parent[i]];
    return i;
  };
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = i + 1; j < m; ++j)
      if (std::abs(sp.values[i] - sp.values[j]) <= rep.tol_cluster) parent[find(i)] = find(j);

  rep.cluster_of.assign(m, 0);
  std::vector<std::size_t> root_to_cluster(m, m);
  for (std::size_t i = 0; i < m; ++i) {
    const std::size_t r = find(i);
    if (root_to_cluster[r] == m) {
      root_to_cluster[r] = rep.clusters.size();
      rep.clusters.emplace_back();
    }
    rep.cluster_of[i] = root_to_cluster[r];
    rep.clusters[root_to_cluster[r]].members.push_back(i);
  }
  for (auto& c : rep.clusters) {
    for (std::size_t i : c.members) c.centroid += sp.values[i];
    c.centroid /= static_cast<double>(c.members.size());
    c.algebraic = static_cast<int>(c.members.size());
    if (c.algebraic == 1) {
      c.geometric = 1;
    } else {
      const ComplexMatrix shifted = lm.matrix - c.centroid * identity(n);
      Eigen::BDCSVD<ComplexMatrix> svd(shifted);
      Index rank = 0;
      for (Index k = 0; k < svd.singularValues().size(); ++k)
        if (svd.singularValues()(k) > rep.tol_rank) ++rank;
      c.geometric = std::clamp(static_cast<int>(n - rank), 1, c.algebraic);
    }
    c.order = c.algebraic - c.geometric + 1;
  }

  double max_re = -std::numeric_limits<double>::infinity();
  for (const auto& c : rep.clusters) max_re = std::max(max_re, c.centroid.real());
  std::optional<std::size_t> best;
  for (std::size_t k = 0; k < rep.clusters.size(); ++k) {
    const auto& c = rep.clusters[k];
    if (c.centroid.imag() <= rep.tol_cluster) continue;
    if (!best || c.centroid.real() > rep.clusters[*best].centroid.real()) best = k;
  }
  if (best) {
    const Complex up = rep.clusters[*best].centroid;
    std::size_t partner = *best;
    double dist = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < rep.clusters.size(); ++k) {
      const double dd = std::abs(rep.clusters[k].centroid - std::conj(up));
      if (dd < dist) {
        dist = dd;
        partner = k;
      }
    }
    OscillationPair pair;
    pair.upper = up;
    pair.lower = rep.clusters[partner].centroid;
    pair.cluster_upper = *best;
    pair.cluster_lower = partner;
    pair.dominant = up.real() >= max_re - rep.tol_cluster;
    rep.oscillation = pair;
  }
  if (!sp.values.empty() && std::abs(sp.values.front()) <= rep.tol_cluster &&
      rep.clusters[rep.cluster_of.front()].algebraic == 1)
    rep.stationary_index = 0;
  return rep;
}

}  // namespace cbt
