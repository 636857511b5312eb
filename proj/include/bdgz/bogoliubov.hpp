#ifndef BDGZ_BOGOLIUBOV_HPP
#define BDGZ_BOGOLIUBOV_HPP

// Symplectic diagonalization of the quadratic form: eigenproblem
// eta M V = omega V, V = (X; Y), the canonical transformation
// T = [[X*, -Y*], [-Y, X]] (rows = modes), and the zero mode P, Q, mass.

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "bdgz/detail/cluster.hpp"
#include "bdgz/error.hpp"
#include "bdgz/quadform.hpp"

namespace bdgz {

struct DiagonalizeOptions {
  double zero_tol_rel = 1e-7;        // zero cluster: |lambda| <= zero_tol_rel * ||M||
  double degeneracy_tol_rel = 1e-9;  // degenerate frequencies, relative to ||M||
  double norm_floor = 1e-8;          // smaller |V^+ eta V| (unit V) counts as null-norm
};

struct SymplecticSpectrum {
  int f = 0;
  Eigen::VectorXd omega;      // proper frequencies, ascending
  Eigen::MatrixXcd X, Y;      // f x n_proper; column n is (X^n, Y^n)
  Eigen::VectorXd eta_norms;  // V^+ eta V per proper mode after normalization
  bool stable = true;
  std::vector<cplx> unstable_modes;  // complex or null-norm eigenvalues
  std::vector<cplx> zero_cluster;    // eigenvalues within zero_tol of 0
  Eigen::MatrixXcd zero_vectors;     // their eigenvectors (unit Euclidean norm)
  std::vector<cplx> eigenvalues;     // all eigenvalues of eta M, ascending real part
  double m_norm = 0.0;               // spectral norm of M
  double zero_tol = 0.0;
  double pairing_defect = 0.0;       // max over proper modes of the distance from -omega to the spectrum
  double orthonormality_defect = 0.0;  // max |V^m+ eta V^n - delta_mn| over proper modes

  Eigen::Index proper_count() const { return omega.size(); }
  Eigen::VectorXcd mode(Eigen::Index n) const {
    Eigen::VectorXcd v(2 * f);
    v << X.col(n), Y.col(n);
    return v;
  }
};

struct ZeroMode {
  Eigen::VectorXcd P;  // eta M P = 0, normalized so P[0] = 1
  Eigen::VectorXcd Q;  // eta M Q = -i P / mass, Q^+ eta P = i
  double mass_mu = 0.0;
  // The zero pair is a Jordan block, so its computed eigenvalues split like
  // sqrt(rounding); their mean is the well-conditioned frequency estimate.
  double omega0_residual = 0.0;   // |mean of the zero cluster|
  double omega0_spread = 0.0;     // largest |lambda - mean| in the zero cluster
  double p_residual = 0.0;        // ||eta M P|| / ||P||
  double q_residual = 0.0;        // ||eta M Q + i P / mass||
  cplx q_eta_p{0.0, 0.0};         // Q^+ eta P
  cplx p_eta_p{0.0, 0.0};         // P^+ eta P
  double pattern_deviation = 0.0; // off-pattern weight relative to (delta_m0, -delta_m0)
  bool pattern_warning = false;
  Eigen::VectorXcd momentum_coefficients;  // eta P: weights of (a_0^+ .. a_{f-1}^+, a_0 .. a_{f-1})
};

struct CanonicalTransform {
  Eigen::MatrixXcd T;  // 2f x 2f
  std::vector<Eigen::Index> proper_slots;  // mode slots filled by proper modes
  std::optional<Eigen::Index> zero_slot;
  double proper_block_deviation = 0.0;     // max |T eta T^+ eta - 1| over proper rows
  std::optional<double> full_deviation;    // same over all rows, when every slot is filled
};

namespace detail {

inline double hermitian_norm(const Eigen::MatrixXcd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(m, Eigen::EigenvaluesOnly);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

inline cplx eta_dot(const Eigen::VectorXcd& a, const Eigen::VectorXd& eta, const Eigen::VectorXcd& b) {
  return (a.conjugate().array() * eta.array().cast<cplx>() * b.array()).sum();
}

// Partner vector Sigma conj(v): swaps the X and Y halves and conjugates.
inline Eigen::VectorXcd partner(const Eigen::VectorXcd& v) {
  const Eigen::Index f = v.size() / 2;
  Eigen::VectorXcd out(v.size());
  out << v.tail(f).conjugate(), v.head(f).conjugate();
  return out;
}

}  // namespace detail

// Full eigen-decomposition of eta M, classified into the +omega family
// (eta-norm > 0), the -omega family, the zero cluster and unstable
// (complex or null-norm) eigenvalues. The +omega family is returned
// eta-normalized; degenerate frequencies get a canonical eta-orthonormal basis.
inline SymplecticSpectrum diagonalize(const Eigen::MatrixXcd& M, const Eigen::VectorXd& eta,
                                      const DiagonalizeOptions& opts = {}) {
  const Eigen::Index n2 = M.rows();
  if (M.cols() != n2 || eta.size() != n2 || n2 % 2 != 0 || n2 == 0)
    throw DimensionError("M must be 2f x 2f with a matching metric");
  const Eigen::Index f = n2 / 2;

  SymplecticSpectrum out;
  out.f = static_cast<int>(f);
  out.m_norm = detail::hermitian_norm(M);
  if (!(out.m_norm > 0.0) || !M.allFinite()) throw NumericalError("M is zero or not finite");
  if ((M - M.adjoint()).cwiseAbs().maxCoeff() > 1e-10 * out.m_norm)
    throw NumericalError("M is not Hermitian");
  out.zero_tol = opts.zero_tol_rel * out.m_norm;

  const Eigen::MatrixXcd etaM = eta.cast<cplx>().asDiagonal() * M;
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(etaM);
  if (es.info() != Eigen::Success) throw NumericalError("eigensolver failed on eta M");

  std::vector<Eigen::Index> order(n2);
  for (Eigen::Index i = 0; i < n2; ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    return es.eigenvalues()[a].real() < es.eigenvalues()[b].real();
  });

  std::vector<double> plus_values, minus_values;
  std::vector<Eigen::VectorXcd> plus_vectors, zero_vectors;
  for (Eigen::Index idx : order) {
    const cplx lambda = es.eigenvalues()[idx];
    out.eigenvalues.push_back(lambda);
    Eigen::VectorXcd v = es.eigenvectors().col(idx);
    v.normalize();
    if (std::abs(lambda) <= out.zero_tol) {
      out.zero_cluster.push_back(lambda);
      zero_vectors.push_back(v);
      continue;
    }
    if (std::abs(lambda.imag()) > out.zero_tol) {
      out.unstable_modes.push_back(lambda);
      continue;
    }
    const double norm = detail::eta_dot(v, eta, v).real();
    if (norm > opts.norm_floor) {
      plus_values.push_back(lambda.real());
      plus_vectors.push_back(v);
    } else if (norm < -opts.norm_floor) {
      minus_values.push_back(lambda.real());
    } else {
      out.unstable_modes.push_back(lambda);
    }
  }
  if (out.zero_cluster.size() > 2)
    throw StructureError("zero cluster of size " + std::to_string(out.zero_cluster.size()) +
                         ": more than one zero mode is not supported");
  out.stable = out.unstable_modes.empty();
  out.zero_vectors.resize(n2, static_cast<Eigen::Index>(zero_vectors.size()));
  for (std::size_t j = 0; j < zero_vectors.size(); ++j) out.zero_vectors.col(static_cast<Eigen::Index>(j)) = zero_vectors[j];

  const Eigen::Index np = static_cast<Eigen::Index>(plus_values.size());
  Eigen::VectorXd values(np);
  Eigen::MatrixXcd vectors(n2, np);
  for (Eigen::Index j = 0; j < np; ++j) {
    values[j] = plus_values[j];
    vectors.col(j) = plus_vectors[j];
  }

  // Canonical eta-orthonormal basis in each degenerate cluster, ordered by
  // the pivot row of the X half.
  for (auto [b, e] : detail::clusters(values, opts.degeneracy_tol_rel * out.m_norm)) {
    const Eigen::Index c = e - b;
    Eigen::MatrixXcd block = detail::canonical_cluster_basis(vectors.middleCols(b, c), f, eta);
    if (c == 1) block.col(0) /= std::sqrt(detail::eta_dot(block.col(0), eta, block.col(0)).real());
    vectors.middleCols(b, c) = block;
  }

  out.omega = values;
  out.X.resize(f, np);
  out.Y.resize(f, np);
  out.eta_norms.resize(np);
  for (Eigen::Index j = 0; j < np; ++j) {
    Eigen::VectorXcd v = vectors.col(j);
    detail::fix_phase(v);
    out.X.col(j) = v.head(f);
    out.Y.col(j) = v.tail(f);
    out.eta_norms[j] = detail::eta_dot(v, eta, v).real();
  }

  for (Eigen::Index j = 0; j < np; ++j) {
    double best = std::numeric_limits<double>::infinity();
    for (double m : minus_values) best = std::min(best, std::abs(m + values[j]));
    out.pairing_defect = std::max(out.pairing_defect, best);
  }
  for (Eigen::Index a = 0; a < np; ++a)
    for (Eigen::Index b = 0; b < np; ++b) {
      const cplx g = detail::eta_dot(out.mode(a), eta, out.mode(b));
      out.orthonormality_defect = std::max(out.orthonormality_defect, std::abs(g - cplx(a == b ? 1.0 : 0.0, 0.0)));
    }
  return out;
}

// Zero mode of eta M. P spans the null space of M (equivalently of eta M);
// Q solves M Q = -i eta P / mass in the pseudo-inverse sense, is projected
// eta-orthogonal to every proper mode and its partner, and is fixed within
// Q + c P by Q^+ eta Q = 0 and Re(P^+ Q) = 0. The mass follows from Q^+ eta P = i.
inline ZeroMode extract_zero_mode(const SymplecticSpectrum& spectrum, const Eigen::MatrixXcd& M,
                                  const Eigen::VectorXd& eta, double zero_tol = -1.0, double pattern_tol = 1e-6) {
  const Eigen::Index n2 = M.rows();
  const Eigen::Index f = n2 / 2;
  if (spectrum.f != f) throw DimensionError("spectrum does not match M");
  const double tol = zero_tol > 0.0 ? zero_tol : spectrum.zero_tol;

  if (spectrum.zero_cluster.empty())
    throw ZeroModeMissing("no eigenvalue of eta M within " + sci(tol) +
                          " of zero; the condensate may be unconverged");

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(M);
  std::vector<Eigen::Index> by_size(n2);
  for (Eigen::Index i = 0; i < n2; ++i) by_size[i] = i;
  std::sort(by_size.begin(), by_size.end(), [&](Eigen::Index a, Eigen::Index b) {
    return std::abs(es.eigenvalues()[a]) < std::abs(es.eigenvalues()[b]);
  });
  if (std::abs(es.eigenvalues()[by_size[0]]) > tol)
    throw ZeroModeMissing("M has no null vector within tolerance");
  if (n2 > 1 && std::abs(es.eigenvalues()[by_size[1]]) <= tol)
    throw StructureError("M has a degenerate null space (e.g. a non-interacting condensate); "
                         "the collective mass is undefined");

  ZeroMode z;
  Eigen::VectorXcd p = es.eigenvectors().col(by_size[0]);
  Eigen::Index lead = 0;
  if (std::abs(p[0]) < 0.1 * p.cwiseAbs().maxCoeff()) p.cwiseAbs().maxCoeff(&lead);
  p /= p[lead];
  z.P = p;

  Eigen::VectorXcd pattern = Eigen::VectorXcd::Zero(n2);
  pattern[0] = 1.0;
  pattern[f] = -1.0;
  z.pattern_deviation = (p - pattern).squaredNorm() / p.squaredNorm();
  z.pattern_warning = z.pattern_deviation > pattern_tol;

  // Pseudo-inverse solve of M Qt = -i eta P.
  const Eigen::VectorXcd rhs = cplx(0.0, -1.0) * (eta.cast<cplx>().asDiagonal() * p);
  const Eigen::VectorXcd coeff = es.eigenvectors().adjoint() * rhs;
  Eigen::VectorXcd scaled = Eigen::VectorXcd::Zero(n2);
  for (Eigen::Index i = 0; i < n2; ++i)
    if (std::abs(es.eigenvalues()[i]) > tol) scaled[i] = coeff[i] / es.eigenvalues()[i];
  Eigen::VectorXcd q = es.eigenvectors() * scaled;

  for (Eigen::Index j = 0; j < spectrum.proper_count(); ++j) {
    const Eigen::VectorXcd v = spectrum.mode(j);
    const Eigen::VectorXcd w = detail::partner(v);
    q -= detail::eta_dot(v, eta, q) / detail::eta_dot(v, eta, v) * v;
    q -= detail::eta_dot(w, eta, q) / detail::eta_dot(w, eta, w) * w;
  }

  const cplx qp = detail::eta_dot(q, eta, p);  // = i / mass
  const cplx mass = cplx(0.0, -1.0) * qp;
  if (!(mass.real() > 0.0) || std::abs(mass.imag()) > 1e-6 * std::abs(mass))
    throw StructureError("collective mass is not a positive real number");
  z.mass_mu = mass.real();
  q /= z.mass_mu;

  const double qq = detail::eta_dot(q, eta, q).real();
  q += cplx(0.0, 0.5 * qq) * p;
  q -= p.dot(q).real() / p.squaredNorm() * p;
  z.Q = q;

  const Eigen::MatrixXcd etaM = eta.cast<cplx>().asDiagonal() * M;
  z.p_residual = (etaM * z.P).norm() / z.P.norm();
  z.q_residual = (etaM * z.Q + cplx(0.0, 1.0) * z.P / z.mass_mu).norm();
  z.q_eta_p = detail::eta_dot(z.Q, eta, z.P);
  z.p_eta_p = detail::eta_dot(z.P, eta, z.P);
  cplx mean = 0.0;
  for (const cplx& l : spectrum.zero_cluster) mean += l;
  mean /= static_cast<double>(spectrum.zero_cluster.size());
  z.omega0_residual = std::abs(mean);
  for (const cplx& l : spectrum.zero_cluster) z.omega0_spread = std::max(z.omega0_spread, std::abs(l - mean));
  z.momentum_coefficients = eta.cast<cplx>().asDiagonal() * z.P;
  return z;
}

// Rows of T per mode slot n: top row (X^n*, -Y^n*), bottom row (-Y^n, X^n).
// With a zero mode, slot 0 carries the pair built from V0 = Q - (i/2) P, which
// has unit eta-norm and is eta-orthogonal to its partner when Q^+ eta Q = 0.
// Without an extracted zero mode, a non-defective zero cluster (decoupled
// oscillator at zero frequency) fills slot 0 from its positive-norm vector.
inline CanonicalTransform canonical_transform(const SymplecticSpectrum& spectrum,
                                              const std::optional<ZeroMode>& zero_mode = std::nullopt,
                                              double tolerance = 1e-10) {
  const Eigen::Index f = spectrum.f;
  const Eigen::Index np = spectrum.proper_count();
  Eigen::VectorXd eta(2 * f);
  eta.head(f).setOnes();
  eta.tail(f).setConstant(-1.0);

  CanonicalTransform out;
  out.T = Eigen::MatrixXcd::Zero(2 * f, 2 * f);
  const Eigen::Index zero_slots = f - np;
  if (zero_slots < 0 || zero_slots > 1)
    throw StructureError("spectrum does not have f or f-1 proper modes; cannot build T");

  auto place = [&](Eigen::Index slot, const Eigen::VectorXcd& v) {
    out.T.block(slot, 0, 1, f) = v.head(f).adjoint();
    out.T.block(slot, f, 1, f) = -v.tail(f).adjoint();
    out.T.block(f + slot, 0, 1, f) = -v.tail(f).transpose();
    out.T.block(f + slot, f, 1, f) = v.head(f).transpose();
  };

  for (Eigen::Index j = 0; j < np; ++j) {
    out.proper_slots.push_back(j + zero_slots);
    place(j + zero_slots, spectrum.mode(j));
  }
  if (zero_slots == 1) {
    std::optional<Eigen::VectorXcd> v0;
    if (zero_mode) {
      v0 = Eigen::VectorXcd(zero_mode->Q - cplx(0.0, 0.5) * zero_mode->P);
    } else {
      for (Eigen::Index j = 0; j < spectrum.zero_vectors.cols(); ++j) {
        const Eigen::VectorXcd v = spectrum.zero_vectors.col(j);
        const double n = detail::eta_dot(v, eta, v).real();
        if (n > 0.5) v0 = Eigen::VectorXcd(v / std::sqrt(n));
      }
    }
    if (v0) {
      Eigen::VectorXcd v = *v0;
      detail::fix_phase(v);
      place(0, v);
      out.zero_slot = 0;
    }
  }

  std::vector<Eigen::Index> rows;
  for (Eigen::Index s : out.proper_slots) rows.push_back(s);
  for (Eigen::Index s : out.proper_slots) rows.push_back(f + s);
  const Eigen::Index nr = static_cast<Eigen::Index>(rows.size());
  Eigen::MatrixXcd tp(nr, 2 * f);
  Eigen::VectorXd eta_rows(nr);
  for (Eigen::Index i = 0; i < nr; ++i) {
    tp.row(i) = out.T.row(rows[i]);
    eta_rows[i] = eta[rows[i]];
  }
  const Eigen::MatrixXcd gram = tp * eta.cast<cplx>().asDiagonal() * tp.adjoint() * eta_rows.cast<cplx>().asDiagonal();
  out.proper_block_deviation = (gram - Eigen::MatrixXcd::Identity(nr, nr)).cwiseAbs().maxCoeff();

  if (zero_slots == 0 || out.zero_slot) {
    const Eigen::MatrixXcd full = out.T * eta.cast<cplx>().asDiagonal() * out.T.adjoint() * eta.cast<cplx>().asDiagonal();
    out.full_deviation = (full - Eigen::MatrixXcd::Identity(2 * f, 2 * f)).cwiseAbs().maxCoeff();
  }
  if (out.proper_block_deviation > tolerance)
    throw NumericalError("canonical condition violated on the proper block: deviation " +
                             sci(out.proper_block_deviation),
                         out.proper_block_deviation);
  return out;
}

}  // namespace bdgz

#endif  // BDGZ_BOGOLIUBOV_HPP
