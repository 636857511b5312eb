#ifndef BDGZ_QUADFORM_HPP
#define BDGZ_QUADFORM_HPP

// Coefficient matrices of the truncated quadratic Hamiltonian
//   H = -B00 N0 / 2 + sum A_mn a_m^+ a_n + 1/2 sum (B*_mn a_m a_n + B_mn a_m^+ a_n^+)
// in the basis of effective-Hamiltonian eigenfunctions, and the 2f x 2f
// matrix M = [[A, B], [B*, A*]] with metric eta = diag(1_f, -1_f).

#include <Eigen/Dense>

#include <cstdint>
#include <cstring>
#include <string>

#include "bdgz/basis.hpp"
#include "bdgz/error.hpp"
#include "bdgz/gp.hpp"

namespace bdgz {

struct QuadraticForm {
  int f = 0;
  Eigen::MatrixXcd A;  // Hermitian
  Eigen::MatrixXcd B;  // symmetric
  Eigen::MatrixXcd d;  // Hermitian, interaction part of A
  double B00 = 0.0;
  double N0 = 0.0;
  double g = 0.0;
  double constant_term = 0.0;  // -B00 N0 / 2
  double traceA = 0.0;
  double hermiticity_defect = 0.0;  // max |A - A^+| before symmetrization
  double symmetry_defect = 0.0;     // max |B - B^T| before symmetrization
  std::uint64_t basis_hash = 0;
  std::uint64_t state_hash = 0;
};

struct BlockMatrix {
  Eigen::MatrixXcd M;
  Eigen::VectorXd eta;  // diagonal of the metric

  Eigen::MatrixXcd eta_matrix() const { return eta.cast<cplx>().asDiagonal(); }
  Eigen::MatrixXcd eta_M() const { return eta.cast<cplx>().asDiagonal() * M; }
};

struct EnergyConstants {
  double mean_field = 0.0;  // -B00 N0 / 2
  double zero_point = 0.0;  // sum_n omega_n / 2 - tr A / 2
};

namespace detail {

// 64-bit FNV-1a over raw bytes.
class Fnv1a {
 public:
  void add(const void* data, std::size_t n) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
      h_ ^= p[i];
      h_ *= 0x100000001b3ULL;
    }
  }
  template <typename T>
  void add_value(const T& v) { add(&v, sizeof(T)); }
  template <typename Derived>
  void add_matrix(const Eigen::DenseBase<Derived>& m) {
    const auto copy = m.eval();
    add(copy.data(), sizeof(typename Derived::Scalar) * static_cast<std::size_t>(copy.size()));
  }
  std::uint64_t value() const { return h_; }

 private:
  std::uint64_t h_ = 0xcbf29ce484222325ULL;
};

}  // namespace detail

inline std::uint64_t content_hash(const CondensateState& s) {
  detail::Fnv1a h;
  h.add_matrix(s.phi0);
  h.add_value(s.mu0);
  h.add_value(s.params.g);
  h.add_value(s.params.N0);
  return h.value();
}

inline std::uint64_t content_hash(const BasisSet& b) {
  detail::Fnv1a h;
  h.add_matrix(b.mu);
  h.add_matrix(b.functions);
  return h.value();
}

inline void finalize(QuadraticForm& q) {
  q.f = static_cast<int>(q.A.rows());
  q.hermiticity_defect = (q.A - q.A.adjoint()).cwiseAbs().maxCoeff();
  q.symmetry_defect = (q.B - q.B.transpose()).cwiseAbs().maxCoeff();
  q.A = 0.5 * (q.A + q.A.adjoint()).eval();
  q.B = 0.5 * (q.B + q.B.transpose()).eval();
  q.d = 0.5 * (q.d + q.d.adjoint()).eval();
  q.B00 = q.B(0, 0).real();
  q.constant_term = -0.5 * q.B00 * q.N0;
  q.traceA = q.A.trace().real();
}

// Builds a quadratic form directly from A and B (synthetic inputs, debug
// injection). d is taken as zero and N0 as given.
inline QuadraticForm quadratic_form_from_matrices(const Eigen::MatrixXcd& A, const Eigen::MatrixXcd& B,
                                                  double N0 = 0.0) {
  if (A.rows() != A.cols() || B.rows() != B.cols() || A.rows() != B.rows() || A.rows() < 1)
    throw DimensionError("A and B must be square matrices of equal size");
  QuadraticForm q;
  q.A = A;
  q.B = B;
  q.d = Eigen::MatrixXcd::Zero(A.rows(), A.cols());
  q.N0 = N0;
  finalize(q);
  if (!q.A.allFinite() || !q.B.allFinite()) throw NumericalError("non-finite quadratic form entries");
  return q;
}

// A_mn = (mu_m - mu0) delta_mn + d_mn,
// d_mn = g N0 int conj(phi_m) |phi0|^2 phi_n,
// B_mn = g N0 int phi0^2 conj(phi_m) conj(phi_n),
// all by the same nodal quadrature as the grid inner product.
inline QuadraticForm assemble(const BasisSet& basis, const CondensateState& state, double consistency_tol = 1e-8) {
  if (basis.grid != state.grid) throw DimensionError("basis and condensate live on different grids");
  const double gn = state.params.coupling();
  const double w = state.grid.weight();

  const Eigen::VectorXcd density = (gn * w) * state.phi0.array().abs2().cast<cplx>().matrix();
  const Eigen::VectorXcd pair = (gn * w) * state.phi0.array().square().matrix();
  const Eigen::MatrixXcd& phi = basis.functions;

  QuadraticForm q;
  q.d = phi.adjoint() * density.asDiagonal() * phi;
  q.B = phi.adjoint() * pair.asDiagonal() * phi.conjugate();
  q.A = q.d;
  for (int m = 0; m < basis.f; ++m) q.A(m, m) += basis.mu[m] - state.mu0;
  q.N0 = state.params.N0;
  q.g = state.params.g;
  q.basis_hash = content_hash(basis);
  q.state_hash = content_hash(state);
  finalize(q);

  if (!q.A.allFinite() || !q.B.allFinite()) throw NumericalError("non-finite quadratic form entries");
  const double defect = std::max(q.hermiticity_defect, q.symmetry_defect);
  if (defect > consistency_tol)
    throw NumericalError("quadratic form asymmetry " + sci(defect) + " exceeds tolerance", defect);
  return q;
}

inline BlockMatrix build_M(const QuadraticForm& q) {
  const Eigen::Index f = q.f;
  BlockMatrix out;
  out.M.resize(2 * f, 2 * f);
  out.M.topLeftCorner(f, f) = q.A;
  out.M.topRightCorner(f, f) = q.B;
  out.M.bottomLeftCorner(f, f) = q.B.conjugate();
  out.M.bottomRightCorner(f, f) = q.A.conjugate();
  out.eta.resize(2 * f);
  out.eta.head(f).setOnes();
  out.eta.tail(f).setConstant(-1.0);
  return out;
}

// `omega` holds the proper (non-zero-mode) frequencies; no regularization of
// the zero-point sum is applied.
inline EnergyConstants ground_energy_constants(const QuadraticForm& q, const Eigen::VectorXd& omega) {
  return {-0.5 * q.B00 * q.N0, 0.5 * omega.sum() - 0.5 * q.traceA};
}

}  // namespace bdgz

#endif  // BDGZ_QUADFORM_HPP
