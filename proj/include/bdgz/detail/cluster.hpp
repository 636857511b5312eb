#ifndef BDGZ_DETAIL_CLUSTER_HPP
#define BDGZ_DETAIL_CLUSTER_HPP

#include <Eigen/Dense>

#include <algorithm>
#include <complex>
#include <numeric>
#include <vector>

namespace bdgz::detail {

// Groups of consecutive indices whose sorted values lie within `tol` of the
// previous member.
inline std::vector<std::pair<Eigen::Index, Eigen::Index>> clusters(const Eigen::VectorXd& sorted, double tol) {
  std::vector<std::pair<Eigen::Index, Eigen::Index>> out;
  Eigen::Index begin = 0;
  for (Eigen::Index i = 1; i <= sorted.size(); ++i) {
    if (i == sorted.size() || sorted[i] - sorted[i - 1] > tol) {
      out.emplace_back(begin, i);
      begin = i;
    }
  }
  return out;
}

// Multiplies v by the conjugate phase of its first near-maximal component, so
// that component becomes real positive.
inline void fix_phase(Eigen::Ref<Eigen::VectorXcd> v) {
  const double peak = v.cwiseAbs().maxCoeff();
  if (peak == 0.0) return;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (std::abs(v[i]) >= (1.0 - 1e-8) * peak) {
      v *= std::conj(v[i]) / std::abs(v[i]);
      return;
    }
  }
}

// Canonical basis of the column span of v. Pivot rows are chosen among the
// first `pivot_rows` rows by greedy pivoting, the block is reduced so that it
// is the identity at the pivots, and the columns are orthonormalized in the
// order of their pivot rows under the (possibly indefinite) diagonal metric.
// Columns whose metric norm is not positive are left unnormalized.
inline Eigen::MatrixXcd canonical_cluster_basis(const Eigen::MatrixXcd& v, Eigen::Index pivot_rows,
                                                const Eigen::VectorXd& metric,
                                                std::vector<Eigen::Index>* pivots_out = nullptr) {
  const Eigen::Index c = v.cols();
  if (c <= 1) {
    if (pivots_out) {
      Eigen::Index arg = 0;
      if (c == 1) v.col(0).head(pivot_rows).cwiseAbs().maxCoeff(&arg);
      *pivots_out = {arg};
    }
    return v;
  }
  // Greedy pivoting on the row norms of an orthonormal basis of the span. Near
  // ties go to the lowest row, so symmetric grids pick the same rows whatever
  // basis the span was delivered in.
  Eigen::HouseholderQR<Eigen::MatrixXcd> hqr(v);
  Eigen::MatrixXcd r = (hqr.householderQ() * Eigen::MatrixXcd::Identity(v.rows(), c)).topRows(pivot_rows);
  std::vector<Eigen::Index> piv(c);
  for (Eigen::Index j = 0; j < c; ++j) {
    const Eigen::VectorXd norms = r.rowwise().squaredNorm();
    const double peak = norms.maxCoeff();
    Eigen::Index p = 0;
    while (norms[p] < (1.0 - 1e-6) * peak) ++p;
    piv[j] = p;
    const Eigen::RowVectorXcd u = r.row(p) / std::sqrt(norms[p]);
    r -= (r * u.adjoint()) * u;
  }
  std::sort(piv.begin(), piv.end());

  Eigen::MatrixXcd at_pivots(c, c);
  for (Eigen::Index j = 0; j < c; ++j) at_pivots.row(j) = v.row(piv[j]);
  Eigen::MatrixXcd w = v * at_pivots.partialPivLu().inverse();

  auto metric_dot = [&](const Eigen::VectorXcd& a, const Eigen::VectorXcd& b) {
    return (a.conjugate().array() * metric.array().cast<std::complex<double>>() * b.array()).sum();
  };
  for (int pass = 0; pass < 2; ++pass) {
    for (Eigen::Index j = 0; j < c; ++j) {
      for (Eigen::Index i = 0; i < j; ++i) {
        const std::complex<double> nii = metric_dot(w.col(i), w.col(i));
        if (std::abs(nii) == 0.0) continue;
        w.col(j) -= (metric_dot(w.col(i), w.col(j)) / nii) * w.col(i);
      }
      const double njj = metric_dot(w.col(j), w.col(j)).real();
      if (njj > 0.0) w.col(j) /= std::sqrt(njj);
    }
  }
  if (pivots_out) *pivots_out = piv;
  return w;
}

}  // namespace bdgz::detail

#endif  // BDGZ_DETAIL_CLUSTER_HPP
