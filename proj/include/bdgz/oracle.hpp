#ifndef BDGZ_ORACLE_HPP
#define BDGZ_ORACLE_HPP

// Closed-form results for the homogeneous gas and a direct grid-level solve of
// the linearized GP equations. Cross-checks only: nothing here reuses the
// basis/quadform/bogoliubov assembly.

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <complex>
#include <vector>

#include "bdgz/error.hpp"
#include "bdgz/gp.hpp"
#include "bdgz/grid.hpp"

namespace bdgz::oracle {

struct HomogeneousParams {
  double gn = 0.0;  // g N0 / V
  double volume = 1.0;
  std::vector<Eigen::VectorXd> wavevectors;
};

// All wavevectors of a periodic grid, in the grid's mode order.
inline HomogeneousParams homogeneous_params(const Grid& grid, double g, double N0) {
  if (grid.boundary() != Boundary::periodic) throw ConfigError("homogeneous oracle needs a periodic box");
  HomogeneousParams h;
  h.volume = grid.volume();
  h.gn = g * N0 / h.volume;
  for (Eigen::Index i = 0; i < grid.size(); ++i) {
    Eigen::VectorXd k(grid.dimension());
    for (int a = 0; a < grid.dimension(); ++a) {
      const int ia = static_cast<int>((i / grid.stride(a)) % grid.points_per_axis()[a]);
      k[a] = grid.wavenumber(a, grid.mode_indices(a)[ia]);
    }
    h.wavevectors.push_back(k);
  }
  return h;
}

inline double dispersion(double k2, double gn) {
  const double eps = 0.5 * k2;
  return std::sqrt(std::max(0.0, eps * (eps + 2.0 * gn)));
}

inline double dispersion(const Eigen::VectorXd& k, double gn) { return dispersion(k.squaredNorm(), gn); }

struct Amplitudes {
  double X = 1.0;
  double Y = 0.0;
};

// Magnitudes of the b_k = X a_k - Y a_{-k}^+ coefficients.
inline Amplitudes analytic_amplitudes(double k2, double gn) {
  if (!(k2 > 0.0)) throw ConfigError("analytic amplitudes are undefined at k = 0");
  const double w = dispersion(k2, gn);
  const double ratio = (0.5 * k2 + gn) / w;
  return {std::sqrt(0.5 * (ratio + 1.0)), std::sqrt(0.5 * (ratio - 1.0))};
}

inline Amplitudes analytic_amplitudes(const Eigen::VectorXd& k, double gn) {
  return analytic_amplitudes(k.squaredNorm(), gn);
}

struct AnalyticZeroMode {
  Eigen::Vector2cd P;
  Eigen::Vector2cd Q;
  double mass_mu = 0.0;
};

inline AnalyticZeroMode analytic_zero_mode(double gn) {
  if (!(gn > 0.0)) throw ConfigError("zero-mode mass is undefined for gn <= 0");
  AnalyticZeroMode z;
  z.P << 1.0, -1.0;
  z.Q << cplx(0.0, -0.5), cplx(0.0, -0.5);
  z.mass_mu = 1.0 / gn;
  return z;
}

// 1/2 sum_{k != 0} omega_k - 1/2 sum_k (k^2/2 + gn) over the given wavevectors.
inline double homogeneous_zero_point(const std::vector<Eigen::VectorXd>& ks, double gn) {
  double sum = 0.0;
  for (const auto& k : ks) {
    const double k2 = k.squaredNorm();
    if (k2 > 0.0) sum += 0.5 * dispersion(k2, gn);
    sum -= 0.5 * (0.5 * k2 + gn);
  }
  return sum;
}

inline double homogeneous_mean_field(double g, double N0, double volume) { return -0.5 * g * N0 * N0 / volume; }

struct DirectResult {
  Eigen::VectorXd omega;      // positive frequencies, ascending, zero mode removed
  double dropped_value = 0.0; // the discarded eigenvalue nearest zero
};

// Grid-level linearized GP problem for a real condensate:
//   [[L, G], [-G, -L]] (u, v) = omega (u, v),
//   L = -Lap/2 + V + 2 g N0 phi0^2 - mu0,  G = g N0 phi0^2.
// With S = (L + G)^{1/2}, omega^2 are the eigenvalues of S (L - G) S.
inline DirectResult direct_bdg_solve(const CondensateState& state) {
  const Grid& grid = state.grid;
  const Eigen::Index n = grid.size();
  if (state.phi0.imag().cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, state.phi0.cwiseAbs().maxCoeff()))
    throw NumericalError("direct solve expects a real condensate");
  const Eigen::VectorXd phi = state.phi0.real();
  const double gn = state.params.coupling();

  // Own dense Laplacian: per-axis second-derivative matrices summed over the tensor grid.
  Eigen::MatrixXd lap = Eigen::MatrixXd::Zero(n, n);
  for (int a = 0; a < grid.dimension(); ++a) {
    const int na = grid.points_per_axis()[a];
    Eigen::MatrixXd d2 = state.scheme == LaplacianScheme::spectral
                             ? detail::spectral_second_derivative(na, grid.box_lengths()[a])
                             : detail::fd_second_derivative(na, grid.spacing(a), grid.boundary());
    const Eigen::Index s = grid.stride(a);
    for (Eigen::Index i = 0; i < n; ++i) {
      const Eigen::Index ia = (i / s) % na;
      const Eigen::Index base = i - ia * s;
      for (int j = 0; j < na; ++j) lap(i, base + j * s) += d2(ia, j);
    }
  }

  const Eigen::VectorXd trap = state.params.trap.values(grid);
  const Eigen::VectorXd dens = gn * phi.array().square();
  Eigen::MatrixXd L = -0.5 * lap;
  L.diagonal() += trap + 2.0 * dens - Eigen::VectorXd::Constant(n, state.mu0);
  L = 0.5 * (L + L.transpose()).eval();

  const Eigen::MatrixXd plus = L + Eigen::MatrixXd(dens.asDiagonal());
  const Eigen::MatrixXd minus = L - Eigen::MatrixXd(dens.asDiagonal());

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es_plus(plus);
  if (es_plus.info() != Eigen::Success) throw NumericalError("direct solve: eigensolver failed on L + G");
  const Eigen::VectorXd root = es_plus.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  const Eigen::MatrixXd S = es_plus.eigenvectors() * root.asDiagonal() * es_plus.eigenvectors().transpose();
  Eigen::MatrixXd K = S * minus * S;
  K = 0.5 * (K + K.transpose()).eval();

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(K, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw NumericalError("direct solve: eigensolver failed on S(L-G)S");
  std::vector<double> w(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double l = es.eigenvalues()[i];
    w[i] = l > 0.0 ? std::sqrt(l) : -std::sqrt(-l);
  }
  const auto nearest = std::min_element(w.begin(), w.end(), [](double a, double b) { return std::abs(a) < std::abs(b); });
  DirectResult out;
  out.dropped_value = *nearest;
  w.erase(nearest);
  std::sort(w.begin(), w.end());
  out.omega = Eigen::Map<Eigen::VectorXd>(w.data(), static_cast<Eigen::Index>(w.size()));
  return out;
}

}  // namespace bdgz::oracle

#endif  // BDGZ_ORACLE_HPP
