#ifndef BDGZ_BASIS_HPP
#define BDGZ_BASIS_HPP

// Lowest f eigenpairs of the effective single-particle Hamiltonian
//   H_eff = -Lap/2 + V_tr + g N0 |phi0|^2,
// whose eigenfunctions expand the fluctuation field.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "bdgz/detail/cluster.hpp"
#include "bdgz/error.hpp"
#include "bdgz/gp.hpp"
#include "bdgz/grid.hpp"

namespace bdgz {

struct BasisOptions {
  Eigen::Index dense_limit = 10000;  // above this node count the iterative solver is used
  double degeneracy_tol = 1e-9;
  double iterative_tol = 1e-11;      // relative eigen-residual of the iterative solver
  int max_iterations = 20000;
  int filter_degree = 16;
};

struct BasisSet {
  int f = 0;
  Eigen::VectorXd mu;           // ascending
  Eigen::MatrixXcd functions;   // column n is phi_n, normalized in the grid L2 product
  Grid grid;
  bool real_valued = true;
  bool splits_degenerate_cluster = false;  // truncation cuts through a degenerate level
};

inline SeparableOperator build_effective_hamiltonian(const CondensateState& state) {
  return gp_hamiltonian(state.grid, state.params, state.scheme, state.phi0);
}

// Max-norm deviation of the Gram matrix from the identity.
inline double gram_defect(const BasisSet& b) {
  const Eigen::MatrixXcd gram = b.functions.adjoint() * b.functions * b.grid.weight();
  return (gram - Eigen::MatrixXcd::Identity(b.f, b.f)).cwiseAbs().maxCoeff();
}

namespace detail {

struct EigenPairs {
  Eigen::VectorXd values;
  Eigen::MatrixXd vectors;  // Euclidean-orthonormal columns
};

// Gershgorin upper bound on the spectrum of a separable operator.
inline double gershgorin_upper(const SeparableOperator& h) {
  const Grid& g = h.grid();
  Eigen::VectorXd bound = h.diagonal();
  for (int a = 0; a < g.dimension(); ++a) {
    const Eigen::MatrixXd& m = h.axis_matrices()[a];
    Eigen::VectorXd row(m.rows());
    for (Eigen::Index i = 0; i < m.rows(); ++i) row[i] = m(i, i) + (m.row(i).cwiseAbs().sum() - std::abs(m(i, i)));
    const Eigen::Index s = g.stride(a);
    for (Eigen::Index i = 0; i < bound.size(); ++i) bound[i] += row[(i / s) % m.rows()];
  }
  return bound.maxCoeff();
}

// Chebyshev-filtered subspace iteration for the lowest `count` eigenpairs.
// A block method, so degenerate levels are resolved in full.
inline EigenPairs lowest_eigenpairs_iterative(const SeparableOperator& h, Eigen::Index count,
                                              const BasisOptions& opts) {
  const Eigen::Index n = h.size();
  const Eigen::Index block = std::min<Eigen::Index>(n, count + std::max<Eigen::Index>(8, count / 4));
  std::mt19937_64 rng(0x5eedULL);
  std::normal_distribution<double> normal;
  Eigen::MatrixXd x(n, block);
  for (Eigen::Index j = 0; j < block; ++j)
    for (Eigen::Index i = 0; i < n; ++i) x(i, j) = normal(rng);
  x = Eigen::HouseholderQR<Eigen::MatrixXd>(x).householderQ() * Eigen::MatrixXd::Identity(n, block);

  const double upper = gershgorin_upper(h) * (1.0 + 1e-12) + 1e-12;
  double worst = 0.0;
  for (int it = 0; it < opts.max_iterations; ++it) {
    // Rayleigh-Ritz.
    const Eigen::MatrixXd hx = h.apply(x);
    const Eigen::MatrixXd g = x.transpose() * hx;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (g + g.transpose()));
    x = x * es.eigenvectors();
    const Eigen::MatrixXd hx_rot = hx * es.eigenvectors();
    const Eigen::VectorXd theta = es.eigenvalues();

    worst = 0.0;
    for (Eigen::Index j = 0; j < count; ++j) {
      const double r = (hx_rot.col(j) - theta[j] * x.col(j)).norm();
      worst = std::max(worst, r / std::max(1.0, std::abs(theta[j])));
    }
    if (worst <= opts.iterative_tol) return {theta.head(count), x.leftCols(count)};

    // Damp the interval [theta_max, upper] with a Chebyshev polynomial.
    const double lo = theta[block - 1];
    const double e = 0.5 * (upper - lo);
    const double c = 0.5 * (upper + lo);
    if (!(e > 0.0)) break;
    Eigen::MatrixXd prev = x;
    Eigen::MatrixXd cur = (h.apply(x) - c * x) / e;
    for (int d = 2; d <= opts.filter_degree; ++d) {
      Eigen::MatrixXd next = 2.0 * (h.apply(cur) - c * cur) / e - prev;
      prev = std::move(cur);
      cur = std::move(next);
    }
    x = Eigen::HouseholderQR<Eigen::MatrixXd>(cur).householderQ() * Eigen::MatrixXd::Identity(n, block);
  }
  throw NumericalError("iterative eigensolver did not converge; worst relative residual " + sci(worst),
                       worst);
}

inline EigenPairs lowest_eigenpairs(const SeparableOperator& h, Eigen::Index count, const BasisOptions& opts,
                                    double* next_value) {
  const Eigen::Index n = h.size();
  if (n <= opts.dense_limit) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h.dense());
    if (es.info() != Eigen::Success) throw NumericalError("dense eigensolver failed");
    if (next_value) *next_value = count < n ? es.eigenvalues()[count] : std::numeric_limits<double>::infinity();
    return {es.eigenvalues().head(count), es.eigenvectors().leftCols(count)};
  }
  const Eigen::Index extra = std::min<Eigen::Index>(n, count + 1);
  EigenPairs all = lowest_eigenpairs_iterative(h, extra, opts);
  if (next_value) *next_value = extra > count ? all.values[count] : std::numeric_limits<double>::infinity();
  return {all.values.head(count), all.vectors.leftCols(count)};
}

// Momentum-like operator sum_a c_a d/dx_a with incommensurate weights, used to
// split degenerate plane-wave levels into e^{+ik.r} / e^{-ik.r} partners.
inline SeparableOperator momentum_probe(const Grid& grid) {
  static constexpr double weights[3] = {1.0, 0.7548776662466927, 0.5698402909980532};
  std::vector<Eigen::MatrixXd> axes;
  for (int a = 0; a < grid.dimension(); ++a)
    axes.push_back(weights[a] * spectral_first_derivative(grid.points_per_axis()[a], grid.box_lengths()[a]));
  return {grid, std::move(axes), Eigen::VectorXd::Zero(grid.size())};
}

}  // namespace detail

// Degenerate levels (|mu_i - mu_j| <= degeneracy_tol, relative to max(1, |mu|))
// are returned in a deterministic basis: plane-wave partners e^{+-ik.r} on
// periodic grids, otherwise a basis pinned to the dominant nodes.
inline BasisSet solve_basis(const SeparableOperator& h_eff, int f, const BasisOptions& opts = {}) {
  const Grid& grid = h_eff.grid();
  if (f < 1 || f > grid.size())
    throw ConfigError("truncation level f=" + std::to_string(f) + " outside [1, " + std::to_string(grid.size()) + "]");

  double next_value = 0.0;
  detail::EigenPairs pairs = detail::lowest_eigenpairs(h_eff, f, opts, &next_value);

  BasisSet out;
  out.f = f;
  out.grid = grid;
  out.mu = pairs.values;
  Eigen::MatrixXcd u = pairs.vectors.cast<cplx>();

  const double scale = std::max(1.0, pairs.values.cwiseAbs().maxCoeff());
  const double tol = opts.degeneracy_tol * scale;
  out.splits_degenerate_cluster = std::abs(next_value - pairs.values[f - 1]) <= tol;

  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(grid.size());
  for (auto [b, e] : detail::clusters(pairs.values, tol)) {
    const Eigen::Index c = e - b;
    if (c == 1) continue;
    Eigen::MatrixXcd block = u.middleCols(b, c);
    if (grid.boundary() == Boundary::periodic) {
      const Eigen::MatrixXd real_block = pairs.vectors.middleCols(b, c);
      const Eigen::MatrixXd k = real_block.transpose() * detail::momentum_probe(grid).apply(real_block);
      const Eigen::MatrixXcd p = cplx(0.0, -1.0) * (0.5 * (k - k.transpose())).cast<cplx>();
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(p);
      block = real_block.cast<cplx>() * es.eigenvectors();
      // Leftover momentum degeneracies (none for plane waves) are pinned like real clusters.
      for (auto [bb, ee] : detail::clusters(es.eigenvalues(), 1e-8 * std::max(1.0, es.eigenvalues().cwiseAbs().maxCoeff())))
        if (ee - bb > 1)
          block.middleCols(bb, ee - bb) = detail::canonical_cluster_basis(block.middleCols(bb, ee - bb), grid.size(), ones);
    } else {
      block = detail::canonical_cluster_basis(block, grid.size(), ones);
    }
    u.middleCols(b, c) = block;
  }

  out.real_valued = true;
  for (Eigen::Index j = 0; j < f; ++j) {
    detail::fix_phase(u.col(j));
    if (u.col(j).imag().cwiseAbs().maxCoeff() > 0.0) out.real_valued = false;
  }
  out.functions = u / std::sqrt(grid.weight());
  return out;
}

}  // namespace bdgz

#endif  // BDGZ_BASIS_HPP
