#ifndef BDGZ_GP_HPP
#define BDGZ_GP_HPP

// Ground state of the time-independent Gross-Pitaevskii equation
//   (-Lap/2 + V_tr + g N0 |phi0|^2) phi0 = mu0 phi0,   int |phi0|^2 = 1.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include "bdgz/error.hpp"
#include "bdgz/grid.hpp"

namespace bdgz {

struct PhysicalParams {
  double g = 0.0;   // contact coupling
  double N0 = 1.0;  // condensate atom number
  TrapPotential trap;

  // g = 4 pi a_s in units hbar = M = 1.
  static PhysicalParams from_scattering_length(double a_s, double N0, TrapPotential trap) {
    return {4.0 * std::numbers::pi * a_s, N0, std::move(trap)};
  }

  double coupling() const { return g * N0; }

  void validate() const {
    if (!std::isfinite(g) || g < 0.0) throw ConfigError("unsupported parameter: g must be finite and >= 0");
    if (!std::isfinite(N0) || !(N0 > 0.0)) throw ConfigError("unsupported parameter: N0 must be positive");
  }
};

struct SolverOptions {
  double tolerance = 1e-10;
  long max_iterations = 1'000'000;
  double step = 1.0;  // initial pseudo-time step in (0, 1]; adapted during the flow
  LaplacianScheme scheme = LaplacianScheme::spectral;
  bool record_energy = false;
};

struct CondensateState {
  Grid grid;
  PhysicalParams params;
  LaplacianScheme scheme = LaplacianScheme::spectral;
  Eigen::VectorXcd phi0;  // real, non-negative for ground states
  double mu0 = 0.0;
  double residual = 0.0;
  long iterations = 0;
  std::vector<double> energy_history;  // accepted iterates, when recorded
};

// -Lap/2 + V_tr + g N0 |phi|^2 for a given condensate profile.
inline SeparableOperator gp_hamiltonian(const Grid& grid, const PhysicalParams& params, LaplacianScheme scheme,
                                        const Eigen::VectorXcd& phi) {
  if (phi.size() != grid.size()) throw DimensionError("condensate does not match grid");
  Eigen::VectorXd w = params.trap.values(grid);
  w.array() += params.coupling() * phi.array().abs2();
  return build_laplacian(grid, scheme).scaled(-0.5).plus_diagonal(w);
}

// Energy per particle functional E = <phi|-Lap/2 + V|phi> + (g N0 / 2) int |phi|^4.
inline double gp_energy(const Grid& grid, const PhysicalParams& params, LaplacianScheme scheme,
                        const Eigen::VectorXcd& phi) {
  const SeparableOperator h0 = build_laplacian(grid, scheme).scaled(-0.5).plus_diagonal(params.trap.values(grid));
  const double kinetic_potential = inner_product(phi, h0.apply(phi), grid).real();
  const double quartic = phi.array().abs2().square().sum() * grid.weight();
  return kinetic_potential + 0.5 * params.coupling() * quartic;
}

// <phi|H_gp|phi> for normalized phi.
inline double chemical_potential(const CondensateState& s) {
  const SeparableOperator h = gp_hamiltonian(s.grid, s.params, s.scheme, s.phi0);
  return inner_product(s.phi0, h.apply(s.phi0), s.grid).real();
}

// L2 norm of (-Lap/2 + V_tr + g N0 |phi0|^2 - mu0) phi0.
inline double gp_residual(const CondensateState& s) {
  const SeparableOperator h = gp_hamiltonian(s.grid, s.params, s.scheme, s.phi0);
  const Eigen::VectorXcd r = h.apply(s.phi0) - s.mu0 * s.phi0;
  return l2_norm(r, s.grid);
}

namespace detail {

// (shift - Lap/2)^{-1}, applied in the per-axis eigenbasis of the Laplacian.
class KineticPreconditioner {
 public:
  KineticPreconditioner(const SeparableOperator& laplacian, double shift) : grid_(laplacian.grid()) {
    Eigen::VectorXd kinetic = Eigen::VectorXd::Zero(grid_.size());
    for (int a = 0; a < grid_.dimension(); ++a) {
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(laplacian.axis_matrices()[a]);
      vectors_.push_back(es.eigenvectors());
      const Eigen::Index s = grid_.stride(a);
      const Eigen::Index n = grid_.points_per_axis()[a];
      for (Eigen::Index i = 0; i < kinetic.size(); ++i) kinetic[i] += -0.5 * es.eigenvalues()[(i / s) % n];
    }
    inverse_ = (kinetic.array().max(0.0) + shift).inverse();
  }

  Eigen::VectorXd apply(Eigen::VectorXd v) const {
    for (int a = 0; a < grid_.dimension(); ++a) apply_along_axis(grid_, a, Eigen::MatrixXd(vectors_[a].transpose()), v);
    v.array() *= inverse_.array();
    for (int a = 0; a < grid_.dimension(); ++a) apply_along_axis(grid_, a, vectors_[a], v);
    return v;
  }

 private:
  Grid grid_;
  std::vector<Eigen::MatrixXd> vectors_;
  Eigen::VectorXd inverse_;
};

inline void normalize(Eigen::VectorXd& phi, const Grid& grid) { phi /= std::sqrt(phi.squaredNorm() * grid.weight()); }

}  // namespace detail

// Thomas-Fermi profile sqrt(max(0, (mu_TF - V)/(g N0))), or the ideal-gas
// ground state when the interaction is too weak for it to be meaningful.
inline Eigen::VectorXd initial_guess(const Grid& grid, const PhysicalParams& params) {
  const Eigen::VectorXd v = params.trap.values(grid);
  const double gn = params.coupling();
  Eigen::VectorXd phi(grid.size());

  double ideal_energy = 0.0;
  if (params.trap.kind == TrapPotential::Kind::harmonic)
    for (double w : params.trap.frequencies) ideal_energy += 0.5 * w;

  bool use_tf = gn > 0.0;
  if (use_tf) {
    auto norm_at = [&](double mu) { return (mu - v.array()).max(0.0).sum() * grid.weight() / gn; };
    double lo = v.minCoeff();
    double hi = lo + 1.0;
    while (norm_at(hi) < 1.0) hi = lo + 2.0 * (hi - lo);
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (lo + hi);
      (norm_at(mid) < 1.0 ? lo : hi) = mid;
    }
    const double mu_tf = hi;
    if (params.trap.kind == TrapPotential::Kind::harmonic && mu_tf < ideal_energy) use_tf = false;
    else phi = ((mu_tf - v.array()).max(0.0) / gn).sqrt();
  }
  if (!use_tf) {
    if (params.trap.kind == TrapPotential::Kind::harmonic) {
      phi.setZero();
      for (int a = 0; a < grid.dimension(); ++a) {
        const Eigen::VectorXd x = grid.node_coordinates(a);
        phi.array() += -0.5 * params.trap.frequencies[a] * x.array().square();
      }
      phi = phi.array().exp();
    } else {
      phi.setOnes();
    }
  }
  detail::normalize(phi, grid);
  return phi;
}

namespace detail {

// Preconditioned conjugate gradients for the positive definite system
// (-Lap/2 + diag(potential)) x = b.
inline Eigen::VectorXd solve_spd(const SeparableOperator& laplacian, const Eigen::VectorXd& potential,
                                 const KineticPreconditioner& pc, const Eigen::VectorXd& b, double rel_tol,
                                 int max_iterations) {
  auto op = [&](const Eigen::VectorXd& v) -> Eigen::VectorXd {
    Eigen::VectorXd y = -0.5 * laplacian.apply(v);
    y.array() += potential.array() * v.array();
    return y;
  };
  Eigen::VectorXd x = pc.apply(b);
  Eigen::VectorXd r = b - op(x);
  Eigen::VectorXd z = pc.apply(r);
  Eigen::VectorXd p = z;
  double rz = r.dot(z);
  const double target = rel_tol * b.norm();
  for (int it = 0; it < max_iterations && r.norm() > target; ++it) {
    const Eigen::VectorXd ap = op(p);
    const double alpha = rz / p.dot(ap);
    x += alpha * p;
    r -= alpha * ap;
    z = pc.apply(r);
    const double rz_next = r.dot(z);
    p = z + (rz_next / rz) * p;
    rz = rz_next;
  }
  return x;
}

}  // namespace detail

// Normalized Sobolev-gradient flow on the unit sphere. The gradient is taken
// in the metric of the current linear GP operator H(phi), which makes each
// step a damped inverse iteration: phi <- normalize((1 - tau) phi + tau gamma
// H(phi)^{-1} phi), gamma = 1 / <phi|H^{-1}|phi>. A step is accepted only if
// the energy does not increase beyond its rounding floor; otherwise tau is
// halved.
inline CondensateState solve_ground_state(const PhysicalParams& params, const Grid& grid,
                                          const SolverOptions& opts = {}) {
  params.validate();
  if (!(opts.tolerance > 0.0) || opts.max_iterations < 0 || !(opts.step > 0.0))
    throw ConfigError("solver options must be positive");

  const SeparableOperator lap = build_laplacian(grid, opts.scheme);
  const Eigen::VectorXd trap = params.trap.values(grid);
  const double gn = params.coupling();
  const double w = grid.weight();

  Eigen::VectorXd phi = initial_guess(grid, params);

  auto hamiltonian_times = [&](const Eigen::VectorXd& p) -> Eigen::VectorXd {
    Eigen::VectorXd y = -0.5 * lap.apply(p);
    y.array() += (trap.array() + gn * p.array().square()) * p.array();
    return y;
  };
  auto energy = [&](const Eigen::VectorXd& p, const Eigen::VectorXd& hp) {
    // <p|H|p> counts the quartic term twice; remove half of it.
    return w * (p.dot(hp) - 0.5 * gn * p.array().pow(4).sum());
  };
  // Rounding floor of the energy evaluation, used as acceptance slack.
  auto energy_scale = [&](const Eigen::VectorXd& p, const Eigen::VectorXd& hp) {
    const Eigen::VectorXd kinetic = 0.5 * lap.apply(p);
    return w * (p.cwiseAbs().dot(hp.cwiseAbs()) + kinetic.cwiseAbs().dot(p.cwiseAbs()));
  };

  Eigen::VectorXd hphi = hamiltonian_times(phi);
  double mu = w * phi.dot(hphi);
  Eigen::VectorXd r = hphi - mu * phi;
  double res = std::sqrt(w * r.squaredNorm());
  double e = energy(phi, hphi);

  // Without trap and interaction H(phi) = -Lap/2 is singular on constants.
  const double metric_shift = (trap.cwiseAbs().maxCoeff() == 0.0 && gn == 0.0) ? 1.0 : 0.0;
  const double pc_shift = std::max(1.0, trap.mean() + gn * w * phi.array().pow(4).sum());
  const detail::KineticPreconditioner precond(lap, pc_shift);

  CondensateState out;
  if (opts.record_energy) out.energy_history.push_back(e);

  double tau = std::min(1.0, opts.step);
  long it = 0;
  int rejected = 0;
  while (res > opts.tolerance) {
    if (it >= opts.max_iterations)
      throw ConvergenceError("GP solver did not converge: residual " + sci(res), res, it);
    ++it;
    const Eigen::VectorXd potential = (trap.array() + gn * phi.array().square() + metric_shift).matrix();
    const Eigen::VectorXd x = detail::solve_spd(lap, potential, precond, phi, 1e-14, 2000);
    const double gamma = 1.0 / (w * phi.dot(x));
    Eigen::VectorXd trial = (1.0 - tau) * phi + tau * gamma * x;
    detail::normalize(trial, grid);
    const Eigen::VectorXd htrial = hamiltonian_times(trial);
    const double e_trial = energy(trial, htrial);
    const double slack = 64.0 * std::numeric_limits<double>::epsilon() * energy_scale(phi, hphi);
    if (e_trial > e + slack) {
      tau *= 0.5;
      if (++rejected > 60)
        throw ConvergenceError("GP solver step size collapsed: residual " + sci(res), res, it);
      continue;
    }
    rejected = 0;
    phi = trial;
    hphi = htrial;
    e = e_trial;
    mu = w * phi.dot(hphi);
    r = hphi - mu * phi;
    res = std::sqrt(w * r.squaredNorm());
    tau = std::min(2.0 * tau, 1.0);
    if (opts.record_energy) out.energy_history.push_back(e);
  }

  // Global phase: the ground state is chosen non-negative. Far tails can carry
  // rounding-level values of either sign; they are folded onto their magnitude.
  if (phi.sum() < 0.0) phi = -phi;
  if (phi.minCoeff() < 0.0) {
    phi = phi.cwiseAbs();
    detail::normalize(phi, grid);
    hphi = hamiltonian_times(phi);
    mu = w * phi.dot(hphi);
    r = hphi - mu * phi;
    res = std::sqrt(w * r.squaredNorm());
  }

  out.grid = grid;
  out.params = params;
  out.scheme = opts.scheme;
  out.phi0 = phi.cast<cplx>();
  out.mu0 = mu;
  out.residual = res;
  out.iterations = it;
  return out;
}

}  // namespace bdgz

#endif  // BDGZ_GP_HPP
