#ifndef BDGZ_VACUUM_HPP
#define BDGZ_VACUUM_HPP

// Number-state coefficients of the quasiparticle vacuum: the two-mode squeezed
// vacuum of each (k, -k) pair and the quadrature eigenstate of the zero mode.

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <numbers>
#include <string>

#include "bdgz/error.hpp"
#include "bdgz/grid.hpp"

namespace bdgz {

// |vac> = sum_n c_n |n>_k (x) |n>_{-k},  c_n = sqrt(1 - r) r^{n/2}.
struct PairedModeVacuum {
  double epsilon = 0.0;
  double gn = 0.0;
  double omega = 0.0;
  double ratio_r = 0.0;
  double norm_A = 1.0;
  int n_max = 0;
  Eigen::VectorXd coefficients;  // n = 0 .. n_max
  double truncation_error = 0.0; // 1 - sum c_n^2 = r^{n_max+1}

  double depletion() const {
    double s = 0.0;
    for (Eigen::Index n = 0; n < coefficients.size(); ++n) s += static_cast<double>(n) * coefficients[n] * coefficients[n];
    return s;
  }
  double exact_depletion() const { return ratio_r / (1.0 - ratio_r); }
  // X / Y amplitudes of b_k = X a_k - Y a_{-k}^+ for this pair.
  double x_amplitude() const { return std::sqrt(0.5 * ((epsilon + gn) / omega + 1.0)); }
  double y_amplitude() const { return std::sqrt(std::max(0.0, 0.5 * ((epsilon + gn) / omega - 1.0))); }
};

enum class ZeroModePhase { real, i_power };

inline std::string to_string(ZeroModePhase p) { return p == ZeroModePhase::real ? "real" : "i_power"; }

// Coefficients of the (improper) eigenstate of a0 + a0^+ with eigenvalue 2 sqrt(N0)
// over the number states of a0^+ a0.
struct ZeroModeVacuum {
  double N0 = 0.0;
  int n_max = 0;
  Eigen::VectorXcd coefficients;   // n = 0 .. n_max
  bool delta_normalized = true;    // not square-summable as n_max grows
  ZeroModePhase phase = ZeroModePhase::real;
  double residual = 0.0;           // ||(a + a^+ - 2 sqrt(N0)) c|| on levels 0 .. n_max-1
  double alternative_residual = 0.0;  // same for the rejected phase
  double boundary_term = 0.0;      // sqrt(n_max+1) |psi_{n_max+1}|, the missing top-level contribution
  Eigen::VectorXd partial_norms;   // sum_{m <= n} |c_m|^2
  bool truncation_warning = false;
};

// Component |m, m+1> of (X a_k - Y a_{-k}^+) sum_n c_n |n, n> for m < n_max,
// i.e. everything except the top boundary level.
inline double annihilation_residual(const Eigen::VectorXd& c, double x_amp, double y_amp, int n_max) {
  if (n_max + 1 > c.size()) throw DimensionError("coefficient vector shorter than n_max + 1");
  double s = 0.0;
  for (int m = 0; m < n_max; ++m) {
    const double r = std::sqrt(m + 1.0) * (x_amp * c[m + 1] - y_amp * c[m]);
    s += r * r;
  }
  return std::sqrt(s);
}

inline PairedModeVacuum pair_vacuum(double epsilon, double gn, int n_max) {
  if (!(epsilon >= 0.0) || !(gn >= 0.0)) throw ConfigError("pair_vacuum needs epsilon >= 0 and gn >= 0");
  if (n_max < 0) throw ConfigError("n_max must be non-negative");
  if (epsilon == 0.0)
    throw DomainError(gn > 0.0 ? "epsilon = 0 is the zero-mode pair; use zero_mode_vacuum"
                               : "epsilon = gn = 0 has zero frequency");
  PairedModeVacuum v;
  v.epsilon = epsilon;
  v.gn = gn;
  v.n_max = n_max;
  const double e = epsilon + gn;
  v.omega = std::sqrt(epsilon * (epsilon + 2.0 * gn));
  // (e - omega)/(e + omega) rewritten without cancellation.
  const double denom = e + v.omega;
  v.ratio_r = gn * gn / (denom * denom);
  v.norm_A = std::sqrt(1.0 - v.ratio_r);
  v.coefficients.resize(n_max + 1);
  const double step = std::sqrt(v.ratio_r);
  v.coefficients[0] = v.norm_A;
  for (int n = 1; n <= n_max; ++n) v.coefficients[n] = v.coefficients[n - 1] * step;
  v.truncation_error = std::pow(v.ratio_r, n_max + 1);
  return v;
}

namespace detail {

// Normalized Hermite functions psi_0 .. psi_count-1 at x by the stable three-term
// recurrence; values are rescaled on the fly and the log scale is restored at
// the end, so psi_0 = pi^{-1/4} e^{-x^2/2} may underflow harmlessly.
inline Eigen::VectorXd hermite_functions(double x, int count) {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(count);
  if (count <= 0) return out;
  const double log0 = -0.25 * std::log(std::numbers::pi) - 0.5 * x * x;
  double prev = 0.0, cur = 1.0, log_scale = log0;
  auto emit = [&](int n, double value) {
    const double mag = std::abs(value);
    if (mag == 0.0) return;
    const double l = std::log(mag) + log_scale;
    out[n] = l < -745.0 ? 0.0 : std::copysign(std::exp(l), value);
  };
  emit(0, cur);
  for (int n = 0; n + 1 < count; ++n) {
    const double next = std::sqrt(2.0 / (n + 1.0)) * x * cur - std::sqrt(n / (n + 1.0)) * prev;
    prev = cur;
    cur = next;
    const double mag = std::abs(cur);
    if (mag > 1e100 || (mag < 1e-100 && mag > 0.0)) {
      const double l = std::log(mag);
      prev /= mag;
      cur /= mag;
      log_scale += l;
    }
    emit(n + 1, cur);
  }
  return out;
}

inline double quadrature_residual(const Eigen::VectorXcd& c, double N0, int n_max) {
  const double target = 2.0 * std::sqrt(N0);
  double s = 0.0;
  for (int m = 0; m < n_max; ++m) {
    cplx r = std::sqrt(m + 1.0) * c[m + 1] - target * c[m];
    if (m > 0) r += std::sqrt(static_cast<double>(m)) * c[m - 1];
    s += std::norm(r);
  }
  return std::sqrt(s);
}

}  // namespace detail

// Two readings of the defining integral give c_n = psi_n(sqrt(2 N0)) or
// i^n psi_n(sqrt(2 N0)); the one with the smaller residual of
// (a0 + a0^+ - 2 sqrt(N0)) is kept and recorded in `phase`.
inline ZeroModeVacuum zero_mode_vacuum(double N0, int n_max, int margin = 8) {
  if (!(N0 >= 0.0) || !std::isfinite(N0)) throw ConfigError("zero_mode_vacuum needs N0 >= 0");
  if (n_max < 1) throw ConfigError("zero_mode_vacuum needs n_max >= 1");
  ZeroModeVacuum v;
  v.N0 = N0;
  v.n_max = n_max;
  const double x0 = std::sqrt(2.0 * N0);
  const Eigen::VectorXd psi = detail::hermite_functions(x0, n_max + 2);

  Eigen::VectorXcd real_phase(n_max + 1), i_phase(n_max + 1);
  static const cplx powers[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
  for (int n = 0; n <= n_max; ++n) {
    real_phase[n] = psi[n];
    i_phase[n] = powers[n % 4] * psi[n];
  }
  const double r_real = detail::quadrature_residual(real_phase, N0, n_max);
  const double r_i = detail::quadrature_residual(i_phase, N0, n_max);
  if (r_real <= r_i) {
    v.coefficients = real_phase;
    v.phase = ZeroModePhase::real;
    v.residual = r_real;
    v.alternative_residual = r_i;
  } else {
    v.coefficients = i_phase;
    v.phase = ZeroModePhase::i_power;
    v.residual = r_i;
    v.alternative_residual = r_real;
  }
  v.boundary_term = std::sqrt(n_max + 1.0) * std::abs(psi[n_max + 1]);
  v.partial_norms.resize(n_max + 1);
  double acc = 0.0;
  for (int n = 0; n <= n_max; ++n) v.partial_norms[n] = (acc += std::norm(v.coefficients[n]));
  v.truncation_warning = n_max < static_cast<int>(std::ceil(2.0 * N0)) + margin;
  return v;
}

}  // namespace bdgz

#endif  // BDGZ_VACUUM_HPP
