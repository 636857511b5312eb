#ifndef BDGZ_PIPELINE_HPP
#define BDGZ_PIPELINE_HPP

// End-to-end runs behind the command-line tool: solve, spectrum, converge,
// vacuum and oracle comparison, each producing a report that can be written
// as CSV (tables) or JSON (nested records).

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"

#include "bdgz/basis.hpp"
#include "bdgz/bogoliubov.hpp"
#include "bdgz/config.hpp"
#include "bdgz/error.hpp"
#include "bdgz/gp.hpp"
#include "bdgz/io.hpp"
#include "bdgz/oracle.hpp"
#include "bdgz/quadform.hpp"
#include "bdgz/vacuum.hpp"

namespace bdgz {

enum class ZeroModeStatus { found, missing, degenerate };

inline std::string to_string(ZeroModeStatus s) {
  switch (s) {
    case ZeroModeStatus::found: return "found";
    case ZeroModeStatus::missing: return "missing";
    case ZeroModeStatus::degenerate: return "degenerate";
  }
  return "?";
}

struct SpectrumReport {
  QuadraticForm form;
  SymplecticSpectrum spectrum;
  std::optional<ZeroMode> zero_mode;
  ZeroModeStatus zero_status = ZeroModeStatus::missing;
  std::string zero_message;
  std::optional<CanonicalTransform> transform;
  std::string transform_message;
  EnergyConstants energy;
  std::optional<Eigen::VectorXd> basis_mu;
  bool splits_degenerate_cluster = false;

  ExitCode status() const {
    if (!spectrum.stable || zero_status == ZeroModeStatus::missing) return ExitCode::structure;
    if (!transform) return ExitCode::numerical;
    return ExitCode::success;
  }
};

inline bool is_homogeneous(const CondensateState& s) {
  return s.grid.boundary() == Boundary::periodic && s.params.trap.kind == TrapPotential::Kind::zero;
}

inline SpectrumReport spectrum_from_form(const QuadraticForm& q, const RunConfig& cfg) {
  SpectrumReport r;
  r.form = q;
  const BlockMatrix bm = build_M(q);
  r.spectrum = diagonalize(bm.M, bm.eta, cfg.diag);
  if (r.spectrum.zero_cluster.empty()) {
    r.zero_status = ZeroModeStatus::missing;
    r.zero_message = "no zero eigenvalue of eta M within tolerance";
  } else {
    try {
      r.zero_mode = extract_zero_mode(r.spectrum, bm.M, bm.eta, -1.0, cfg.pattern_tol);
      r.zero_status = ZeroModeStatus::found;
      if (r.zero_mode->pattern_warning) r.zero_message = "P deviates from the (delta_m0, -delta_m0) pattern";
    } catch (const ZeroModeMissing& e) {
      r.zero_status = ZeroModeStatus::missing;
      r.zero_message = e.what();
    } catch (const StructureError& e) {
      r.zero_status = ZeroModeStatus::degenerate;
      r.zero_message = e.what();
    }
  }
  if (r.spectrum.stable) {
    try {
      r.transform = canonical_transform(r.spectrum, r.zero_mode, cfg.canonical_tol);
    } catch (const Error& e) {
      r.transform_message = e.what();
    }
  } else {
    r.transform_message = "spectrum unstable; canonical transformation not built";
  }
  r.energy = ground_energy_constants(q, r.spectrum.omega);
  return r;
}

inline SpectrumReport run_spectrum(const RunConfig& cfg, const CondensateState& state, int f) {
  const BasisSet basis = solve_basis(build_effective_hamiltonian(state), f, cfg.basis);
  SpectrumReport r = spectrum_from_form(assemble(basis, state), cfg);
  r.basis_mu = basis.mu;
  r.splits_degenerate_cluster = basis.splits_degenerate_cluster;
  return r;
}

inline CondensateState run_solve(const RunConfig& cfg) {
  return solve_ground_state(cfg.params, cfg.grid(), cfg.solver);
}

// ---- convergence scan ----

struct ConvergeRow {
  int f = 0;
  Eigen::VectorXd omega;      // lowest frequencies at this f
  Eigen::VectorXd deviation;  // relative to the direct grid solve
};

struct ConvergeReport {
  Eigen::VectorXd reference;  // direct-solve frequencies
  std::vector<ConvergeRow> rows;
  int modes = 5;
  bool lowest_monotone = true;  // deviation of the lowest mode non-increasing in f
};

inline ConvergeReport run_converge(const RunConfig& cfg, const CondensateState& state, std::vector<int> f_list,
                                   int modes = 5) {
  if (f_list.empty()) throw ConfigError("converge needs a non-empty f list");
  std::sort(f_list.begin(), f_list.end());
  ConvergeReport rep;
  rep.modes = modes;
  rep.reference = oracle::direct_bdg_solve(state).omega;
  double last = std::numeric_limits<double>::infinity();
  for (int f : f_list) {
    const SpectrumReport s = run_spectrum(cfg, state, f);
    ConvergeRow row;
    row.f = f;
    const Eigen::Index n = std::min<Eigen::Index>({modes, s.spectrum.proper_count(), rep.reference.size()});
    row.omega = s.spectrum.omega.head(n);
    row.deviation = ((row.omega - rep.reference.head(n)).array().abs() / rep.reference.head(n).array()).matrix();
    if (n > 0) {
      if (row.deviation[0] > last * (1.0 + 1e-12) + 1e-15) rep.lowest_monotone = false;
      last = row.deviation[0];
    }
    rep.rows.push_back(std::move(row));
  }
  return rep;
}

// ---- vacuum ----

struct ModeVacuumRow {
  Eigen::Index mode = 0;
  double omega = 0.0;
  double y_weight = 0.0;  // ||Y^n||^2, the occupation this mode adds to the bare levels
  std::optional<PairedModeVacuum> pair;  // closed form, homogeneous boxes only
  double annihilation_residual = 0.0;
  double ratio_from_amplitudes = 0.0;  // (|Y|/|X|)^2 at the dominant entries
};

struct VacuumReport {
  std::vector<ModeVacuumRow> modes;
  std::optional<ZeroModeVacuum> zero_mode;
  double total_depletion = 0.0;  // sum_n ||Y^n||^2
  bool truncation_warning = false;
  double truncation_tol = 1e-10;

  ExitCode status() const { return truncation_warning ? ExitCode::truncation_warning : ExitCode::success; }
};

inline VacuumReport run_vacuum(const RunConfig& cfg, const CondensateState& state, const SpectrumReport& spec) {
  VacuumReport rep;
  const SymplecticSpectrum& sp = spec.spectrum;
  const bool homogeneous = is_homogeneous(state) && spec.basis_mu.has_value();
  for (Eigen::Index n = 0; n < sp.proper_count(); ++n) {
    ModeVacuumRow row;
    row.mode = n;
    row.omega = sp.omega[n];
    row.y_weight = sp.Y.col(n).squaredNorm();
    rep.total_depletion += row.y_weight;
    Eigen::Index ix = 0, iy = 0;
    const double xmax = sp.X.col(n).cwiseAbs().maxCoeff(&ix);
    const double ymax = sp.Y.col(n).cwiseAbs().maxCoeff(&iy);
    row.ratio_from_amplitudes = (ymax / xmax) * (ymax / xmax);
    if (homogeneous) {
      // Plane-wave basis: mode n lives on (k, -k) = (ix, iy); epsilon = k^2/2, gn = |B_{k,-k}|.
      const double gn = ymax == 0.0 ? 0.0 : std::abs(spec.form.B(ix, iy));
      const double eps = (*spec.basis_mu)[ix] - (*spec.basis_mu)[0];
      if (eps > 0.0) {
        row.pair = pair_vacuum(eps, gn, cfg.n_max);
        row.annihilation_residual =
            annihilation_residual(row.pair->coefficients, row.pair->x_amplitude(), row.pair->y_amplitude(), cfg.n_max);
        if (row.pair->truncation_error > rep.truncation_tol) rep.truncation_warning = true;
      }
    }
    rep.modes.push_back(std::move(row));
  }
  if (spec.zero_status == ZeroModeStatus::found) {
    rep.zero_mode = zero_mode_vacuum(state.params.N0, cfg.effective_zero_mode_n_max(), cfg.zero_mode_margin);
    if (rep.zero_mode->truncation_warning) rep.truncation_warning = true;
  }
  return rep;
}

// ---- oracle comparison ----

struct OracleRow {
  Eigen::Index mode = 0;
  double omega = 0.0;
  double reference = 0.0;
  double relative_deviation = 0.0;
};

struct OracleReport {
  std::string method;  // "analytic_dispersion" or "direct_bdg"
  std::vector<OracleRow> rows;
  double max_deviation = 0.0;
  double tolerance = 0.0;
  std::optional<double> mass_deviation;      // |mass * gn - 1|, homogeneous only
  std::optional<double> mean_field_deviation;  // relative, homogeneous only
  std::optional<double> mu0_deviation;         // |mu0 - gn|, homogeneous only
  bool passed() const {
    return max_deviation <= tolerance && (!mass_deviation || *mass_deviation <= tolerance) &&
           (!mean_field_deviation || *mean_field_deviation <= 1e-12);
  }
};

inline OracleReport oracle_check(const RunConfig& cfg, const CondensateState& state, int f, int modes = 5) {
  const SpectrumReport spec = run_spectrum(cfg, state, f);
  const Eigen::VectorXd& w = spec.spectrum.omega;
  OracleReport rep;
  Eigen::VectorXd ref;
  if (is_homogeneous(state)) {
    rep.method = "analytic_dispersion";
    rep.tolerance = 1e-8;
    const oracle::HomogeneousParams h = oracle::homogeneous_params(state.grid, state.params.g, state.params.N0);
    std::vector<double> k2;
    for (const auto& k : h.wavevectors) k2.push_back(k.squaredNorm());
    std::sort(k2.begin(), k2.end());
    std::vector<double> disp;
    for (int i = 1; i < f; ++i) disp.push_back(oracle::dispersion(k2[i], h.gn));
    ref = Eigen::Map<Eigen::VectorXd>(disp.data(), static_cast<Eigen::Index>(disp.size()));
    if (spec.zero_mode && h.gn > 0.0) rep.mass_deviation = std::abs(spec.zero_mode->mass_mu * h.gn - 1.0);
    const double mf = oracle::homogeneous_mean_field(state.params.g, state.params.N0, h.volume);
    if (mf != 0.0) rep.mean_field_deviation = std::abs(spec.energy.mean_field - mf) / std::abs(mf);
    rep.mu0_deviation = std::abs(state.mu0 - h.gn);
  } else {
    rep.method = "direct_bdg";
    const oracle::DirectResult d = oracle::direct_bdg_solve(state);
    ref = d.omega;
    rep.tolerance = f == state.grid.size() ? 1e-6 : 1e-3;
  }
  Eigen::Index n = std::min(w.size(), ref.size());
  if (rep.method == "direct_bdg" && f != state.grid.size()) n = std::min<Eigen::Index>(n, modes);
  for (Eigen::Index i = 0; i < n; ++i) {
    OracleRow row{i, w[i], ref[i], std::abs(w[i] - ref[i]) / std::max(std::abs(ref[i]), 1e-300)};
    rep.max_deviation = std::max(rep.max_deviation, row.relative_deviation);
    rep.rows.push_back(row);
  }
  return rep;
}

// ---- writers ----

namespace detail {

inline nlohmann::json complex_vector_json(const Eigen::VectorXcd& v) {
  std::vector<double> re(v.size()), im(v.size());
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    re[i] = v[i].real();
    im[i] = v[i].imag();
  }
  return {{"re", re}, {"im", im}};
}

inline std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

}  // namespace detail

inline nlohmann::json to_json(const SpectrumReport& r) {
  nlohmann::json modes = nlohmann::json::array();
  for (Eigen::Index n = 0; n < r.spectrum.proper_count(); ++n)
    modes.push_back({{"mode", n}, {"omega", r.spectrum.omega[n]}, {"eta_norm", r.spectrum.eta_norms[n]}});
  nlohmann::json unstable = nlohmann::json::array();
  for (const cplx& l : r.spectrum.unstable_modes) unstable.push_back({l.real(), l.imag()});
  nlohmann::json j = {{"f", r.form.f},
                      {"stable", r.spectrum.stable},
                      {"unstable_modes", unstable},
                      {"modes", modes},
                      {"m_norm", r.spectrum.m_norm},
                      {"pairing_defect", r.spectrum.pairing_defect},
                      {"orthonormality_defect", r.spectrum.orthonormality_defect},
                      {"hermiticity_defect", r.form.hermiticity_defect},
                      {"symmetry_defect", r.form.symmetry_defect},
                      {"mean_field", r.energy.mean_field},
                      {"zero_point", r.energy.zero_point},
                      {"splits_degenerate_cluster", r.splits_degenerate_cluster},
                      {"zero_mode", {{"status", to_string(r.zero_status)}, {"message", r.zero_message}}}};
  if (r.zero_mode) {
    const ZeroMode& z = *r.zero_mode;
    j["zero_mode"].update({{"omega0_residual", z.omega0_residual},
                           {"omega0_spread", z.omega0_spread},
                           {"mass_mu", z.mass_mu},
                           {"p_residual", z.p_residual},
                           {"q_residual", z.q_residual},
                           {"q_eta_p", {z.q_eta_p.real(), z.q_eta_p.imag()}},
                           {"p_eta_p", {z.p_eta_p.real(), z.p_eta_p.imag()}},
                           {"pattern_deviation", z.pattern_deviation},
                           {"P", detail::complex_vector_json(z.P)},
                           {"Q", detail::complex_vector_json(z.Q)},
                           {"momentum_coefficients", detail::complex_vector_json(z.momentum_coefficients)}});
  }
  if (r.transform) {
    j["canonical"] = {{"proper_block_deviation", r.transform->proper_block_deviation}};
    if (r.transform->full_deviation) j["canonical"]["full_deviation"] = *r.transform->full_deviation;
  } else {
    j["canonical"] = {{"error", r.transform_message}};
  }
  return j;
}

inline void write_csv(std::ostream& os, const SpectrumReport& r) {
  os << "# f=" << r.form.f << " stable=" << (r.spectrum.stable ? "true" : "false")
     << " zero_mode=" << to_string(r.zero_status) << "\n";
  if (r.zero_mode)
    os << "# omega0_residual=" << detail::fmt(r.zero_mode->omega0_residual)
       << " omega0_spread=" << detail::fmt(r.zero_mode->omega0_spread)
       << " mass_mu=" << detail::fmt(r.zero_mode->mass_mu) << "\n";
  for (const cplx& l : r.spectrum.unstable_modes)
    os << "# unstable=" << detail::fmt(l.real()) << (l.imag() < 0 ? "" : "+") << detail::fmt(l.imag()) << "i\n";
  os << "mode,omega,eta_norm\n";
  for (Eigen::Index n = 0; n < r.spectrum.proper_count(); ++n)
    os << n << ',' << detail::fmt(r.spectrum.omega[n]) << ',' << detail::fmt(r.spectrum.eta_norms[n]) << '\n';
}

inline nlohmann::json to_json(const ConvergeReport& r) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& row : r.rows) {
    std::vector<double> w(row.omega.data(), row.omega.data() + row.omega.size());
    std::vector<double> d(row.deviation.data(), row.deviation.data() + row.deviation.size());
    rows.push_back({{"f", row.f}, {"omega", w}, {"relative_deviation", d}});
  }
  std::vector<double> ref(r.reference.data(), r.reference.data() + std::min<Eigen::Index>(r.modes, r.reference.size()));
  return {{"reference", ref}, {"rows", rows}, {"lowest_mode_monotone", r.lowest_monotone}};
}

inline void write_csv(std::ostream& os, const ConvergeReport& r) {
  os << "# lowest_mode_monotone=" << (r.lowest_monotone ? "true" : "false") << "\n";
  os << "f,mode,omega,reference,relative_deviation\n";
  for (const auto& row : r.rows)
    for (Eigen::Index i = 0; i < row.omega.size(); ++i)
      os << row.f << ',' << i << ',' << detail::fmt(row.omega[i]) << ',' << detail::fmt(r.reference[i]) << ','
         << detail::fmt(row.deviation[i]) << '\n';
}

inline nlohmann::json to_json(const VacuumReport& r) {
  nlohmann::json modes = nlohmann::json::array();
  for (const auto& m : r.modes) {
    nlohmann::json e = {{"mode", m.mode}, {"omega", m.omega}, {"y_weight", m.y_weight},
                        {"ratio_from_amplitudes", m.ratio_from_amplitudes}};
    if (m.pair)
      e.update({{"ratio_r", m.pair->ratio_r},
                {"depletion", m.pair->exact_depletion()},
                {"truncated_depletion", m.pair->depletion()},
                {"truncation_error", m.pair->truncation_error},
                {"annihilation_residual", m.annihilation_residual}});
    modes.push_back(e);
  }
  nlohmann::json j = {{"modes", modes}, {"total_depletion", r.total_depletion}, {"truncation_warning", r.truncation_warning}};
  if (r.zero_mode) {
    const ZeroModeVacuum& z = *r.zero_mode;
    std::vector<double> norms(z.partial_norms.data(), z.partial_norms.data() + z.partial_norms.size());
    j["zero_mode"] = {{"N0", z.N0},
                      {"n_max", z.n_max},
                      {"phase", to_string(z.phase)},
                      {"residual", z.residual},
                      {"alternative_residual", z.alternative_residual},
                      {"boundary_term", z.boundary_term},
                      {"delta_normalized", z.delta_normalized},
                      {"truncation_warning", z.truncation_warning},
                      {"coefficients", detail::complex_vector_json(z.coefficients)},
                      {"partial_norms", norms}};
  }
  return j;
}

inline void write_csv(std::ostream& os, const VacuumReport& r) {
  os << "# total_depletion=" << detail::fmt(r.total_depletion)
     << " truncation_warning=" << (r.truncation_warning ? "true" : "false") << "\n";
  if (r.zero_mode)
    os << "# zero_mode N0=" << detail::fmt(r.zero_mode->N0) << " n_max=" << r.zero_mode->n_max
       << " phase=" << to_string(r.zero_mode->phase) << " residual=" << detail::fmt(r.zero_mode->residual)
       << " delta_normalized=true\n";
  os << "mode,omega,y_weight,ratio_r,depletion,annihilation_residual\n";
  for (const auto& m : r.modes) {
    os << m.mode << ',' << detail::fmt(m.omega) << ',' << detail::fmt(m.y_weight) << ',';
    if (m.pair)
      os << detail::fmt(m.pair->ratio_r) << ',' << detail::fmt(m.pair->exact_depletion()) << ','
         << detail::fmt(m.annihilation_residual);
    else
      os << ",,";
    os << '\n';
  }
  if (r.zero_mode) {
    os << "\nn,c_re,c_im,partial_norm\n";
    const ZeroModeVacuum& z = *r.zero_mode;
    for (int n = 0; n <= z.n_max; ++n)
      os << n << ',' << detail::fmt(z.coefficients[n].real()) << ',' << detail::fmt(z.coefficients[n].imag()) << ','
         << detail::fmt(z.partial_norms[n]) << '\n';
  }
}

inline nlohmann::json to_json(const OracleReport& r) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& row : r.rows)
    rows.push_back({{"mode", row.mode}, {"omega", row.omega}, {"reference", row.reference},
                    {"relative_deviation", row.relative_deviation}});
  nlohmann::json j = {{"method", r.method}, {"rows", rows}, {"max_deviation", r.max_deviation},
                      {"tolerance", r.tolerance}, {"passed", r.passed()}};
  if (r.mass_deviation) j["mass_deviation"] = *r.mass_deviation;
  if (r.mean_field_deviation) j["mean_field_deviation"] = *r.mean_field_deviation;
  if (r.mu0_deviation) j["mu0_deviation"] = *r.mu0_deviation;
  return j;
}

inline void write_csv(std::ostream& os, const OracleReport& r) {
  os << "# method=" << r.method << " max_deviation=" << detail::fmt(r.max_deviation)
     << " tolerance=" << detail::fmt(r.tolerance) << " passed=" << (r.passed() ? "true" : "false") << "\n";
  if (r.mass_deviation) os << "# mass_deviation=" << detail::fmt(*r.mass_deviation) << "\n";
  if (r.mean_field_deviation) os << "# mean_field_deviation=" << detail::fmt(*r.mean_field_deviation) << "\n";
  os << "mode,omega,reference,relative_deviation\n";
  for (const auto& row : r.rows)
    os << row.mode << ',' << detail::fmt(row.omega) << ',' << detail::fmt(row.reference) << ','
       << detail::fmt(row.relative_deviation) << '\n';
}

}  // namespace bdgz

#endif  // BDGZ_PIPELINE_HPP
