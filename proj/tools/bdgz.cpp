// bdgz: condensate ground state, Bogoliubov spectrum, zero mode and vacuum
// from a run configuration.
//
// Exit status: 0 ok, 2 configuration, 3 convergence, 4 structure (missing zero
// mode, instability), 5 numerical, 6 truncation warning.

#include <Eigen/Core>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"

#include "bdgz/bdgz.hpp"

namespace {

struct Options {
  std::string config;
  std::string state;
  std::string out;
  std::string format;
  std::string f_list;
  std::string debug_quadform;
  int f = 0;
};

int code(bdgz::ExitCode c) { return static_cast<int>(c); }

std::vector<int> parse_f_list(const std::string& s) {
  std::vector<int> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    char* end = nullptr;
    const long v = std::strtol(item.c_str(), &end, 10);
    if (*end != '\0' || v < 1) throw bdgz::ConfigError("bad --f-list entry '" + item + "'");
    out.push_back(static_cast<int>(v));
  }
  return out;
}

template <typename Report>
void emit(const Report& r, const bdgz::RunConfig& cfg, const Options& o) {
  const std::string format = o.format.empty() ? cfg.format : o.format;
  const std::string path = o.out.empty() ? cfg.out_path : o.out;
  std::ofstream file;
  if (!path.empty()) {
    file.open(path);
    if (!file) throw bdgz::ConfigError("cannot open " + path + " for writing");
  }
  std::ostream& os = path.empty() ? std::cout : file;
  if (format == "json")
    os << to_json(r).dump(2) << '\n';
  else
    write_csv(os, r);
}

bdgz::RunConfig load_config(const Options& o) {
  if (o.config.empty()) throw bdgz::ConfigError("--config is required");
  bdgz::RunConfig cfg = bdgz::load_run_config(o.config);
  if (!o.format.empty() && o.format != "csv" && o.format != "json") throw bdgz::ConfigError("--format must be csv or json");
  if (o.f > 0) cfg.f = o.f;
  return cfg;
}

bdgz::CondensateState load_state(const Options& o, const bdgz::RunConfig& cfg) {
  bdgz::CondensateState s = bdgz::io::load_state(o.state.empty() ? cfg.state_path : o.state);
  if (s.grid != cfg.grid()) throw bdgz::ConfigError("snapshot grid does not match the configuration");
  return s;
}

int cmd_solve(const Options& o) {
  const bdgz::RunConfig cfg = load_config(o);
  const bdgz::CondensateState s = bdgz::run_solve(cfg);
  const std::string path = !o.state.empty() ? o.state : (!o.out.empty() ? o.out : cfg.state_path);
  bdgz::io::save_state(path, s);
  std::cout.precision(17);
  std::cout << "mu0 " << s.mu0 << "\nresidual " << s.residual << "\niterations " << s.iterations << "\nsnapshot "
            << path << '\n';
  return 0;
}

int cmd_spectrum(const Options& o) {
  const bdgz::RunConfig cfg = load_config(o);
  bdgz::SpectrumReport r;
  if (!o.debug_quadform.empty()) {
    r = bdgz::spectrum_from_form(bdgz::io::load_quadratic_form(o.debug_quadform), cfg);
  } else {
    r = bdgz::run_spectrum(cfg, load_state(o, cfg), cfg.f);
  }
  emit(r, cfg, o);
  if (!r.spectrum.stable) std::cerr << "bdgz: spectrum unstable (" << r.spectrum.unstable_modes.size() << " modes)\n";
  if (r.zero_status == bdgz::ZeroModeStatus::missing) std::cerr << "bdgz: zero mode missing: " << r.zero_message << '\n';
  if (!r.transform_message.empty()) std::cerr << "bdgz: " << r.transform_message << '\n';
  return code(r.status());
}

int cmd_converge(const Options& o) {
  const bdgz::RunConfig cfg = load_config(o);
  std::vector<int> fs = o.f_list.empty() ? cfg.f_list : parse_f_list(o.f_list);
  if (fs.empty()) throw bdgz::ConfigError("converge needs --f-list or converge.f_list");
  const bdgz::ConvergeReport r = bdgz::run_converge(cfg, load_state(o, cfg), fs);
  emit(r, cfg, o);
  return 0;
}

int cmd_vacuum(const Options& o) {
  const bdgz::RunConfig cfg = load_config(o);
  const bdgz::CondensateState s = load_state(o, cfg);
  const bdgz::SpectrumReport spec = bdgz::run_spectrum(cfg, s, cfg.f);
  if (spec.status() != bdgz::ExitCode::success) {
    std::cerr << "bdgz: spectrum not usable for the vacuum: " << spec.zero_message << spec.transform_message << '\n';
    return code(spec.status());
  }
  const bdgz::VacuumReport r = bdgz::run_vacuum(cfg, s, spec);
  emit(r, cfg, o);
  if (r.truncation_warning) std::cerr << "bdgz: truncation warning (raise vacuum.n_max)\n";
  return code(r.status());
}

int cmd_oracle(const Options& o) {
  const bdgz::RunConfig cfg = load_config(o);
  const bdgz::OracleReport r = bdgz::oracle_check(cfg, load_state(o, cfg), cfg.f);
  emit(r, cfg, o);
  if (!r.passed()) {
    std::cerr << "bdgz: oracle deviation " << r.max_deviation << " exceeds " << r.tolerance << '\n';
    return code(bdgz::ExitCode::numerical);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  if (const char* t = std::getenv("BDGZ_THREADS")) {
    const int n = std::atoi(t);
    if (n > 0) Eigen::setNbThreads(n);
  }

  CLI::App app{"Bogoliubov spectrum, zero mode and vacuum of a trapped condensate"};
  app.require_subcommand(1);
  Options o;
  auto common = [&](CLI::App* sub, bool needs_state) {
    sub->add_option("--config", o.config, "run configuration (TOML subset)")->required();
    sub->add_option("--out", o.out, "output path (default: stdout / config)");
    sub->add_option("--format", o.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
    if (needs_state) sub->add_option("--state", o.state, "condensate snapshot (default: output.state)");
    sub->add_option("--f", o.f, "truncation level, overrides basis.f");
  };
  auto* solve = app.add_subcommand("solve", "solve the GP ground state and write a snapshot");
  common(solve, true);
  auto* spectrum = app.add_subcommand("spectrum", "Bogoliubov frequencies and zero mode");
  common(spectrum, true);
  spectrum->add_option("--debug-quadform", o.debug_quadform, "diagonalize a quadratic form record instead");
  auto* converge = app.add_subcommand("converge", "frequencies against truncation level");
  common(converge, true);
  converge->add_option("--f-list", o.f_list, "comma separated truncation levels");
  auto* vacuum = app.add_subcommand("vacuum", "paired and zero-mode vacuum coefficients");
  common(vacuum, true);
  auto* oracle = app.add_subcommand("oracle-check", "compare against analytic or direct grid results");
  common(oracle, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : code(bdgz::ExitCode::configuration);
  }

  try {
    if (*solve) return cmd_solve(o);
    if (*spectrum) return cmd_spectrum(o);
    if (*converge) return cmd_converge(o);
    if (*vacuum) return cmd_vacuum(o);
    if (*oracle) return cmd_oracle(o);
  } catch (const bdgz::ConvergenceError& e) {
    std::cerr << "bdgz: " << e.what() << " (last residual " << e.last_residual() << " after " << e.iterations()
              << " iterations)\n";
    return code(e.code());
  } catch (const bdgz::Error& e) {
    std::cerr << "bdgz: " << e.what() << '\n';
    return code(e.code());
  } catch (const std::exception& e) {
    std::cerr << "bdgz: " << e.what() << '\n';
    return code(bdgz::ExitCode::numerical);
  }
  return 0;
}
