#ifndef BDGZ_CONFIG_HPP
#define BDGZ_CONFIG_HPP

// Run configuration read from a small TOML subset: [section] headers,
// key = value lines, '#' comments; values are numbers, "strings", true/false
// or flat arrays of those.

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "bdgz/basis.hpp"
#include "bdgz/bogoliubov.hpp"
#include "bdgz/error.hpp"
#include "bdgz/gp.hpp"
#include "bdgz/grid.hpp"

namespace bdgz {

namespace toml {

using Scalar = std::variant<double, std::string, bool>;

struct Value {
  std::vector<Scalar> items;
  bool is_array = false;
  int line = 0;
};

using Table = std::map<std::string, Value>;  // "section.key" -> value

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline std::string strip_comment(const std::string& s) {
  bool quoted = false;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '"') quoted = !quoted;
    if (s[i] == '#' && !quoted) return s.substr(0, i);
  }
  return s;
}

inline Scalar parse_scalar(const std::string& raw, int line) {
  const std::string t = trim(raw);
  auto fail = [&](const std::string& why) -> ConfigError {
    return ConfigError("config line " + std::to_string(line) + ": " + why + " '" + t + "'");
  };
  if (t.empty()) throw fail("empty value");
  if (t.front() == '"') {
    if (t.size() < 2 || t.back() != '"') throw fail("unterminated string");
    return t.substr(1, t.size() - 2);
  }
  if (t == "true") return true;
  if (t == "false") return false;
  std::string digits;
  for (char c : t)
    if (c != '_') digits += c;
  char* end = nullptr;
  const double v = std::strtod(digits.c_str(), &end);
  if (end == digits.c_str() || *end != '\0' || !std::isfinite(v)) throw fail("not a number");
  return v;
}

}  // namespace detail

inline Table parse(std::istream& is) {
  Table table;
  std::string section, line;
  int number = 0;
  while (std::getline(is, line)) {
    ++number;
    const std::string t = detail::trim(detail::strip_comment(line));
    if (t.empty()) continue;
    if (t.front() == '[') {
      if (t.back() != ']') throw ConfigError("config line " + std::to_string(number) + ": malformed section header");
      section = detail::trim(t.substr(1, t.size() - 2));
      if (section.empty()) throw ConfigError("config line " + std::to_string(number) + ": empty section name");
      continue;
    }
    const auto eq = t.find('=');
    if (eq == std::string::npos) throw ConfigError("config line " + std::to_string(number) + ": expected key = value");
    const std::string key = detail::trim(t.substr(0, eq));
    const std::string rhs = detail::trim(t.substr(eq + 1));
    if (key.empty()) throw ConfigError("config line " + std::to_string(number) + ": empty key");
    Value v;
    v.line = number;
    if (!rhs.empty() && rhs.front() == '[') {
      if (rhs.back() != ']') throw ConfigError("config line " + std::to_string(number) + ": unterminated array");
      v.is_array = true;
      std::stringstream inner(rhs.substr(1, rhs.size() - 2));
      std::string item;
      while (std::getline(inner, item, ','))
        if (!detail::trim(item).empty()) v.items.push_back(detail::parse_scalar(item, number));
    } else {
      v.items.push_back(detail::parse_scalar(rhs, number));
    }
    const std::string full = section.empty() ? key : section + "." + key;
    if (!table.emplace(full, std::move(v)).second)
      throw ConfigError("config line " + std::to_string(number) + ": duplicate key '" + full + "'");
  }
  return table;
}

inline Table parse_string(const std::string& text) {
  std::istringstream is(text);
  return parse(is);
}

}  // namespace toml

struct RunConfig {
  std::vector<int> points{128};
  std::vector<double> lengths{20.0};
  Boundary boundary = Boundary::periodic;
  PhysicalParams params;
  SolverOptions solver;
  BasisOptions basis;
  int f = 24;
  DiagonalizeOptions diag;
  double canonical_tol = 1e-10;
  double pattern_tol = 1e-6;
  int n_max = 60;
  int zero_mode_n_max = 0;  // 0: chosen from N0
  int zero_mode_margin = 8;
  std::vector<int> f_list;
  std::string state_path = "state.bdgz";
  std::string out_path;
  std::string format = "csv";

  Grid grid() const { return Grid(points, lengths, boundary); }
  int effective_zero_mode_n_max() const {
    if (zero_mode_n_max > 0) return zero_mode_n_max;
    return std::max(64, static_cast<int>(std::ceil(2.0 * params.N0)) + 4 * zero_mode_margin);
  }
};

namespace detail {

class ConfigReader {
 public:
  explicit ConfigReader(toml::Table t) : table_(std::move(t)) {}

  bool has(const std::string& key) const { return table_.count(key) != 0; }

  double number(const std::string& key) {
    const toml::Value& v = scalar(key);
    if (!std::holds_alternative<double>(v.items[0])) throw type_error(key, "a number");
    return std::get<double>(v.items[0]);
  }
  int integer(const std::string& key) {
    const double d = number(key);
    if (d != std::floor(d) || std::abs(d) > 2e9) throw type_error(key, "an integer");
    return static_cast<int>(d);
  }
  std::string string(const std::string& key) {
    const toml::Value& v = scalar(key);
    if (!std::holds_alternative<std::string>(v.items[0])) throw type_error(key, "a string");
    return std::get<std::string>(v.items[0]);
  }
  bool boolean(const std::string& key) {
    const toml::Value& v = scalar(key);
    if (!std::holds_alternative<bool>(v.items[0])) throw type_error(key, "true or false");
    return std::get<bool>(v.items[0]);
  }
  std::vector<double> numbers(const std::string& key) {
    used_.insert(key);
    std::vector<double> out;
    for (const auto& item : table_.at(key).items) {
      if (!std::holds_alternative<double>(item)) throw type_error(key, "numbers");
      out.push_back(std::get<double>(item));
    }
    return out;
  }
  std::vector<int> integers(const std::string& key) {
    std::vector<int> out;
    for (double d : numbers(key)) {
      if (d != std::floor(d) || std::abs(d) > 2e9) throw type_error(key, "integers");
      out.push_back(static_cast<int>(d));
    }
    return out;
  }

  void reject_unused() const {
    for (const auto& [key, value] : table_)
      if (!used_.count(key))
        throw ConfigError("config line " + std::to_string(value.line) + ": unknown key '" + key + "'");
  }

 private:
  const toml::Value& scalar(const std::string& key) {
    used_.insert(key);
    const toml::Value& v = table_.at(key);
    if (v.is_array || v.items.size() != 1) throw type_error(key, "a single value");
    return v;
  }
  ConfigError type_error(const std::string& key, const std::string& what) const {
    return ConfigError("config line " + std::to_string(table_.at(key).line) + ": '" + key + "' must be " + what);
  }

  toml::Table table_;
  std::set<std::string> used_;
};

inline Eigen::VectorXd read_table_file(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open trap table " + path.string());
  std::vector<double> values;
  std::string token;
  while (is >> token) {
    if (token.front() == '#') {
      std::getline(is, token);
      continue;
    }
    char* end = nullptr;
    const double v = std::strtod(token.c_str(), &end);
    if (*end != '\0') throw ConfigError("trap table " + path.string() + ": bad value '" + token + "'");
    values.push_back(v);
  }
  return Eigen::Map<Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
}

}  // namespace detail

// `base_dir` resolves relative paths (trap table) in the file.
inline RunConfig parse_run_config(const toml::Table& table, const std::filesystem::path& base_dir = ".") {
  detail::ConfigReader r(table);
  RunConfig c;

  int dim = 0;
  if (r.has("grid.dimension")) dim = r.integer("grid.dimension");
  auto broadcast_int = [&](const std::string& key, std::vector<int> fallback) {
    if (!r.has(key)) return fallback;
    return r.integers(key);
  };
  auto broadcast_num = [&](const std::string& key, std::vector<double> fallback) {
    if (!r.has(key)) return fallback;
    return r.numbers(key);
  };
  c.points = broadcast_int("grid.points", c.points);
  c.lengths = broadcast_num("grid.lengths", c.lengths);
  if (dim == 0) dim = static_cast<int>(std::max(c.points.size(), c.lengths.size()));
  if (dim < 1 || dim > 3) throw ConfigError("grid.dimension must be 1, 2 or 3");
  if (c.points.size() == 1) c.points.assign(dim, c.points[0]);
  if (c.lengths.size() == 1) c.lengths.assign(dim, c.lengths[0]);
  if (static_cast<int>(c.points.size()) != dim || static_cast<int>(c.lengths.size()) != dim)
    throw ConfigError("grid.points and grid.lengths must have one entry per axis");
  if (r.has("grid.boundary")) c.boundary = parse_boundary(r.string("grid.boundary"));
  if (r.has("grid.scheme")) c.solver.scheme = parse_scheme(r.string("grid.scheme"));
  else if (c.boundary == Boundary::hard_wall) c.solver.scheme = LaplacianScheme::finite_difference_2nd;

  const std::string kind = r.has("trap.kind") ? r.string("trap.kind") : "zero";
  if (kind == "zero") {
    c.params.trap = TrapPotential::zero();
  } else if (kind == "harmonic") {
    std::vector<double> w = broadcast_num("trap.frequencies", {1.0});
    if (w.size() == 1) w.assign(dim, w[0]);
    if (static_cast<int>(w.size()) != dim) throw ConfigError("trap.frequencies must have one entry per axis");
    for (double x : w)
      if (!(x > 0.0) || !std::isfinite(x)) throw ConfigError("trap frequencies must be positive");
    c.params.trap = TrapPotential::harmonic(w);
  } else if (kind == "tabulated") {
    if (!r.has("trap.file")) throw ConfigError("tabulated trap needs trap.file");
    std::filesystem::path p = r.string("trap.file");
    if (p.is_relative()) p = base_dir / p;
    c.params.trap = TrapPotential::tabulated(detail::read_table_file(p));
  } else {
    throw ConfigError("trap.kind must be zero, harmonic or tabulated");
  }

  if (r.has("physics.g") && r.has("physics.scattering_length"))
    throw ConfigError("give either physics.g or physics.scattering_length, not both");
  if (r.has("physics.N0")) c.params.N0 = r.number("physics.N0");
  if (r.has("physics.g")) c.params.g = r.number("physics.g");
  if (r.has("physics.scattering_length"))
    c.params = PhysicalParams::from_scattering_length(r.number("physics.scattering_length"), c.params.N0,
                                                      c.params.trap);
  c.params.validate();

  if (r.has("solver.tolerance")) c.solver.tolerance = r.number("solver.tolerance");
  if (r.has("solver.max_iterations")) c.solver.max_iterations = r.integer("solver.max_iterations");
  if (r.has("solver.step")) c.solver.step = r.number("solver.step");

  if (r.has("basis.f")) c.f = r.integer("basis.f");
  if (r.has("basis.dense_limit")) c.basis.dense_limit = r.integer("basis.dense_limit");
  if (r.has("basis.degeneracy_tol")) c.basis.degeneracy_tol = r.number("basis.degeneracy_tol");

  if (r.has("bogoliubov.zero_tol_rel")) c.diag.zero_tol_rel = r.number("bogoliubov.zero_tol_rel");
  if (r.has("bogoliubov.degeneracy_tol_rel")) c.diag.degeneracy_tol_rel = r.number("bogoliubov.degeneracy_tol_rel");
  if (r.has("bogoliubov.canonical_tol")) c.canonical_tol = r.number("bogoliubov.canonical_tol");
  if (r.has("bogoliubov.pattern_tol")) c.pattern_tol = r.number("bogoliubov.pattern_tol");

  if (r.has("vacuum.n_max")) c.n_max = r.integer("vacuum.n_max");
  if (r.has("vacuum.zero_mode_n_max")) c.zero_mode_n_max = r.integer("vacuum.zero_mode_n_max");
  if (r.has("vacuum.margin")) c.zero_mode_margin = r.integer("vacuum.margin");

  if (r.has("converge.f_list")) c.f_list = r.integers("converge.f_list");

  if (r.has("output.state")) c.state_path = r.string("output.state");
  if (r.has("output.path")) c.out_path = r.string("output.path");
  if (r.has("output.format")) c.format = r.string("output.format");
  r.reject_unused();

  for (double t : {c.solver.tolerance, c.solver.step, c.basis.degeneracy_tol, c.diag.zero_tol_rel,
                   c.diag.degeneracy_tol_rel, c.canonical_tol, c.pattern_tol})
    if (!(t > 0.0)) throw ConfigError("all tolerances and the solver step must be positive");
  if (c.solver.step > 1.0) throw ConfigError("solver.step must lie in (0, 1]");
  if (c.solver.max_iterations < 1) throw ConfigError("solver.max_iterations must be >= 1");
  if (c.f < 1) throw ConfigError("basis.f must be >= 1");
  for (int f : c.f_list)
    if (f < 1) throw ConfigError("converge.f_list entries must be >= 1");
  if (c.n_max < 0 || c.zero_mode_n_max < 0 || c.zero_mode_margin < 0) throw ConfigError("vacuum sizes must be >= 0");
  if (c.format != "csv" && c.format != "json") throw ConfigError("output.format must be csv or json");
  if (c.solver.scheme == LaplacianScheme::spectral && c.boundary != Boundary::periodic)
    throw ConfigError("spectral scheme requires a periodic grid");
  return c;
}

inline RunConfig load_run_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open config " + path);
  return parse_run_config(toml::parse(is), std::filesystem::path(path).parent_path());
}

}  // namespace bdgz

#endif  // BDGZ_CONFIG_HPP
