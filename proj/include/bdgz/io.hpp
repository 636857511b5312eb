#ifndef BDGZ_IO_HPP
#define BDGZ_IO_HPP

// Snapshot container:
//   "BDGZSNAP" | u32 version | u64 n + n bytes metadata JSON | u64 array count |
//   per array: u64 name length + name | u64 count | count x f64
// All integers and floats little-endian. Scalars that must reload bit-exactly
// travel in the binary arrays, never through JSON text.

#include <Eigen/Dense>

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "bdgz/basis.hpp"
#include "bdgz/error.hpp"
#include "bdgz/gp.hpp"
#include "bdgz/grid.hpp"
#include "bdgz/quadform.hpp"

namespace bdgz::io {

inline constexpr char kMagic[8] = {'B', 'D', 'G', 'Z', 'S', 'N', 'A', 'P'};
inline constexpr std::uint32_t kVersion = 1;

struct Snapshot {
  nlohmann::json metadata;
  std::map<std::string, std::vector<double>> arrays;
};

namespace detail {

template <typename T>
void put_le(std::ostream& os, T value) {
  static_assert(std::is_trivially_copyable_v<T>);
  unsigned char bytes[sizeof(T)];
  std::memcpy(bytes, &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
  os.write(reinterpret_cast<const char*>(bytes), sizeof(T));
}

template <typename T>
T get_le(std::istream& is) {
  unsigned char bytes[sizeof(T)];
  if (!is.read(reinterpret_cast<char*>(bytes), sizeof(T))) throw ConfigError("snapshot truncated");
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
  T value;
  std::memcpy(&value, bytes, sizeof(T));
  return value;
}

inline std::string hex(std::uint64_t h) {
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << h;
  return os.str();
}

inline std::vector<double> to_vector(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

inline Eigen::VectorXd to_eigen(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

}  // namespace detail

inline void write_snapshot(std::ostream& os, const Snapshot& s) {
  os.write(kMagic, sizeof(kMagic));
  detail::put_le<std::uint32_t>(os, kVersion);
  const std::string meta = s.metadata.dump();
  detail::put_le<std::uint64_t>(os, meta.size());
  os.write(meta.data(), static_cast<std::streamsize>(meta.size()));
  detail::put_le<std::uint64_t>(os, s.arrays.size());
  for (const auto& [name, values] : s.arrays) {
    detail::put_le<std::uint64_t>(os, name.size());
    os.write(name.data(), static_cast<std::streamsize>(name.size()));
    detail::put_le<std::uint64_t>(os, values.size());
    for (double v : values) detail::put_le<double>(os, v);
  }
  if (!os) throw ConfigError("failed to write snapshot");
}

inline Snapshot read_snapshot(std::istream& is) {
  char magic[sizeof(kMagic)];
  if (!is.read(magic, sizeof(magic)) || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
    throw ConfigError("not a snapshot file (bad magic)");
  const auto version = detail::get_le<std::uint32_t>(is);
  if (version != kVersion) throw ConfigError("unsupported snapshot version " + std::to_string(version));
  Snapshot s;
  const auto meta_len = detail::get_le<std::uint64_t>(is);
  std::string meta(meta_len, '\0');
  if (!is.read(meta.data(), static_cast<std::streamsize>(meta_len))) throw ConfigError("snapshot truncated");
  try {
    s.metadata = nlohmann::json::parse(meta);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("snapshot metadata: ") + e.what());
  }
  const auto count = detail::get_le<std::uint64_t>(is);
  for (std::uint64_t a = 0; a < count; ++a) {
    const auto name_len = detail::get_le<std::uint64_t>(is);
    std::string name(name_len, '\0');
    if (!is.read(name.data(), static_cast<std::streamsize>(name_len))) throw ConfigError("snapshot truncated");
    const auto n = detail::get_le<std::uint64_t>(is);
    std::vector<double> values(n);
    for (auto& v : values) v = detail::get_le<double>(is);
    s.arrays.emplace(std::move(name), std::move(values));
  }
  return s;
}

inline void save_snapshot(const std::string& path, const Snapshot& s) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw ConfigError("cannot open " + path + " for writing");
  write_snapshot(os, s);
}

inline Snapshot load_snapshot(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ConfigError("cannot open snapshot " + path);
  return read_snapshot(is);
}

// ---- condensate state ----

inline Snapshot to_snapshot(const CondensateState& s) {
  Snapshot out;
  const Grid& g = s.grid;
  out.metadata = {
      {"kind", "condensate_state"},
      {"dimension", g.dimension()},
      {"points_per_axis", g.points_per_axis()},
      {"boundary", to_string(g.boundary())},
      {"scheme", to_string(s.scheme)},
      {"trap", to_string(s.params.trap.kind)},
      {"iterations", s.iterations},
      {"size", g.size()},
  };
  out.arrays["box_lengths"] = g.box_lengths();
  out.arrays["scalars"] = {s.mu0, s.residual, s.params.g, s.params.N0};
  out.arrays["phi0.re"] = detail::to_vector(s.phi0.real());
  out.arrays["phi0.im"] = detail::to_vector(s.phi0.imag());
  if (s.params.trap.kind == TrapPotential::Kind::harmonic) out.arrays["trap.frequencies"] = s.params.trap.frequencies;
  if (s.params.trap.kind == TrapPotential::Kind::tabulated) out.arrays["trap.values"] = detail::to_vector(s.params.trap.table);
  return out;
}

inline const std::vector<double>& require_array(const Snapshot& s, const std::string& name) {
  auto it = s.arrays.find(name);
  if (it == s.arrays.end()) throw ConfigError("snapshot is missing array '" + name + "'");
  return it->second;
}

inline Grid grid_from_snapshot(const Snapshot& s) {
  try {
    return Grid(s.metadata.at("points_per_axis").get<std::vector<int>>(), require_array(s, "box_lengths"),
                parse_boundary(s.metadata.at("boundary").get<std::string>()));
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("snapshot metadata: ") + e.what());
  }
}

inline CondensateState state_from_snapshot(const Snapshot& s) {
  if (s.metadata.value("kind", "") != "condensate_state") throw ConfigError("snapshot does not hold a condensate state");
  CondensateState st;
  st.grid = grid_from_snapshot(s);
  try {
    st.scheme = parse_scheme(s.metadata.at("scheme").get<std::string>());
    st.iterations = s.metadata.value("iterations", 0L);
    const std::string trap = s.metadata.at("trap").get<std::string>();
    if (trap == "harmonic")
      st.params.trap = TrapPotential::harmonic(require_array(s, "trap.frequencies"));
    else if (trap == "tabulated")
      st.params.trap = TrapPotential::tabulated(detail::to_eigen(require_array(s, "trap.values")));
    else if (trap != "zero")
      throw ConfigError("unknown trap kind '" + trap + "'");
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("snapshot metadata: ") + e.what());
  }
  const auto& scalars = require_array(s, "scalars");
  if (scalars.size() != 4) throw ConfigError("snapshot scalars malformed");
  st.mu0 = scalars[0];
  st.residual = scalars[1];
  st.params.g = scalars[2];
  st.params.N0 = scalars[3];
  const auto& re = require_array(s, "phi0.re");
  const auto& im = require_array(s, "phi0.im");
  if (static_cast<Eigen::Index>(re.size()) != st.grid.size() || im.size() != re.size())
    throw DimensionError("snapshot condensate does not match its grid");
  st.phi0.resize(st.grid.size());
  for (Eigen::Index i = 0; i < st.grid.size(); ++i) st.phi0[i] = cplx(re[i], im[i]);
  return st;
}

inline void save_state(const std::string& path, const CondensateState& s) { save_snapshot(path, to_snapshot(s)); }
inline CondensateState load_state(const std::string& path) { return state_from_snapshot(load_snapshot(path)); }

// ---- basis set ----

inline Snapshot to_snapshot(const BasisSet& b) {
  Snapshot out;
  out.metadata = {{"kind", "basis_set"},
                  {"f", b.f},
                  {"points_per_axis", b.grid.points_per_axis()},
                  {"boundary", to_string(b.grid.boundary())},
                  {"real_valued", b.real_valued},
                  {"splits_degenerate_cluster", b.splits_degenerate_cluster}};
  out.arrays["box_lengths"] = b.grid.box_lengths();
  out.arrays["mu"] = detail::to_vector(b.mu);
  const Eigen::MatrixXd re = b.functions.real(), im = b.functions.imag();
  out.arrays["functions.re"] = {re.data(), re.data() + re.size()};
  out.arrays["functions.im"] = {im.data(), im.data() + im.size()};
  return out;
}

inline BasisSet basis_from_snapshot(const Snapshot& s) {
  if (s.metadata.value("kind", "") != "basis_set") throw ConfigError("snapshot does not hold a basis set");
  BasisSet b;
  b.grid = grid_from_snapshot(s);
  b.f = s.metadata.value("f", 0);
  b.real_valued = s.metadata.value("real_valued", true);
  b.splits_degenerate_cluster = s.metadata.value("splits_degenerate_cluster", false);
  b.mu = detail::to_eigen(require_array(s, "mu"));
  const auto& re = require_array(s, "functions.re");
  const auto& im = require_array(s, "functions.im");
  const Eigen::Index n = b.grid.size();
  if (b.mu.size() != b.f || static_cast<Eigen::Index>(re.size()) != n * b.f || im.size() != re.size())
    throw DimensionError("basis snapshot arrays do not match f and the grid");
  b.functions.resize(n, b.f);
  for (Eigen::Index i = 0; i < n * b.f; ++i) b.functions.data()[i] = cplx(re[i], im[i]);
  return b;
}

// ---- quadratic form (structured text) ----

inline nlohmann::json matrix_json(const Eigen::MatrixXcd& m) {
  std::vector<double> re, im;
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      re.push_back(m(r, c).real());
      im.push_back(m(r, c).imag());
    }
  return {{"rows", m.rows()}, {"cols", m.cols()}, {"re", re}, {"im", im}};
}

inline Eigen::MatrixXcd matrix_from_json(const nlohmann::json& j) {
  const auto rows = j.at("rows").get<Eigen::Index>();
  const auto cols = j.at("cols").get<Eigen::Index>();
  const auto re = j.at("re").get<std::vector<double>>();
  const auto im = j.at("im").get<std::vector<double>>();
  if (static_cast<Eigen::Index>(re.size()) != rows * cols || im.size() != re.size())
    throw DimensionError("matrix record has inconsistent size");
  Eigen::MatrixXcd m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r)
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = cplx(re[r * cols + c], im[r * cols + c]);
  return m;
}

inline nlohmann::json to_json(const QuadraticForm& q) {
  return {{"kind", "quadratic_form"},
          {"layout", "row-major"},
          {"f", q.f},
          {"N0", q.N0},
          {"g", q.g},
          {"B00", q.B00},
          {"constant_term", q.constant_term},
          {"traceA", q.traceA},
          {"hermiticity_defect", q.hermiticity_defect},
          {"symmetry_defect", q.symmetry_defect},
          {"basis_hash", detail::hex(q.basis_hash)},
          {"state_hash", detail::hex(q.state_hash)},
          {"A", matrix_json(q.A)},
          {"B", matrix_json(q.B)},
          {"d", matrix_json(q.d)}};
}

inline QuadraticForm quadratic_form_from_json(const nlohmann::json& j) {
  try {
    QuadraticForm q = quadratic_form_from_matrices(matrix_from_json(j.at("A")), matrix_from_json(j.at("B")),
                                                   j.value("N0", 0.0));
    if (j.contains("d")) q.d = matrix_from_json(j.at("d"));
    q.g = j.value("g", 0.0);
    q.hermiticity_defect = j.value("hermiticity_defect", q.hermiticity_defect);
    q.symmetry_defect = j.value("symmetry_defect", q.symmetry_defect);
    q.basis_hash = std::stoull(j.value("basis_hash", std::string("0")), nullptr, 16);
    q.state_hash = std::stoull(j.value("state_hash", std::string("0")), nullptr, 16);
    return q;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("quadratic form record: ") + e.what());
  }
}

inline QuadraticForm load_quadratic_form(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open " + path);
  try {
    return quadratic_form_from_json(nlohmann::json::parse(is));
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

}  // namespace bdgz::io

#endif  // BDGZ_IO_HPP
