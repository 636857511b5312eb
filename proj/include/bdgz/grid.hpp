#ifndef BDGZ_GRID_HPP
#define BDGZ_GRID_HPP

// Uniform tensor-product grids, trap potentials and separable grid operators.
//
// Units: hbar = M = 1. Nodes are stored with axis 0 varying fastest, so the
// flat index of (i0, i1, i2) is i0 + n0 * (i1 + n1 * i2).

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include "bdgz/error.hpp"

namespace bdgz {

using cplx = std::complex<double>;

enum class Boundary { periodic, hard_wall };
enum class LaplacianScheme { spectral, finite_difference_2nd };

inline std::string to_string(Boundary b) { return b == Boundary::periodic ? "periodic" : "hard_wall"; }

inline std::string to_string(LaplacianScheme s) {
  return s == LaplacianScheme::spectral ? "spectral" : "finite_difference_2nd";
}

inline Boundary parse_boundary(const std::string& s) {
  if (s == "periodic") return Boundary::periodic;
  if (s == "hard_wall") return Boundary::hard_wall;
  throw ConfigError("unknown boundary '" + s + "'");
}

inline LaplacianScheme parse_scheme(const std::string& s) {
  if (s == "spectral") return LaplacianScheme::spectral;
  if (s == "finite_difference_2nd" || s == "finite_difference") return LaplacianScheme::finite_difference_2nd;
  throw ConfigError("unknown Laplacian scheme '" + s + "'");
}

class Grid {
 public:
  Grid() = default;

  Grid(std::vector<int> points_per_axis, std::vector<double> box_lengths, Boundary boundary)
      : points_(std::move(points_per_axis)), lengths_(std::move(box_lengths)), boundary_(boundary) {
    if (points_.empty() || points_.size() > 3)
      throw ConfigError("grid dimension must be 1, 2 or 3");
    if (points_.size() != lengths_.size())
      throw ConfigError("points_per_axis and box_lengths differ in length");
    for (std::size_t a = 0; a < points_.size(); ++a) {
      if (points_[a] < 1) throw ConfigError("points_per_axis must be positive");
      if (!(lengths_[a] > 0.0) || !std::isfinite(lengths_[a]))
        throw ConfigError("box_lengths must be positive and finite");
    }
  }

  int dimension() const { return static_cast<int>(points_.size()); }
  const std::vector<int>& points_per_axis() const { return points_; }
  const std::vector<double>& box_lengths() const { return lengths_; }
  Boundary boundary() const { return boundary_; }

  Eigen::Index size() const {
    Eigen::Index n = 1;
    for (int p : points_) n *= p;
    return n;
  }

  // Periodic: L/n. Hard wall: the two wall nodes are excluded, so L/(n+1).
  double spacing(int axis) const {
    const double n = points_[axis];
    return boundary_ == Boundary::periodic ? lengths_[axis] / n : lengths_[axis] / (n + 1.0);
  }

  double weight() const {
    double w = 1.0;
    for (int a = 0; a < dimension(); ++a) w *= spacing(a);
    return w;
  }

  double volume() const {
    double v = 1.0;
    for (double l : lengths_) v *= l;
    return v;
  }

  // Coordinates along one axis; the box is centred on the origin.
  Eigen::VectorXd axis_coordinates(int axis) const {
    const int n = points_[axis];
    const double h = spacing(axis);
    const double offset = boundary_ == Boundary::periodic ? 0.0 : h;
    Eigen::VectorXd x(n);
    for (int j = 0; j < n; ++j) x[j] = -0.5 * lengths_[axis] + offset + j * h;
    return x;
  }

  // Coordinate `axis` of every node, in flat node order.
  Eigen::VectorXd node_coordinates(int axis) const {
    const Eigen::VectorXd x = axis_coordinates(axis);
    Eigen::VectorXd out(size());
    const Eigen::Index stride = this->stride(axis);
    const int n = points_[axis];
    for (Eigen::Index i = 0; i < out.size(); ++i) out[i] = x[(i / stride) % n];
    return out;
  }

  Eigen::Index stride(int axis) const {
    Eigen::Index s = 1;
    for (int a = 0; a < axis; ++a) s *= points_[a];
    return s;
  }

  // Integer wave numbers m of the discrete Brillouin zone, k = 2 pi m / L.
  // For even n the Nyquist index n/2 appears once, with positive sign.
  std::vector<int> mode_indices(int axis) const {
    const int n = points_[axis];
    std::vector<int> m(n);
    for (int j = 0; j < n; ++j) m[j] = (j <= n / 2) ? j : j - n;
    return m;
  }

  double wavenumber(int axis, int m) const { return 2.0 * std::numbers::pi * m / lengths_[axis]; }

  bool operator==(const Grid& o) const {
    return points_ == o.points_ && lengths_ == o.lengths_ && boundary_ == o.boundary_;
  }
  bool operator!=(const Grid& o) const { return !(*this == o); }

 private:
  std::vector<int> points_;
  std::vector<double> lengths_;
  Boundary boundary_ = Boundary::periodic;
};

// External potential V_tr sampled on the grid nodes.
struct TrapPotential {
  enum class Kind { zero, harmonic, tabulated };

  Kind kind = Kind::zero;
  std::vector<double> frequencies;   // harmonic: one per axis
  Eigen::VectorXd table;             // tabulated: one value per node

  static TrapPotential zero() { return {}; }

  static TrapPotential harmonic(std::vector<double> omega) {
    TrapPotential t;
    t.kind = Kind::harmonic;
    t.frequencies = std::move(omega);
    return t;
  }

  static TrapPotential tabulated(Eigen::VectorXd values) {
    TrapPotential t;
    t.kind = Kind::tabulated;
    t.table = std::move(values);
    return t;
  }

  Eigen::VectorXd values(const Grid& grid) const {
    Eigen::VectorXd v = Eigen::VectorXd::Zero(grid.size());
    switch (kind) {
      case Kind::zero:
        break;
      case Kind::harmonic: {
        if (static_cast<int>(frequencies.size()) != grid.dimension())
          throw ConfigError("harmonic trap needs one frequency per axis");
        for (int a = 0; a < grid.dimension(); ++a) {
          const Eigen::VectorXd x = grid.node_coordinates(a);
          v.array() += 0.5 * frequencies[a] * frequencies[a] * x.array().square();
        }
        break;
      }
      case Kind::tabulated:
        if (table.size() != grid.size()) throw DimensionError("tabulated trap does not match grid size");
        v = table;
        break;
    }
    if (!v.allFinite()) throw ConfigError("trap potential is not finite at every node");
    return v;
  }
};

inline std::string to_string(TrapPotential::Kind k) {
  switch (k) {
    case TrapPotential::Kind::zero: return "zero";
    case TrapPotential::Kind::harmonic: return "harmonic";
    case TrapPotential::Kind::tabulated: return "tabulated";
  }
  return "zero";
}

// Sum over axes of (1D matrix acting along that axis) plus a diagonal term.
// Covers the Laplacian and every Hamiltonian of the form -c Lap + W(r).
class SeparableOperator {
 public:
  SeparableOperator() = default;
  SeparableOperator(Grid grid, std::vector<Eigen::MatrixXd> axis_matrices, Eigen::VectorXd diagonal)
      : grid_(std::move(grid)), axis_(std::move(axis_matrices)), diagonal_(std::move(diagonal)) {
    if (static_cast<int>(axis_.size()) != grid_.dimension()) throw DimensionError("one matrix per axis required");
    for (int a = 0; a < grid_.dimension(); ++a)
      if (axis_[a].rows() != grid_.points_per_axis()[a] || axis_[a].cols() != grid_.points_per_axis()[a])
        throw DimensionError("axis matrix does not match grid");
    if (diagonal_.size() != grid_.size()) throw DimensionError("diagonal does not match grid");
  }

  const Grid& grid() const { return grid_; }
  const std::vector<Eigen::MatrixXd>& axis_matrices() const { return axis_; }
  const Eigen::VectorXd& diagonal() const { return diagonal_; }
  Eigen::Index size() const { return grid_.size(); }

  SeparableOperator scaled(double s) const {
    std::vector<Eigen::MatrixXd> m = axis_;
    for (auto& a : m) a *= s;
    return {grid_, std::move(m), diagonal_ * s};
  }

  SeparableOperator plus_diagonal(const Eigen::VectorXd& w) const {
    if (w.size() != size()) throw DimensionError("diagonal does not match grid");
    return {grid_, axis_, diagonal_ + w};
  }

  // Applies the operator to each column of x. Each output entry is a fixed
  // sequence of dot products, so the result does not depend on threading.
  template <typename Derived>
  Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic> apply(
      const Eigen::MatrixBase<Derived>& x) const {
    using Scalar = typename Derived::Scalar;
    using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
    if (x.rows() != size()) throw DimensionError("grid function has wrong length");
    Mat y = diagonal_.cast<Scalar>().asDiagonal() * x;
    for (Eigen::Index c = 0; c < x.cols(); ++c) {
      const Eigen::Matrix<Scalar, Eigen::Dynamic, 1> col = x.col(c);
      for (int a = 0; a < grid_.dimension(); ++a) {
        const Eigen::Index s = grid_.stride(a);
        const Eigen::Index n = grid_.points_per_axis()[a];
        const Eigen::Index outer = size() / (s * n);
        const Eigen::MatrixXd dt = axis_[a].transpose();
        for (Eigen::Index o = 0; o < outer; ++o) {
          Eigen::Map<const Mat> in(col.data() + o * s * n, s, n);
          Eigen::Map<Mat> out(y.col(c).data() + o * s * n, s, n);
          out.noalias() += in * dt.cast<Scalar>();
        }
      }
    }
    return y;
  }

  // Materialized N x N matrix (Kronecker sum plus diagonal).
  Eigen::MatrixXd dense() const {
    const Eigen::Index n = size();
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) h(i, i) = diagonal_[i];
    for (int a = 0; a < grid_.dimension(); ++a) {
      const Eigen::Index s = grid_.stride(a);
      const Eigen::Index na = grid_.points_per_axis()[a];
      for (Eigen::Index i = 0; i < n; ++i) {
        const Eigen::Index ia = (i / s) % na;
        const Eigen::Index base = i - ia * s;
        for (Eigen::Index j = 0; j < na; ++j) h(i, base + j * s) += axis_[a](ia, j);
      }
    }
    return h;
  }

 private:
  Grid grid_;
  std::vector<Eigen::MatrixXd> axis_;
  Eigen::VectorXd diagonal_;
};

namespace detail {

// Fourier-sum coefficients c_d = (1/n) sum_m f(k_m) cos(2 pi m d / n), with the
// angle reduced exactly through integer arithmetic.
template <typename F>
Eigen::VectorXd circulant_cosine_row(int n, double length, F&& symbol) {
  Eigen::VectorXd c(n);
  for (int d = 0; d < n; ++d) {
    long double acc = 0.0L;
    for (int j = 0; j < n; ++j) {
      const int m = (j <= n / 2) ? j : j - n;
      const long long phase = (static_cast<long long>(((m % n) + n) % n) * d) % n;
      const long double k = 2.0L * std::numbers::pi_v<long double> * m / length;
      acc += symbol(k) * std::cos(2.0L * std::numbers::pi_v<long double> * phase / n);
    }
    c[d] = static_cast<double>(acc / n);
  }
  return c;
}

inline Eigen::MatrixXd circulant(const Eigen::VectorXd& c) {
  const int n = static_cast<int>(c.size());
  Eigen::MatrixXd m(n, n);
  for (int j = 0; j < n; ++j)
    for (int l = 0; l < n; ++l) {
      const int d = ((j - l) % n + n) % n;
      m(j, l) = c[d];
    }
  return m;
}

inline Eigen::MatrixXd spectral_second_derivative(int n, double length) {
  return circulant(circulant_cosine_row(n, length, [](long double k) { return -k * k; }));
}

// Spectral first derivative; the Nyquist mode (even n) is assigned zero slope.
inline Eigen::MatrixXd spectral_first_derivative(int n, double length) {
  Eigen::VectorXd c(n);
  for (int d = 0; d < n; ++d) {
    long double acc = 0.0L;
    for (int j = 0; j < n; ++j) {
      const int m = (j <= n / 2) ? j : j - n;
      if (n % 2 == 0 && j == n / 2) continue;
      const long long phase = (static_cast<long long>(((m % n) + n) % n) * d) % n;
      const long double k = 2.0L * std::numbers::pi_v<long double> * m / length;
      acc -= k * std::sin(2.0L * std::numbers::pi_v<long double> * phase / n);
    }
    c[d] = static_cast<double>(acc / n);
  }
  return circulant(c);
}

inline Eigen::MatrixXd fd_second_derivative(int n, double h, Boundary boundary) {
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
  const double inv = 1.0 / (h * h);
  for (int j = 0; j < n; ++j) {
    m(j, j) += -2.0 * inv;
    if (j > 0) m(j, j - 1) += inv;
    if (j + 1 < n) m(j, j + 1) += inv;
  }
  if (boundary == Boundary::periodic && n > 1) {
    m(0, n - 1) += inv;
    m(n - 1, 0) += inv;
  }
  return m;
}

// In-place product transform v <- (I x ... x m x ... x I) v along one axis.
template <typename Scalar>
void apply_along_axis(const Grid& grid, int axis, const Eigen::MatrixXd& m,
                      Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& v) {
  using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  const Eigen::Index s = grid.stride(axis);
  const Eigen::Index n = grid.points_per_axis()[axis];
  const Eigen::Index outer = grid.size() / (s * n);
  const Mat mt = m.transpose().cast<Scalar>();
  for (Eigen::Index o = 0; o < outer; ++o) {
    Eigen::Map<Mat> block(v.data() + o * s * n, s, n);
    const Mat tmp = block * mt;
    block = tmp;
  }
}

}  // namespace detail

// Discrete Laplacian. The spectral scheme is exact on the plane waves of the
// periodic Brillouin zone: Lap e^{ik.r} = -k^2 e^{ik.r}.
inline SeparableOperator build_laplacian(const Grid& grid, LaplacianScheme scheme) {
  if (scheme == LaplacianScheme::spectral && grid.boundary() != Boundary::periodic)
    throw ConfigError("spectral Laplacian requires a periodic grid");
  std::vector<Eigen::MatrixXd> axes;
  for (int a = 0; a < grid.dimension(); ++a) {
    const int n = grid.points_per_axis()[a];
    if (scheme == LaplacianScheme::spectral)
      axes.push_back(detail::spectral_second_derivative(n, grid.box_lengths()[a]));
    else
      axes.push_back(detail::fd_second_derivative(n, grid.spacing(a), grid.boundary()));
  }
  return {grid, std::move(axes), Eigen::VectorXd::Zero(grid.size())};
}

// Discrete L2 inner product: sum over nodes of conj(f) g times the cell volume.
template <typename DerivedF, typename DerivedG>
cplx inner_product(const Eigen::MatrixBase<DerivedF>& f, const Eigen::MatrixBase<DerivedG>& g, const Grid& grid) {
  if (f.size() != grid.size() || g.size() != grid.size())
    throw DimensionError("grid functions do not match the grid");
  const Eigen::VectorXcd fc = f.template cast<cplx>();
  const Eigen::VectorXcd gc = g.template cast<cplx>();
  return fc.dot(gc) * grid.weight();
}

template <typename Derived>
double l2_norm(const Eigen::MatrixBase<Derived>& f, const Grid& grid) {
  if (f.size() != grid.size()) throw DimensionError("grid function does not match the grid");
  return std::sqrt(f.squaredNorm() * grid.weight());
}

// Plane wave e^{i k.(r - r_0)} / sqrt(V) for integer mode indices m, with r_0
// the first node so that its value there is real positive.
inline Eigen::VectorXcd plane_wave(const Grid& grid, const std::vector<int>& m) {
  if (static_cast<int>(m.size()) != grid.dimension()) throw DimensionError("one mode index per axis required");
  Eigen::VectorXcd psi = Eigen::VectorXcd::Constant(grid.size(), cplx(1.0 / std::sqrt(grid.volume()), 0.0));
  for (int a = 0; a < grid.dimension(); ++a) {
    const int n = grid.points_per_axis()[a];
    const Eigen::Index s = grid.stride(a);
    for (Eigen::Index i = 0; i < psi.size(); ++i) {
      const long long j = (i / s) % n;
      const long long phase = ((static_cast<long long>(m[a]) * j) % n + n) % n;
      psi[i] *= std::polar(1.0, 2.0 * std::numbers::pi * static_cast<double>(phase) / n);
    }
  }
  return psi;
}

}  // namespace bdgz

#endif  // BDGZ_GRID_HPP
