#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "bdgz/grid.hpp"

using namespace bdgz;

namespace {

Eigen::VectorXcd smooth_random(const Grid& g, std::mt19937_64& rng) {
  // Random combination of low plane waves: smooth and periodic.
  std::normal_distribution<double> n;
  Eigen::VectorXcd f = Eigen::VectorXcd::Zero(g.size());
  std::vector<int> m(g.dimension(), 0);
  for (int t = 0; t < 9; ++t) {
    for (auto& c : m) c = static_cast<int>(rng() % 9) - 4;
    f += cplx(n(rng), n(rng)) * plane_wave(g, m);
  }
  return f;
}

}  // namespace

TEST(Grid, NodeCountAndVolume) {
  Grid g({8, 6, 4}, {2.0, 3.0, 4.0}, Boundary::periodic);
  EXPECT_EQ(g.dimension(), 3);
  EXPECT_EQ(g.size(), 8 * 6 * 4);
  EXPECT_NEAR(g.weight() * static_cast<double>(g.size()), g.volume(), 1e-13);
  EXPECT_DOUBLE_EQ(g.volume(), 24.0);
}

TEST(Grid, HardWallExcludesBoundaryNodes) {
  Grid g({9}, {10.0}, Boundary::hard_wall);
  const Eigen::VectorXd x = g.axis_coordinates(0);
  EXPECT_DOUBLE_EQ(g.spacing(0), 1.0);
  EXPECT_DOUBLE_EQ(x[0], -4.0);
  EXPECT_DOUBLE_EQ(x[8], 4.0);
}

TEST(Grid, RejectsBadShapes) {
  EXPECT_THROW(Grid({0}, {1.0}, Boundary::periodic), ConfigError);
  EXPECT_THROW(Grid({4, 4}, {1.0}, Boundary::periodic), ConfigError);
  EXPECT_THROW(Grid({4, 4, 4, 4}, {1.0, 1.0, 1.0, 1.0}, Boundary::periodic), ConfigError);
  EXPECT_THROW(Grid({4}, {-1.0}, Boundary::periodic), ConfigError);
}

TEST(Laplacian, SpectralOnHardWallIsConfigError) {
  Grid g({16}, {1.0}, Boundary::hard_wall);
  EXPECT_THROW(build_laplacian(g, LaplacianScheme::spectral), ConfigError);
}

TEST(Laplacian, ConstantIsAnnihilated) {
  Grid g({32, 16}, {5.0, 3.0}, Boundary::periodic);
  for (auto scheme : {LaplacianScheme::spectral, LaplacianScheme::finite_difference_2nd}) {
    const SeparableOperator lap = build_laplacian(g, scheme);
    const Eigen::VectorXd out = lap.apply(Eigen::VectorXd::Ones(g.size()));
    EXPECT_LT(out.cwiseAbs().maxCoeff(), 1e-10);
  }
}

TEST(Laplacian, PlaneWavesAreExactSpectralEigenvectors) {
  Grid g({24, 20}, {7.0, 5.0}, Boundary::periodic);
  const SeparableOperator lap = build_laplacian(g, LaplacianScheme::spectral);
  for (auto [m0, m1] : {std::pair{0, 0}, {1, 0}, {-3, 2}, {11, -9}, {5, 10}}) {
    const Eigen::VectorXcd pw = plane_wave(g, {m0, m1});
    const double k2 = std::pow(g.wavenumber(0, m0), 2) + std::pow(g.wavenumber(1, m1), 2);
    const Eigen::VectorXcd out = lap.apply(pw);
    EXPECT_LT((out + k2 * pw).cwiseAbs().maxCoeff(), 1e-11 * std::max(1.0, k2)) << m0 << "," << m1;
  }
}

TEST(Laplacian, FiniteDifferenceConvergesAtSecondOrder) {
  // sin(pi x / L) shifted onto (-L/2, L/2): cos(pi x / L), eigenvalue -(pi/L)^2.
  const double L = 2.0;
  const double exact = -std::pow(std::numbers::pi / L, 2);
  std::vector<double> errors;
  for (int n : {15, 31, 63, 127}) {
    Grid g({n}, {L}, Boundary::hard_wall);
    const SeparableOperator lap = build_laplacian(g, LaplacianScheme::finite_difference_2nd);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(lap.dense());
    errors.push_back(std::abs(es.eigenvalues()[n - 1] - exact));
  }
  for (std::size_t i = 1; i < errors.size(); ++i) {
    const double order = std::log2(errors[i - 1] / errors[i]);
    EXPECT_NEAR(order, 2.0, 0.05);
  }
}

TEST(Laplacian, SelfAdjointOnRandomSmoothFunctions) {
  std::mt19937_64 rng(7);
  Grid g({32, 24}, {6.0, 4.0}, Boundary::periodic);
  for (auto scheme : {LaplacianScheme::spectral, LaplacianScheme::finite_difference_2nd}) {
    const SeparableOperator lap = build_laplacian(g, scheme);
    for (int t = 0; t < 5; ++t) {
      const Eigen::VectorXcd f = smooth_random(g, rng), h = smooth_random(g, rng);
      const Eigen::VectorXcd lf = lap.apply(f), lh = lap.apply(h);
      const cplx a = inner_product(f, lh, g), b = inner_product(lf, h, g);
      const double scale = std::abs(a) + std::abs(b) + 1.0;
      EXPECT_LT(std::abs(a - b), 1e-10 * scale);
    }
  }
}

TEST(Laplacian, NegativeSemidefinite) {
  Grid g({12, 10}, {3.0, 2.0}, Boundary::periodic);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(build_laplacian(g, LaplacianScheme::spectral).dense());
  EXPECT_LT(es.eigenvalues().maxCoeff(), 1e-10);
}

TEST(Laplacian, SpectralEigenvaluesConvergeForOscillator) {
  Grid g({128}, {20.0}, Boundary::periodic);
  SeparableOperator h = build_laplacian(g, LaplacianScheme::spectral).scaled(-0.5).plus_diagonal(
      TrapPotential::harmonic({1.0}).values(g));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h.dense());
  for (int n = 0; n < 8; ++n) EXPECT_NEAR(es.eigenvalues()[n], n + 0.5, 1e-10);
}

TEST(InnerProduct, NormalizationOfUniformState) {
  Grid g({16, 8}, {4.0, 2.0}, Boundary::periodic);
  const Eigen::VectorXcd f = Eigen::VectorXcd::Constant(g.size(), 1.0 / std::sqrt(g.volume()));
  EXPECT_NEAR(std::abs(inner_product(f, f, g) - 1.0), 0.0, 1e-14);
}

TEST(InnerProduct, PlaneWavesAreOrthonormal) {
  Grid g({16}, {3.0}, Boundary::periodic);
  for (int m = -7; m <= 8; ++m)
    for (int n = -7; n <= 8; ++n) {
      const cplx v = inner_product(plane_wave(g, {m}), plane_wave(g, {n}), g);
      EXPECT_NEAR(std::abs(v - cplx(m == n ? 1.0 : 0.0)), 0.0, 1e-13);
    }
}

TEST(InnerProduct, GaussianQuadrature) {
  Grid g({256}, {30.0}, Boundary::periodic);
  const Eigen::VectorXd x = g.node_coordinates(0);
  const double s = 1.3;
  Eigen::VectorXcd f = (-(x.array() - 0.4).square() / (2 * s * s)).exp().cast<cplx>();
  f /= std::pow(std::numbers::pi * s * s, 0.25);
  EXPECT_NEAR(inner_product(f, f, g).real(), 1.0, 1e-8);
}

TEST(InnerProduct, ConjugateSymmetric) {
  std::mt19937_64 rng(3);
  Grid g({20}, {2.0}, Boundary::periodic);
  const Eigen::VectorXcd f = smooth_random(g, rng), h = smooth_random(g, rng);
  EXPECT_LT(std::abs(inner_product(f, h, g) - std::conj(inner_product(h, f, g))), 1e-13);
}

TEST(InnerProduct, MismatchIsDimensionError) {
  Grid g({20}, {2.0}, Boundary::periodic);
  EXPECT_THROW(inner_product(Eigen::VectorXcd::Ones(19), Eigen::VectorXcd::Ones(20), g), DimensionError);
}

TEST(Trap, ZeroAndHarmonicValues) {
  Grid g({9, 5}, {4.0, 2.0}, Boundary::hard_wall);
  EXPECT_EQ(TrapPotential::zero().values(g).cwiseAbs().maxCoeff(), 0.0);
  const Eigen::VectorXd v = TrapPotential::harmonic({1.0, 2.0}).values(g);
  const Eigen::VectorXd x = g.node_coordinates(0), y = g.node_coordinates(1);
  for (Eigen::Index i = 0; i < g.size(); ++i) EXPECT_DOUBLE_EQ(v[i], 0.5 * x[i] * x[i] + 2.0 * y[i] * y[i]);
  EXPECT_THROW(TrapPotential::harmonic({1.0}).values(g), ConfigError);
  EXPECT_THROW(TrapPotential::tabulated(Eigen::VectorXd::Ones(3)).values(g), DimensionError);
}
