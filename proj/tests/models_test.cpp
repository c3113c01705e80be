#include "sdrenn/models.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "sdrenn/errors.hpp"

using Eigen::MatrixXd;
using Eigen::VectorXd;
namespace models = sdrenn::models;

namespace {

// Flocking dynamics written out agent by agent.
VectorXd flocking_rhs(const VectorXd& x, int Na) {
  VectorXd f(2 * Na);
  for (int i = 0; i < Na; ++i) {
    f(i) = x(Na + i);
    double acc = 0;
    for (int k = 0; k < Na; ++k) {
      const double d = x(i) - x(k);
      acc += (x(Na + k) - x(Na + i)) / (1 + d * d);
    }
    f(Na + i) = acc / Na;
  }
  return f;
}

// Reaction-diffusion with mirrored ghost nodes.
VectorXd reaction_diffusion_rhs(const VectorXd& x, double nu) {
  const int N = static_cast<int>(x.size());
  const double h = 1.0 / (N - 1);
  VectorXd f(N);
  for (int i = 0; i < N; ++i) {
    const double left = i == 0 ? x(1) : x(i - 1);
    const double right = i == N - 1 ? x(N - 2) : x(i + 1);
    f(i) = nu * (left - 2 * x(i) + right) / (h * h) + x(i) - x(i) * x(i) * x(i);
  }
  return f;
}

VectorXd uniform_in(const models::SemilinearSystem& sys, std::mt19937_64& rng) {
  std::uniform_real_distribution<> u(0, 1);
  VectorXd x(sys.n);
  for (int i = 0; i < sys.n; ++i) x(i) = sys.lower(i) + (sys.upper(i) - sys.lower(i)) * u(rng);
  return x;
}

}  // namespace

TEST(InteractionKernel, Distances) {
  const std::vector<double> a{0.0}, b{1.0}, c{3.0};
  EXPECT_DOUBLE_EQ(models::interaction_kernel(a, a), 1.0);
  EXPECT_DOUBLE_EQ(models::interaction_kernel(a, b), 0.5);
  EXPECT_DOUBLE_EQ(models::interaction_kernel(a, c), 0.1);
}

TEST(AlignmentMatrix, TwoAgents) {
  VectorXd y(2);
  y << 0, 1;
  MatrixXd expected(2, 2);
  expected << -0.25, 0.25, 0.25, -0.25;
  EXPECT_TRUE(models::alignment_matrix(y).isApprox(expected, 1e-15));
}

TEST(AlignmentMatrix, RowsSumToZero) {
  std::mt19937_64 rng(1);
  std::normal_distribution<> g(0, 2);
  for (int t = 0; t < 10; ++t) {
    const VectorXd y = VectorXd::NullaryExpr(20, [&] { return g(rng); });
    EXPECT_LE(models::alignment_matrix(y).rowwise().sum().cwiseAbs().maxCoeff(), 1e-15);
  }
}

TEST(CuckerSmale, MatchesDirectDynamics) {
  const auto sys = models::cucker_smale_system({});
  EXPECT_EQ(sys.n, 40);
  EXPECT_EQ(sys.m, 20);
  std::mt19937_64 rng(2);
  for (int t = 0; t < 100; ++t) {
    const VectorXd x = uniform_in(sys, rng);
    const VectorXd expected = flocking_rhs(x, 20);
    EXPECT_LE((models::drift(sys, x) - expected).norm(), 1e-12 * std::max(1.0, expected.norm()));
  }
}

TEST(CuckerSmale, RestingAgentsAndConsensus) {
  const auto sys = models::cucker_smale_system({});
  VectorXd x = VectorXd::Zero(40);
  x.head(20) = VectorXd::LinSpaced(20, -2, 2);
  EXPECT_EQ(models::drift(sys, x).norm(), 0.0);
  x.tail(20).setConstant(0.7);
  EXPECT_LE(models::drift(sys, x).tail(20).norm(), 1e-15);
  EXPECT_TRUE(sys.Q.isApprox(MatrixXd::Identity(40, 40) / 20));
  EXPECT_TRUE(sys.eval_B(x).topRows(20).isZero());
  EXPECT_TRUE(sys.eval_B(x).bottomRows(20).isIdentity());
}

TEST(NeumannLaplacian, Stencil) {
  const MatrixXd L = models::neumann_laplacian(5);
  EXPECT_LE(L.rowwise().sum().cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_DOUBLE_EQ(L(0, 0), -32.0);
  EXPECT_DOUBLE_EQ(L(0, 1), 32.0);
  EXPECT_DOUBLE_EQ(L(2, 1), 16.0);
  EXPECT_DOUBLE_EQ(L(2, 2), -32.0);
  EXPECT_THROW(models::neumann_laplacian(2), sdrenn::InvalidConfig);
}

TEST(AllenCahn, MatchesDirectDynamics) {
  const auto sys = models::allen_cahn_system({});
  EXPECT_EQ(sys.n, 51);
  std::mt19937_64 rng(3);
  for (int t = 0; t < 100; ++t) {
    const VectorXd x = uniform_in(sys, rng);
    const VectorXd expected = reaction_diffusion_rhs(x, 0.1);
    EXPECT_LE((models::drift(sys, x) - expected).norm(), 1e-12 * std::max(1.0, expected.norm()));
  }
}

TEST(AllenCahn, Equilibria) {
  const auto sys = models::allen_cahn_system({});
  for (double c : {-1.0, 0.0, 1.0}) EXPECT_LE(models::drift(sys, VectorXd::Constant(51, c)).norm(), 1e-12);
  EXPECT_LE((models::drift(sys, VectorXd::Constant(51, 0.5)).array() - 0.375).abs().maxCoeff(), 1e-12);
}

TEST(AllenCahn, ActuatorAndWeights) {
  const auto sys = models::allen_cahn_system({});
  const VectorXd xi = models::allen_cahn_grid(51);
  const MatrixXd B = sys.eval_B(VectorXd::Zero(51));
  for (int i = 0; i < 51; ++i) EXPECT_EQ(B(i, 0), (xi(i) >= 0.6 - 1e-12 && xi(i) <= 0.9 + 1e-12) ? 1.0 : 0.0);
  EXPECT_EQ(B.sum(), 16.0);  // nodes 30..45
  EXPECT_TRUE(sys.Q.isApprox(MatrixXd::Identity(51, 51) / 50));
  EXPECT_DOUBLE_EQ(sys.R(0, 0), 0.1);
  const MatrixXd A0 = sys.eval_A(VectorXd::Zero(51));
  EXPECT_TRUE(A0.isApprox(0.1 * models::neumann_laplacian(51) + MatrixXd::Identity(51, 51)));
}

TEST(AllenCahn, PrintedReactionSign) {
  models::AllenCahnConfig cfg;
  cfg.grid = 5;
  cfg.reaction = models::AllenCahnReaction::Printed;
  const auto sys = models::allen_cahn_system(cfg);
  EXPECT_NEAR(models::drift(sys, VectorXd::Constant(5, 0.5))(2), 0.5 * 1.25, 1e-12);
}

TEST(AllenCahn, InvalidConfig) {
  models::AllenCahnConfig cfg;
  cfg.omega_lo = 0.9;
  cfg.omega_hi = 0.6;
  EXPECT_THROW(models::allen_cahn_system(cfg), sdrenn::InvalidConfig);
  cfg = {};
  cfg.diffusion = 0;
  EXPECT_THROW(models::allen_cahn_system(cfg), sdrenn::InvalidConfig);
}

TEST(Drift, OriginIsZero) {
  for (const auto& sys : {models::cucker_smale_system({}), models::allen_cahn_system({})})
    EXPECT_EQ(models::drift(sys, VectorXd::Zero(sys.n)).norm(), 0.0);
  EXPECT_THROW(models::drift(models::allen_cahn_system({}), VectorXd::Zero(3)), sdrenn::DimensionMismatch);
}
