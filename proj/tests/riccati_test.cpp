#include "sdrenn/riccati.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "sdrenn/errors.hpp"

using Eigen::MatrixXd;
using sdrenn::riccati::LtiData;

namespace {

LtiData scalar(double a, double b, double q, double r) {
  LtiData s{MatrixXd::Constant(1, 1, a), MatrixXd::Constant(1, 1, b), MatrixXd::Constant(1, 1, q),
            MatrixXd::Constant(1, 1, r)};
  return s;
}

// Steady state of the Riccati differential equation dP/dt = A'P + PA - PGP + Q
// started from P = 0, integrated with small RK4 steps.
MatrixXd riccati_flow_limit(const LtiData& s, double T, double h) {
  const MatrixXd G = s.B * s.R.inverse() * s.B.transpose();
  auto f = [&](const MatrixXd& P) -> MatrixXd {
    return s.A.transpose() * P + P * s.A - P * G * P + s.Q;
  };
  MatrixXd P = MatrixXd::Zero(s.A.rows(), s.A.rows());
  for (double t = 0; t < T; t += h) {
    const MatrixXd k1 = f(P);
    const MatrixXd k2 = f(P + 0.5 * h * k1);
    const MatrixXd k3 = f(P + 0.5 * h * k2);
    const MatrixXd k4 = f(P + h * k3);
    P += (h / 6) * (k1 + 2 * k2 + 2 * k3 + k4);
  }
  return P;
}

}  // namespace

TEST(SolveCare, ScalarClosedForm) {
  const auto sol = sdrenn::riccati::solve_care(scalar(1, 1, 1, 1));
  EXPECT_NEAR(sol.Pi(0, 0), 1 + std::sqrt(2.0), 1e-12);
  EXPECT_NEAR(sol.K(0, 0), 1 + std::sqrt(2.0), 1e-12);

  const auto marginal = sdrenn::riccati::solve_care(scalar(0, 1, 1, 1));
  EXPECT_NEAR(marginal.Pi(0, 0), 1.0, 1e-12);
  EXPECT_NEAR(marginal.K(0, 0), 1.0, 1e-12);
}

TEST(SolveCare, ScalarGeneralRoot) {
  // positive root of 2 a p - b^2 p^2 / r + q = 0
  for (double a : {-2.0, -0.3, 0.5, 3.0}) {
    const double b = 0.7, q = 2.5, r = 0.4;
    const double expected = (a + std::sqrt(a * a + b * b * q / r)) * r / (b * b);
    EXPECT_NEAR(sdrenn::riccati::solve_care(scalar(a, b, q, r)).Pi(0, 0), expected, 1e-12 * expected);
  }
}

TEST(SolveCare, ZeroInputStableDrift) {
  LtiData s{-MatrixXd::Identity(2, 2), MatrixXd::Zero(2, 1), MatrixXd::Identity(2, 2), MatrixXd::Ones(1, 1)};
  const auto sol = sdrenn::riccati::solve_care(s);
  EXPECT_TRUE(sol.Pi.isApprox(0.5 * MatrixXd::Identity(2, 2), 1e-12));
}

TEST(SolveCare, MatchesRiccatiFlow) {
  LtiData s;
  s.A.resize(2, 2);
  s.A << 0, 1, 2, -1;
  s.B.resize(2, 1);
  s.B << 0, 1;
  s.Q = MatrixXd::Identity(2, 2);
  s.R = MatrixXd::Constant(1, 1, 0.5);
  const MatrixXd oracle = riccati_flow_limit(s, 40.0, 1e-3);
  const auto sol = sdrenn::riccati::solve_care(s);
  EXPECT_LT((sol.Pi - oracle).norm(), 1e-8 * oracle.norm());
  EXPECT_LT(sol.closed_loop_abscissa, 0);
}

TEST(SolveCare, MathworksExample) {
  LtiData s;
  s.A.resize(2, 2);
  s.A << -3, 2, 1, 1;
  s.B.resize(2, 1);
  s.B << 0, 1;
  s.Q = 3 * MatrixXd::Identity(2, 2);
  s.R = MatrixXd::Constant(1, 1, 3);
  const auto sol = sdrenn::riccati::solve_care(s);
  EXPECT_LT(sdrenn::riccati::care_residual(s, sol.Pi), 1e-10);
  EXPECT_TRUE(sol.Pi.isApprox(sol.Pi.transpose(), 1e-14));
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(sol.Pi);
  EXPECT_GE(es.eigenvalues().minCoeff(), 0);
}

TEST(SolveCare, RandomSystems) {
  // A = As + B F with As Hurwitz, so -F certifies stabilizability
  std::mt19937_64 rng(7);
  std::normal_distribution<> g;
  std::uniform_int_distribution<int> dim(2, 30), inputs(1, 4);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = dim(rng), m = inputs(rng);
    LtiData s;
    MatrixXd As = MatrixXd::NullaryExpr(n, n, [&] { return g(rng) / std::sqrt(n); });
    As -= (sdrenn::riccati::spectral_abscissa(As) + 0.5) * MatrixXd::Identity(n, n);
    s.B = MatrixXd::NullaryExpr(n, m, [&] { return g(rng); });
    s.A = As + s.B * MatrixXd::NullaryExpr(m, n, [&] { return 2 * g(rng) / std::sqrt(n); });
    const MatrixXd C = MatrixXd::NullaryExpr(n, n, [&] { return g(rng); });
    s.Q = C.transpose() * C / n;
    s.R = MatrixXd::Identity(m, m);
    const auto sol = sdrenn::riccati::solve_care(s);
    EXPECT_LE(sol.residual, 1e-8 * std::max(1.0, s.Q.norm())) << "n=" << n << " m=" << m;
    EXPECT_LT(sol.closed_loop_abscissa, 0);
  }
}

TEST(SolveCare, UnstabilizableThrows) {
  // unstable mode that B cannot reach
  LtiData s{MatrixXd::Identity(2, 2), MatrixXd::Zero(2, 1), MatrixXd::Identity(2, 2), MatrixXd::Ones(1, 1)};
  s.B(0, 0) = 1;
  EXPECT_THROW(sdrenn::riccati::solve_care(s), sdrenn::NotStabilizable);
}

TEST(SolveCare, RejectsBadData) {
  LtiData s = scalar(1, 1, 1, 1);
  s.R(0, 0) = 0;
  EXPECT_THROW(sdrenn::riccati::solve_care(s), sdrenn::InvalidArgument);
  LtiData t = scalar(1, 1, 1, 1);
  t.B = MatrixXd::Ones(2, 1);
  EXPECT_THROW(sdrenn::riccati::solve_care(t), sdrenn::DimensionMismatch);
}

TEST(SolveLyapunov, SmallCases) {
  EXPECT_NEAR(sdrenn::riccati::solve_lyapunov(-MatrixXd::Ones(1, 1), 2 * MatrixXd::Ones(1, 1))(0, 0), 1.0,
              1e-14);
  MatrixXd A = MatrixXd::Zero(2, 2);
  A.diagonal() << -1, -2;
  const MatrixXd X = sdrenn::riccati::solve_lyapunov(A, MatrixXd::Identity(2, 2));
  MatrixXd expected = MatrixXd::Zero(2, 2);
  expected.diagonal() << 0.5, 0.25;
  EXPECT_TRUE(X.isApprox(expected, 1e-14));
}

TEST(SolveLyapunov, RandomStable) {
  std::mt19937_64 rng(3);
  std::normal_distribution<> g;
  MatrixXd A = MatrixXd::NullaryExpr(5, 5, [&] { return g(rng); });
  A -= (sdrenn::riccati::spectral_abscissa(A) + 1.0) * MatrixXd::Identity(5, 5);
  const MatrixXd C = MatrixXd::NullaryExpr(3, 5, [&] { return g(rng); });
  const MatrixXd Q = C.transpose() * C;
  const MatrixXd X = sdrenn::riccati::solve_lyapunov(A, Q);
  EXPECT_LE((A.transpose() * X + X * A + Q).norm(), 1e-10);
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(0.5 * (X + X.transpose()));
  EXPECT_GE(es.eigenvalues().minCoeff(), -1e-12);
}

TEST(SolveLyapunov, SingularThrows) {
  MatrixXd A = MatrixXd::Zero(2, 2);
  A.diagonal() << 1, -1;
  EXPECT_THROW(sdrenn::riccati::solve_lyapunov(A, MatrixXd::Identity(2, 2)), sdrenn::SingularSylvester);
}

TEST(CareResidual, KnownValues) {
  LtiData s{MatrixXd::Zero(3, 3), MatrixXd::Zero(3, 1), MatrixXd::Identity(3, 3), MatrixXd::Ones(1, 1)};
  EXPECT_DOUBLE_EQ(sdrenn::riccati::care_residual(s, MatrixXd::Zero(3, 3)), std::sqrt(3.0));
  EXPECT_LE(sdrenn::riccati::care_residual(scalar(1, 1, 1, 1), MatrixXd::Constant(1, 1, 1 + std::sqrt(2.0))),
            1e-12);
}
