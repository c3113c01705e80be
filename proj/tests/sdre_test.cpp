#include "sdrenn/sdre.hpp"

#include <gtest/gtest.h>

#include <cmath>

#include "sdrenn/errors.hpp"
#include "sdrenn/riccati.hpp"

using Eigen::MatrixXd;
using Eigen::VectorXd;
namespace models = sdrenn::models;

namespace {

// xdot = x * x + u, written as A(x) = x.
models::SemilinearSystem scalar_quadratic() {
  models::SemilinearSystem s;
  s.name = "scalar";
  s.n = s.m = 1;
  s.eval_A = [](const VectorXd& x) { return MatrixXd::Constant(1, 1, x(0)); };
  s.eval_B = [](const VectorXd&) { return MatrixXd::Ones(1, 1); };
  s.Q = s.R = MatrixXd::Ones(1, 1);
  s.lower = VectorXd::Constant(1, -1);
  s.upper = VectorXd::Constant(1, 1);
  return s;
}

models::SemilinearSystem double_integrator() {
  MatrixXd A(2, 2), B(2, 1);
  A << 0, 1, 0, 0;
  B << 0, 1;
  return models::linear_system("di", A, B, MatrixXd::Identity(2, 2), MatrixXd::Ones(1, 1), 1.0);
}

}  // namespace

TEST(SdreSolve, ScalarClosedForm) {
  const double p = 1 + std::sqrt(2.0);
  const auto s = sdrenn::sdre::sdre_solve(scalar_quadratic(), VectorXd::Ones(1));
  EXPECT_NEAR(s.Pi(0, 0), p, 1e-12);
  EXPECT_NEAR(s.u(0), -p, 1e-12);
  EXPECT_NEAR(s.V, p, 1e-12);
  EXPECT_NEAR(s.gradV(0), 2 * p, 1e-12);
  EXPECT_NEAR(sdrenn::sdre::sdre_gain(scalar_quadratic(), VectorXd::Ones(1))(0, 0), p, 1e-12);
}

TEST(SdreSolve, OriginGivesZeroRecord) {
  for (const auto& sys : {models::allen_cahn_system({}), models::cucker_smale_system({})}) {
    const auto s = sdrenn::sdre::sdre_solve(sys, VectorXd::Zero(sys.n));
    EXPECT_EQ(s.u.norm(), 0.0);
    EXPECT_EQ(s.V, 0.0);
    EXPECT_EQ(s.gradV.norm(), 0.0);
  }
}

TEST(SdreSolve, ControlMatchesGradient) {
  const auto sys = models::allen_cahn_system({});
  const VectorXd x = 0.5 * VectorXd::LinSpaced(sys.n, -1, 1.5);
  const auto s = sdrenn::sdre::sdre_solve(sys, x);
  const VectorXd u = sdrenn::sdre::feedback_from_gradient(sys.eval_B(x), sys.R, s.gradV);
  EXPECT_LE((u - s.u).norm(), 1e-12 * std::max(1.0, s.u.norm()));
  EXPECT_NEAR(s.V, x.dot(s.Pi * x), 1e-12 * std::max(1.0, s.V));
}

TEST(SdreSolve, LinearSystemIsStateIndependent) {
  const auto sys = double_integrator();
  const auto lqr = sdrenn::riccati::solve_care({sys.eval_A(VectorXd::Zero(2)), sys.eval_B(VectorXd::Zero(2)), sys.Q, sys.R});
  for (double c : {-0.7, 0.2, 0.9}) {
    const MatrixXd K = sdrenn::sdre::sdre_gain(sys, VectorXd::Constant(2, c));
    EXPECT_TRUE(K.isApprox(lqr.K, 1e-12));
  }
  EXPECT_TRUE(sdrenn::sdre::linear_gain_at_origin(sys).isApprox(lqr.K, 1e-12));
}

TEST(SdreGain, ScaleInvariant) {
  auto sys = models::cucker_smale_system({});
  const VectorXd x = VectorXd::LinSpaced(sys.n, -1, 1);
  const MatrixXd K = sdrenn::sdre::sdre_gain(sys, x);
  sys.Q *= 3.5;
  sys.R *= 3.5;
  EXPECT_LE((sdrenn::sdre::sdre_gain(sys, x) - K).norm(), 1e-8 * K.norm());
}

TEST(LinearGainAtOrigin, AllenCahnStabilizes) {
  const auto sys = models::allen_cahn_system({});
  const MatrixXd K0 = sdrenn::sdre::linear_gain_at_origin(sys);
  const VectorXd zero = VectorXd::Zero(sys.n);
  EXPECT_LT(sdrenn::riccati::spectral_abscissa(sys.eval_A(zero) - sys.eval_B(zero) * K0), 0);
  const auto lqr = sdrenn::riccati::solve_care(sdrenn::sdre::frozen(sys, zero));
  EXPECT_TRUE(K0.isApprox(lqr.K, 1e-14));
}

TEST(LinearGainAtOrigin, CuckerSmaleExists) {
  const auto sys = models::cucker_smale_system({});
  EXPECT_EQ(sdrenn::sdre::linear_gain_at_origin(sys).rows(), 20);
}

TEST(FeedbackFromGradient, HandArithmetic) {
  const VectorXd u = sdrenn::sdre::feedback_from_gradient(MatrixXd::Ones(1, 1), MatrixXd::Constant(1, 1, 0.1),
                                                          VectorXd::Constant(1, 2.0));
  EXPECT_NEAR(u(0), -10.0, 1e-14);
  EXPECT_THROW(sdrenn::sdre::feedback_from_gradient(MatrixXd::Ones(2, 1), MatrixXd::Ones(1, 1), VectorXd::Ones(3)),
               sdrenn::DimensionMismatch);
}

TEST(SdreSolve, RejectsBadStates) {
  EXPECT_THROW(sdrenn::sdre::sdre_solve(scalar_quadratic(), VectorXd::Zero(2)), sdrenn::DimensionMismatch);
  EXPECT_THROW(sdrenn::sdre::sdre_solve(scalar_quadratic(), VectorXd::Constant(1, NAN)), sdrenn::InvalidArgument);
}
