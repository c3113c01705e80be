#pragma once

#include <Eigen/Dense>

#include "sdrenn/models.hpp"
#include "sdrenn/riccati.hpp"

namespace sdrenn::sdre {

/// Everything one frozen-state Riccati solve yields at x.
///
/// V = x'Pi x, gradV = 2 Pi x and u = -R^{-1} B(x)' Pi x, so that
/// u = -1/2 R^{-1} B(x)' gradV holds by construction.
struct SdreSample {
  Eigen::VectorXd x;
  Eigen::VectorXd u;
  double V = 0.0;
  Eigen::VectorXd gradV;
  Eigen::MatrixXd Pi;
  Eigen::MatrixXd K;
  double residual = 0.0;
};

/// Freezes A(x), B(x) and solves the Riccati equation there. Throws
/// NotStabilizable when the frozen pair admits no stabilizing solution.
SdreSample sdre_solve(const models::SemilinearSystem& sys, const Eigen::VectorXd& x,
                      double tol = 1e-9);

/// K(x) = R^{-1} B(x)' Pi(x).
Eigen::MatrixXd sdre_gain(const models::SemilinearSystem& sys, const Eigen::VectorXd& x,
                          double tol = 1e-9);

/// LQR gain of the system frozen at the origin.
Eigen::MatrixXd linear_gain_at_origin(const models::SemilinearSystem& sys, double tol = 1e-9);

/// Riccati data of `sys` frozen at x.
riccati::LtiData frozen(const models::SemilinearSystem& sys, const Eigen::VectorXd& x);

/// -1/2 R^{-1} B' g.
Eigen::VectorXd feedback_from_gradient(const Eigen::MatrixXd& B, const Eigen::MatrixXd& R,
                                       const Eigen::VectorXd& grad);

}  // namespace sdrenn::sdre
