#pragma once

#include <Eigen/Dense>

namespace sdrenn::riccati {

/// Dense linear-quadratic problem data for one Riccati solve.
///
/// Q must be symmetric positive semidefinite and R symmetric positive
/// definite; `validate()` checks both together with the dimensions.
struct LtiData {
  Eigen::MatrixXd A;  // n x n drift
  Eigen::MatrixXd B;  // n x m control
  Eigen::MatrixXd Q;  // n x n state weight
  Eigen::MatrixXd R;  // m x m control weight

  Eigen::Index states() const { return A.rows(); }
  Eigen::Index inputs() const { return B.cols(); }

  /// Throws DimensionMismatch or InvalidArgument when the invariants fail.
  void validate() const;
};

struct RiccatiSolution {
  Eigen::MatrixXd Pi;
  Eigen::MatrixXd K;  // R^{-1} B^T Pi
  double residual = 0.0;
  double closed_loop_abscissa = 0.0;  // max Re(eig(A - B K))
};

/// Stabilizing solution of A'P + PA - P B R^{-1} B' P + Q = 0.
///
/// An ordered real Schur form of the Hamiltonian [[A, -G], [-Q, -A']] with
/// G = B R^{-1} B' gives the stable invariant subspace; the result is then
/// polished by Newton-Kleinman steps (at most 10) until the residual drops
/// below tol * max(1, ||Q||_F) or stops decreasing.
///
/// Throws NotStabilizable when the Hamiltonian has eigenvalues within
/// 1e-9 * ||H||_F of the imaginary axis or the closed loop is not Hurwitz,
/// NoConvergence when refinement cannot reach the tolerance, and
/// DimensionMismatch for inconsistent shapes.
RiccatiSolution solve_care(const LtiData& sys, double tol = 1e-9);

/// Solves A'X + XA + Q = 0 by Bartels-Stewart. Throws SingularSylvester when
/// two eigenvalues of A nearly sum to zero.
Eigen::MatrixXd solve_lyapunov(const Eigen::MatrixXd& A, const Eigen::MatrixXd& Q);

/// Frobenius norm of A'P + PA - P B R^{-1} B' P + Q.
double care_residual(const LtiData& sys, const Eigen::MatrixXd& Pi);

/// Max real part of the eigenvalues of M.
double spectral_abscissa(const Eigen::MatrixXd& M);

}  // namespace sdrenn::riccati
