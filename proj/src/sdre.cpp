#include "sdrenn/sdre.hpp"

#include <string>

#include "sdrenn/errors.hpp"

namespace sdrenn::sdre {

using Eigen::MatrixXd;
using Eigen::VectorXd;

riccati::LtiData frozen(const models::SemilinearSystem& sys, const VectorXd& x) {
  if (x.size() != sys.n)
    throw DimensionMismatch("state of size " + std::to_string(x.size()) + ", system has " +
                            std::to_string(sys.n));
  if (!x.allFinite()) throw InvalidArgument("state has non-finite entries");
  return {sys.eval_A(x), sys.eval_B(x), sys.Q, sys.R};
}

SdreSample sdre_solve(const models::SemilinearSystem& sys, const VectorXd& x, double tol) {
  const riccati::LtiData lti = frozen(sys, x);
  riccati::RiccatiSolution sol = riccati::solve_care(lti, tol);

  SdreSample s;
  s.x = x;
  const VectorXd pix = sol.Pi * x;
  s.V = x.dot(pix);
  s.gradV = 2.0 * pix;
  s.u = -(sol.K * x);
  s.residual = sol.residual;
  s.Pi = std::move(sol.Pi);
  s.K = std::move(sol.K);
  return s;
}

MatrixXd sdre_gain(const models::SemilinearSystem& sys, const VectorXd& x, double tol) {
  return riccati::solve_care(frozen(sys, x), tol).K;
}

MatrixXd linear_gain_at_origin(const models::SemilinearSystem& sys, double tol) {
  return sdre_gain(sys, VectorXd::Zero(sys.n), tol);
}

VectorXd feedback_from_gradient(const MatrixXd& B, const MatrixXd& R, const VectorXd& grad) {
  if (B.rows() != grad.size() || R.rows() != B.cols() || R.cols() != B.cols())
    throw DimensionMismatch("feedback layer shapes: B " + std::to_string(B.rows()) + "x" +
                            std::to_string(B.cols()) + ", R " + std::to_string(R.rows()) +
                            ", gradient " + std::to_string(grad.size()));
  return -0.5 * R.ldlt().solve(B.transpose() * grad);
}

}  // namespace sdrenn::sdre
