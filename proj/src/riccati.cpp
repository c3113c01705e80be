#include "sdrenn/riccati.hpp"

#include <lapacke.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "sdrenn/errors.hpp"

namespace sdrenn::riccati {
namespace {

using Eigen::Index;
using Eigen::MatrixXd;

constexpr int kMaxNewtonSteps = 10;
constexpr double kImagAxisTol = 1e-9;

std::string shape(const MatrixXd& M) {
  return std::to_string(M.rows()) + "x" + std::to_string(M.cols());
}

lapack_logical open_left_half_plane(const double* re, const double* /*im*/) {
  return *re < 0.0 ? 1 : 0;
}

struct SchurForm {
  MatrixXd T;
  MatrixXd U;
  std::vector<double> re, im;
  Index selected = 0;
};

// Real Schur form M = U T U'. With `order_stable` the eigenvalues with
// negative real part are moved to the leading block.
SchurForm real_schur(const MatrixXd& M, bool order_stable) {
  const Index n = M.rows();
  SchurForm s;
  s.T = M;
  s.U.resize(n, n);
  s.re.resize(n);
  s.im.resize(n);
  lapack_int sdim = 0;
  const lapack_int info = LAPACKE_dgees(
      LAPACK_COL_MAJOR, 'V', order_stable ? 'S' : 'N',
      order_stable ? open_left_half_plane : nullptr, static_cast<lapack_int>(n),
      s.T.data(), static_cast<lapack_int>(n), &sdim, s.re.data(), s.im.data(),
      s.U.data(), static_cast<lapack_int>(n));
  if (info < 0) throw InvalidArgument("dgees rejected argument " + std::to_string(-info));
  if (info > 0 && info <= n) throw NoConvergence("QR iteration failed in Schur decomposition");
  // info == n+1 / n+2: reordering trouble, caught below by the dimension check
  s.selected = sdim;
  return s;
}

MatrixXd symmetrized(const MatrixXd& M) { return 0.5 * (M + M.transpose()); }

MatrixXd residual_matrix(const MatrixXd& A, const MatrixXd& G, const MatrixXd& Q,
                         const MatrixXd& P) {
  MatrixXd AtP = A.transpose() * P;
  return AtP + AtP.transpose() - P * G * P + Q;
}

void check_square(const MatrixXd& M, Index n, const char* name) {
  if (M.rows() != n || M.cols() != n) {
    throw DimensionMismatch(std::string(name) + " is " + shape(M) + ", expected " +
                            std::to_string(n) + "x" + std::to_string(n));
  }
}

}  // namespace

void LtiData::validate() const {
  const Index n = A.rows();
  check_square(A, n, "A");
  if (B.rows() != n) throw DimensionMismatch("B is " + shape(B) + " but A is " + shape(A));
  check_square(Q, n, "Q");
  check_square(R, B.cols(), "R");

  const double qn = Q.norm();
  if ((Q - Q.transpose()).norm() > 1e-12 * qn) throw InvalidArgument("Q is not symmetric");
  if (n > 0) {
    Eigen::SelfAdjointEigenSolver<MatrixXd> qe(Q, Eigen::EigenvaluesOnly);
    if (qe.eigenvalues().minCoeff() < -1e-10 * std::max(1.0, qn))
      throw InvalidArgument("Q is not positive semidefinite");
  }
  if ((R - R.transpose()).norm() > 1e-12 * R.norm()) throw InvalidArgument("R is not symmetric");
  if (R.rows() > 0) {
    Eigen::SelfAdjointEigenSolver<MatrixXd> re(R, Eigen::EigenvaluesOnly);
    if (!(re.eigenvalues().minCoeff() > 0.0)) throw InvalidArgument("R is not positive definite");
  }
}

double spectral_abscissa(const MatrixXd& M) {
  if (M.size() == 0) return -std::numeric_limits<double>::infinity();
  Eigen::EigenSolver<MatrixXd> es(M, false);
  return es.eigenvalues().real().maxCoeff();
}

double care_residual(const LtiData& sys, const MatrixXd& Pi) {
  const Index n = sys.A.rows();
  check_square(sys.A, n, "A");
  check_square(Pi, n, "Pi");
  check_square(sys.Q, n, "Q");
  if (sys.B.rows() != n) throw DimensionMismatch("B has " + std::to_string(sys.B.rows()) + " rows");
  check_square(sys.R, sys.B.cols(), "R");
  const MatrixXd G = sys.B * sys.R.ldlt().solve(sys.B.transpose());
  return residual_matrix(sys.A, G, sys.Q, Pi).norm();
}

MatrixXd solve_lyapunov(const MatrixXd& A, const MatrixXd& Q) {
  const Index n = A.rows();
  check_square(A, n, "A");
  check_square(Q, n, "Q");
  if (n == 0) return MatrixXd(0, 0);

  SchurForm s = real_schur(A, false);
  const double guard = 1e-12 * A.norm();
  for (Index i = 0; i < n; ++i) {
    for (Index j = i; j < n; ++j) {
      if (std::hypot(s.re[i] + s.re[j], s.im[i] + s.im[j]) <= guard)
        throw SingularSylvester("eigenvalues " + std::to_string(i) + " and " +
                                std::to_string(j) + " of A sum to zero");
    }
  }

  // T'Y + YT = -U'QU in Schur coordinates.
  MatrixXd C = -(s.U.transpose() * Q * s.U);
  double scale = 1.0;
  const lapack_int ln = static_cast<lapack_int>(n);
  const lapack_int info = LAPACKE_dtrsyl(LAPACK_COL_MAJOR, 'T', 'N', 1, ln, ln, s.T.data(), ln,
                                         s.T.data(), ln, C.data(), ln, &scale);
  if (info == 1) throw SingularSylvester("Schur-form Sylvester solve was perturbed");
  if (info < 0) throw InvalidArgument("dtrsyl rejected argument " + std::to_string(-info));
  C /= scale;
  return symmetrized(s.U * C * s.U.transpose());
}

RiccatiSolution solve_care(const LtiData& sys, double tol) {
  sys.validate();
  const Index n = sys.states();

  Eigen::LDLT<MatrixXd> r_fact(sys.R);
  const MatrixXd G = symmetrized(sys.B * r_fact.solve(sys.B.transpose()));

  MatrixXd H(2 * n, 2 * n);
  H << sys.A, -G, -sys.Q, -sys.A.transpose();
  const double h_norm = H.norm();

  SchurForm s = real_schur(H, true);
  for (Index i = 0; i < 2 * n; ++i) {
    if (std::abs(s.re[i]) <= kImagAxisTol * h_norm)
      throw NotStabilizable("Hamiltonian eigenvalue " + std::to_string(s.re[i]) + "+" +
                            std::to_string(s.im[i]) + "i lies on the imaginary axis");
  }
  if (s.selected != n)
    throw NotStabilizable("stable invariant subspace has dimension " +
                          std::to_string(s.selected) + ", expected " + std::to_string(n));

  const MatrixXd U11 = s.U.topLeftCorner(n, n);
  const MatrixXd U21 = s.U.bottomLeftCorner(n, n);
  Eigen::PartialPivLU<MatrixXd> lu(U11.transpose());
  if (n > 0 && !(lu.rcond() > 1e-14))
    throw NotStabilizable("stable subspace basis is not a graph over the state space");
  MatrixXd Pi = symmetrized(lu.solve(U21.transpose()).transpose());
  if (!Pi.allFinite()) throw NotStabilizable("stable subspace basis is singular");

  // Newton-Kleinman refinement: (A - G P)' D + D (A - G P) + Res(P) = 0.
  const double target = tol * std::max(1.0, sys.Q.norm());
  MatrixXd res = residual_matrix(sys.A, G, sys.Q, Pi);
  double res_norm = res.norm();
  for (int step = 0; step < kMaxNewtonSteps && res_norm > target; ++step) {
    MatrixXd delta;
    try {
      delta = solve_lyapunov(sys.A - G * Pi, res);
    } catch (const SingularSylvester&) {
      break;
    }
    MatrixXd candidate = symmetrized(Pi + delta);
    MatrixXd cand_res = residual_matrix(sys.A, G, sys.Q, candidate);
    const double cand_norm = cand_res.norm();
    if (!(cand_norm < res_norm)) break;
    Pi = std::move(candidate);
    res = std::move(cand_res);
    res_norm = cand_norm;
  }
  if (!(res_norm <= target))
    throw NoConvergence("CARE residual " + std::to_string(res_norm) + " above target " +
                        std::to_string(target));

  RiccatiSolution out;
  out.K = r_fact.solve(sys.B.transpose() * Pi);
  out.Pi = std::move(Pi);
  out.residual = res_norm;
  out.closed_loop_abscissa = spectral_abscissa(sys.A - sys.B * out.K);
  if (!(out.closed_loop_abscissa < 0.0))
    throw NotStabilizable("closed loop has spectral abscissa " +
                          std::to_string(out.closed_loop_abscissa));
  return out;
}

}  // namespace sdrenn::riccati
