#pragma once

#include <Eigen/Dense>
#include <functional>
#include <span>
#include <string>

namespace sdrenn::models {

using StateMatrixFn = std::function<Eigen::MatrixXd(const Eigen::VectorXd&)>;

/// Control-affine system in semilinear form xdot = A(x) x + B(x) u with a
/// quadratic cost x'Qx + u'Ru and a sampling box [lower, upper].
struct SemilinearSystem {
  std::string name;
  int n = 0;
  int m = 0;
  StateMatrixFn eval_A;
  StateMatrixFn eval_B;
  Eigen::MatrixXd Q;
  Eigen::MatrixXd R;
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;

  /// Shapes, weights and box are checked; throws InvalidConfig.
  void validate() const;
};

struct CuckerSmaleConfig {
  int agents = 20;
  double box_half_width = 3.0;
};

enum class AllenCahnReaction {
  Bistable,  // x (1 - x^2), equilibria 0 and +-1
  Printed,   // x (1 + x^2)
};

struct AllenCahnConfig {
  int grid = 51;
  double diffusion = 0.1;
  double omega_lo = 0.6;
  double omega_hi = 0.9;
  double control_weight = 0.1;
  double box_half_width = 2.0;
  AllenCahnReaction reaction = AllenCahnReaction::Bistable;
};

/// Communication weight 1 / (1 + |yi - yj|^2) between two agent positions.
double interaction_kernel(std::span<const double> yi, std::span<const double> yj);

/// Alignment matrix of the consensus model: off-diagonal P(yi,yj)/Na and
/// diagonal -sum_{k != i} P(yi,yk)/Na, so every row sums to zero.
Eigen::MatrixXd alignment_matrix(const Eigen::VectorXd& positions);

/// State x = (y_1..y_Na, v_1..v_Na), one control per agent acting on v.
SemilinearSystem cucker_smale_system(const CuckerSmaleConfig& cfg);

/// Neumann finite-difference Laplacian on `grid` equispaced points of [0,1]
/// with ghost-point reflection at both ends.
Eigen::MatrixXd neumann_laplacian(int grid);

/// Grid nodes i / (N - 1).
Eigen::VectorXd allen_cahn_grid(int grid);

/// Method-of-lines Allen-Cahn: A(x) = nu L + diag(1 -/+ x_i^2), B = indicator
/// of [omega_lo, omega_hi] (inclusive), Q = h I, R = control_weight.
SemilinearSystem allen_cahn_system(const AllenCahnConfig& cfg);

/// Linear time-invariant system wrapped as a semilinear one.
SemilinearSystem linear_system(std::string name, Eigen::MatrixXd A, Eigen::MatrixXd B,
                               Eigen::MatrixXd Q, Eigen::MatrixXd R, double box_half_width);

/// f(x) = A(x) x.
Eigen::VectorXd drift(const SemilinearSystem& sys, const Eigen::VectorXd& x);

}  // namespace sdrenn::models
