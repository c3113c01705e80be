#include "sdrenn/models.hpp"

#include <cmath>
#include <utility>

#include "sdrenn/errors.hpp"

namespace sdrenn::models {

using Eigen::MatrixXd;
using Eigen::VectorXd;

void SemilinearSystem::validate() const {
  if (n < 1 || m < 1) throw InvalidConfig(name + ": empty state or control dimension");
  if (!eval_A || !eval_B) throw InvalidConfig(name + ": missing A(x) or B(x)");
  if (Q.rows() != n || Q.cols() != n) throw InvalidConfig(name + ": Q has wrong shape");
  if (R.rows() != m || R.cols() != m) throw InvalidConfig(name + ": R has wrong shape");
  if (lower.size() != n || upper.size() != n) throw InvalidConfig(name + ": bounds have wrong size");
  if (!(lower.array() < upper.array()).all())
    throw InvalidConfig(name + ": lower bound must be below upper bound");
}

double interaction_kernel(std::span<const double> yi, std::span<const double> yj) {
  if (yi.size() != yj.size())
    throw DimensionMismatch("positions of size " + std::to_string(yi.size()) + " and " +
                            std::to_string(yj.size()));
  double d2 = 0.0;
  for (std::size_t k = 0; k < yi.size(); ++k) {
    const double d = yi[k] - yj[k];
    d2 += d * d;
  }
  return 1.0 / (1.0 + d2);
}

MatrixXd alignment_matrix(const VectorXd& positions) {
  const Eigen::Index na = positions.size();
  const double inv_na = 1.0 / static_cast<double>(na);
  MatrixXd out = MatrixXd::Zero(na, na);
  for (Eigen::Index i = 0; i < na; ++i) {
    double off_sum = 0.0;
    for (Eigen::Index j = 0; j < na; ++j) {
      if (j == i) continue;
      const double p = inv_na * interaction_kernel({&positions[i], 1}, {&positions[j], 1});
      out(i, j) = p;
      off_sum += p;
    }
    out(i, i) = -off_sum;
  }
  return out;
}

SemilinearSystem cucker_smale_system(const CuckerSmaleConfig& cfg) {
  if (cfg.agents < 2) throw InvalidConfig("Cucker-Smale needs at least 2 agents");
  if (!(cfg.box_half_width > 0.0)) throw InvalidConfig("Cucker-Smale box half-width must be positive");
  const int na = cfg.agents;

  SemilinearSystem sys;
  sys.name = "cucker_smale";
  sys.n = 2 * na;
  sys.m = na;
  sys.eval_A = [na](const VectorXd& x) {
    MatrixXd A = MatrixXd::Zero(2 * na, 2 * na);
    A.topRightCorner(na, na).setIdentity();
    A.bottomRightCorner(na, na) = alignment_matrix(x.head(na));
    return A;
  };
  MatrixXd B = MatrixXd::Zero(2 * na, na);
  B.bottomRows(na).setIdentity();
  sys.eval_B = [B](const VectorXd&) { return B; };
  sys.Q = MatrixXd::Identity(2 * na, 2 * na) / static_cast<double>(na);
  sys.R = MatrixXd::Identity(na, na);
  sys.lower = VectorXd::Constant(2 * na, -cfg.box_half_width);
  sys.upper = VectorXd::Constant(2 * na, cfg.box_half_width);
  return sys;
}

MatrixXd neumann_laplacian(int grid) {
  if (grid < 3) throw InvalidConfig("Laplacian needs at least 3 grid points");
  const double h = 1.0 / static_cast<double>(grid - 1);
  const double inv_h2 = 1.0 / (h * h);
  MatrixXd L = MatrixXd::Zero(grid, grid);
  for (int i = 1; i + 1 < grid; ++i) {
    L(i, i - 1) = inv_h2;
    L(i, i) = -2.0 * inv_h2;
    L(i, i + 1) = inv_h2;
  }
  // ghost node x_{-1} = x_1 (and symmetrically at the right end)
  L(0, 0) = -2.0 * inv_h2;
  L(0, 1) = 2.0 * inv_h2;
  L(grid - 1, grid - 1) = -2.0 * inv_h2;
  L(grid - 1, grid - 2) = 2.0 * inv_h2;
  return L;
}

VectorXd allen_cahn_grid(int grid) {
  VectorXd xi(grid);
  for (int i = 0; i < grid; ++i) xi[i] = static_cast<double>(i) / static_cast<double>(grid - 1);
  return xi;
}

SemilinearSystem allen_cahn_system(const AllenCahnConfig& cfg) {
  if (cfg.grid < 3) throw InvalidConfig("Allen-Cahn grid needs at least 3 points");
  if (!(cfg.diffusion > 0.0)) throw InvalidConfig("Allen-Cahn diffusion must be positive");
  if (!(cfg.omega_lo >= 0.0 && cfg.omega_lo < cfg.omega_hi && cfg.omega_hi <= 1.0))
    throw InvalidConfig("actuator interval must satisfy 0 <= lo < hi <= 1");
  if (!(cfg.control_weight > 0.0)) throw InvalidConfig("control weight must be positive");
  if (!(cfg.box_half_width > 0.0)) throw InvalidConfig("Allen-Cahn box half-width must be positive");

  const int n = cfg.grid;
  const double h = 1.0 / static_cast<double>(n - 1);
  const VectorXd xi = allen_cahn_grid(n);

  MatrixXd B = MatrixXd::Zero(n, 1);
  constexpr double kEdge = 1e-12;
  for (int i = 0; i < n; ++i) {
    if (xi[i] >= cfg.omega_lo - kEdge && xi[i] <= cfg.omega_hi + kEdge) B(i, 0) = 1.0;
  }
  if (B.sum() == 0.0) throw InvalidConfig("actuator interval contains no grid point");

  SemilinearSystem sys;
  sys.name = "allen_cahn";
  sys.n = n;
  sys.m = 1;
  const MatrixXd diffusion = cfg.diffusion * neumann_laplacian(n);
  const double sign = cfg.reaction == AllenCahnReaction::Bistable ? -1.0 : 1.0;
  sys.eval_A = [diffusion, sign](const VectorXd& x) {
    MatrixXd A = diffusion;
    A.diagonal().array() += 1.0 + sign * x.array().square();
    return A;
  };
  sys.eval_B = [B](const VectorXd&) { return B; };
  sys.Q = h * MatrixXd::Identity(n, n);
  sys.R = MatrixXd::Constant(1, 1, cfg.control_weight);
  sys.lower = VectorXd::Constant(n, -cfg.box_half_width);
  sys.upper = VectorXd::Constant(n, cfg.box_half_width);
  return sys;
}

SemilinearSystem linear_system(std::string name, MatrixXd A, MatrixXd B, MatrixXd Q, MatrixXd R,
                               double box_half_width) {
  SemilinearSystem sys;
  sys.name = std::move(name);
  sys.n = static_cast<int>(A.rows());
  sys.m = static_cast<int>(B.cols());
  sys.eval_A = [A = std::move(A)](const VectorXd&) { return A; };
  sys.eval_B = [B = std::move(B)](const VectorXd&) { return B; };
  sys.Q = std::move(Q);
  sys.R = std::move(R);
  sys.lower = VectorXd::Constant(sys.n, -box_half_width);
  sys.upper = VectorXd::Constant(sys.n, box_half_width);
  sys.validate();
  return sys;
}

VectorXd drift(const SemilinearSystem& sys, const VectorXd& x) {
  if (x.size() != sys.n)
    throw DimensionMismatch("state of size " + std::to_string(x.size()) + ", system has " +
                            std::to_string(sys.n));
  return sys.eval_A(x) * x;
}

}  // namespace sdrenn::models
