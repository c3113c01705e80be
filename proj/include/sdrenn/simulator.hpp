#pragma once

#include <Eigen/Dense>
#include <filesystem>
#include <string>
#include <variant>
#include <vector>

#include "sdrenn/fnn.hpp"
#include "sdrenn/models.hpp"

namespace sdrenn::simulator {

struct ZeroControl {};

/// u = -K0 x with a fixed gain.
struct LinearGain {
  Eigen::MatrixXd K;
};

/// Receding-horizon SDRE: the gain is recomputed every `refresh_steps` steps
/// and u = -K x is applied at the current state in between.
struct SdreControl {
  int refresh_steps = 1;
  double tol = 1e-9;
};

/// u = u_theta(x).
struct NetworkDirect {
  fnn::Network net;
};

/// u = -1/2 R^{-1} B' grad V_theta(x).
struct NetworkValue {
  fnn::Network net;
  Eigen::MatrixXd B;
  Eigen::MatrixXd R;
};

using ControllerKind = std::variant<ZeroControl, LinearGain, SdreControl, NetworkDirect, NetworkValue>;

std::string label(const ControllerKind& c);

struct Trajectory {
  std::vector<double> times;
  std::vector<Eigen::VectorXd> states;    // one per time
  std::vector<Eigen::VectorXd> controls;  // one per step (held)
  std::vector<double> cost;               // accumulated cost at each time
  std::string controller;
  double dt = 0.0;
  bool diverged = false;
  double divergence_time = 0.0;

  const Eigen::VectorXd& final_state() const { return states.back(); }
  double total_cost() const { return cost.back(); }
};

/// Classical RK4 step of xdot = A(x) x + B(x) u with u frozen over the step.
/// Throws NonFiniteState.
Eigen::VectorXd step_rk4(const models::SemilinearSystem& sys, const Eigen::VectorXd& x,
                         const Eigen::VectorXd& u, double dt);

/// Integrates on the grid t_k = k dt up to T. Stops early, with `diverged`
/// set, when |x|_inf exceeds 1e6 or the state becomes non-finite.
/// Each control interval is covered by `substeps` RK4 steps of dt/substeps,
/// which keeps stiff diffusion operators inside the RK4 stability region.
Trajectory simulate(const models::SemilinearSystem& sys, const ControllerKind& controller,
                    const Eigen::VectorXd& x0, double T, double dt, int substeps = 1);

/// Trapezoid rule for x'Qx + u'Ru on the time grid; the last control is held
/// at the final grid point.
double total_cost(const Trajectory& traj, const Eigen::MatrixXd& Q, const Eigen::MatrixXd& R);

/// Header `t,x_1..x_n,u_1..u_m,cost`, one row per grid point; the final row
/// repeats the last control.
void write_csv(const Trajectory& traj, const std::filesystem::path& path);

}  // namespace sdrenn::simulator
