#include "sdrenn/simulator.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <string>

#include "sdrenn/errors.hpp"
#include "sdrenn/sdre.hpp"

namespace sdrenn::simulator {

using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

constexpr double kBlowUp = 1e6;

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};

double running_cost(const MatrixXd& Q, const MatrixXd& R, const VectorXd& x, const VectorXd& u) {
  return x.dot(Q * x) + u.dot(R * u);
}

// Stateful evaluation of a controller along one trajectory.
class Policy {
 public:
  Policy(const models::SemilinearSystem& sys, const ControllerKind& kind) : sys_(sys), kind_(kind) {}

  VectorXd operator()(const VectorXd& x, long step) {
    return std::visit(
        overloaded{
            [&](const ZeroControl&) -> VectorXd { return VectorXd::Zero(sys_.m); },
            [&](const LinearGain& c) -> VectorXd { return -(c.K * x); },
            [&](const SdreControl& c) -> VectorXd {
              if (step % std::max(1, c.refresh_steps) == 0 || held_.size() == 0)
                held_ = sdre::sdre_gain(sys_, x, c.tol);
              return -(held_ * x);
            },
            [&](const NetworkDirect& c) -> VectorXd { return fnn::forward(c.net, x); },
            [&](const NetworkValue& c) -> VectorXd { return fnn::feedback_from_value(c.net, c.B, c.R, x); },
        },
        kind_);
  }

 private:
  const models::SemilinearSystem& sys_;
  const ControllerKind& kind_;
  MatrixXd held_;
};

}  // namespace

std::string label(const ControllerKind& c) {
  return std::visit(overloaded{
                        [](const ZeroControl&) { return std::string("zero"); },
                        [](const LinearGain&) { return std::string("linear_k0"); },
                        [](const SdreControl&) { return std::string("sdre"); },
                        [](const NetworkDirect&) { return std::string("nn_direct"); },
                        [](const NetworkValue&) { return std::string("nn_value"); },
                    },
                    c);
}

VectorXd step_rk4(const models::SemilinearSystem& sys, const VectorXd& x, const VectorXd& u,
                  double dt) {
  if (!(dt > 0.0)) throw InvalidArgument("time step must be positive");
  if (u.size() != sys.m) throw DimensionMismatch("control of size " + std::to_string(u.size()));
  auto f = [&](const VectorXd& z) -> VectorXd { return sys.eval_A(z) * z + sys.eval_B(z) * u; };
  const VectorXd k1 = models::drift(sys, x) + sys.eval_B(x) * u;
  const VectorXd k2 = f(x + 0.5 * dt * k1);
  const VectorXd k3 = f(x + 0.5 * dt * k2);
  const VectorXd k4 = f(x + dt * k3);
  VectorXd next = x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  if (!next.allFinite()) throw NonFiniteState("RK4 step produced a non-finite state");
  return next;
}

Trajectory simulate(const models::SemilinearSystem& sys, const ControllerKind& controller,
                    const VectorXd& x0, double T, double dt, int substeps) {
  if (!(T > 0.0) || !(dt > 0.0)) throw InvalidArgument("horizon and time step must be positive");
  if (substeps < 1) throw InvalidArgument("substeps must be positive");
  const double h = dt / substeps;
  if (x0.size() != sys.n) throw DimensionMismatch("initial state of size " + std::to_string(x0.size()));
  const double ratio = T / dt;
  const long steps = std::lround(ratio);
  if (steps < 1 || std::abs(ratio - static_cast<double>(steps)) > 1e-9 * ratio)
    throw InvalidArgument("time step must divide the horizon");

  Trajectory traj;
  traj.controller = label(controller);
  traj.dt = dt;
  traj.times.reserve(static_cast<std::size_t>(steps) + 1);
  traj.states.reserve(static_cast<std::size_t>(steps) + 1);
  traj.controls.reserve(static_cast<std::size_t>(steps));
  traj.times.push_back(0.0);
  traj.states.push_back(x0);
  traj.cost.push_back(0.0);

  Policy policy(sys, controller);
  double prev_running = 0.0;
  for (long k = 0; k < steps; ++k) {
    const VectorXd& x = traj.states.back();
    VectorXd u = policy(x, k);
    const double running = running_cost(sys.Q, sys.R, x, u);
    if (k > 0) traj.cost.push_back(traj.cost.back() + 0.5 * dt * (prev_running + running));
    prev_running = running;

    VectorXd next;
    try {
      next = x;
      for (int s = 0; s < substeps; ++s) next = step_rk4(sys, next, u, h);
    } catch (const NonFiniteState&) {
      traj.diverged = true;
      traj.divergence_time = static_cast<double>(k + 1) * dt;
      break;
    }
    traj.controls.push_back(std::move(u));
    traj.times.push_back(static_cast<double>(k + 1) * dt);
    const bool blown = next.lpNorm<Eigen::Infinity>() > kBlowUp;
    traj.states.push_back(std::move(next));
    if (blown) {
      traj.diverged = true;
      traj.divergence_time = traj.times.back();
      break;
    }
  }
  if (traj.cost.size() < traj.states.size()) {
    // final grid point holds the last control
    const double running = running_cost(sys.Q, sys.R, traj.states.back(), traj.controls.back());
    traj.cost.push_back(traj.cost.back() + 0.5 * dt * (prev_running + running));
  }
  return traj;
}

double total_cost(const Trajectory& traj, const MatrixXd& Q, const MatrixXd& R) {
  if (traj.states.empty()) return 0.0;
  const std::size_t K = traj.states.size() - 1;
  if (traj.controls.size() != K) throw DimensionMismatch("trajectory needs one control per step");
  if (K == 0) return 0.0;
  const Eigen::Index n = traj.states.front().size();
  if (Q.rows() != n || Q.cols() != n || R.rows() != traj.controls.front().size())
    throw DimensionMismatch("cost weights do not match trajectory");
  auto ell = [&](std::size_t k) {
    return running_cost(Q, R, traj.states[k], traj.controls[std::min(k, K - 1)]);
  };
  double total = 0.0;
  for (std::size_t k = 0; k < K; ++k)
    total += 0.5 * (traj.times[k + 1] - traj.times[k]) * (ell(k) + ell(k + 1));
  return total;
}

void write_csv(const Trajectory& traj, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  const Eigen::Index n = traj.states.front().size();
  const Eigen::Index m = traj.controls.empty() ? 0 : traj.controls.front().size();
  out << "t";
  for (Eigen::Index i = 1; i <= n; ++i) out << ",x_" << i;
  for (Eigen::Index i = 1; i <= m; ++i) out << ",u_" << i;
  out << ",cost\n";
  char buf[32];
  auto put = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    out << buf;
  };
  for (std::size_t k = 0; k < traj.states.size(); ++k) {
    put(traj.times[k]);
    for (double v : traj.states[k]) { out << ','; put(v); }
    if (m > 0) {
      const VectorXd& u = traj.controls[std::min(k, traj.controls.size() - 1)];
      for (double v : u) { out << ','; put(v); }
    }
    out << ',';
    put(traj.cost[k]);
    out << '\n';
  }
  if (!out) throw IoError("write failed for " + path.string());
}

}  // namespace sdrenn::simulator
