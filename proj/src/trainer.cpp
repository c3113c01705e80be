#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <numeric>
#include <random>
#include <string>

#include "sdrenn/errors.hpp"
#include "sdrenn/fnn.hpp"

namespace sdrenn::fnn {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

constexpr double kArmijo = 1e-4;
constexpr int kMaxBacktracks = 40;

// Loss and flat gradient at a flat parameter vector.
class Objective {
 public:
  Objective(const Network& shape, const Batch& batch, const LossSpec& spec)
      : net_(shape), batch_(batch), spec_(spec) {}

  double operator()(const VectorXd& theta, VectorXd& grad) {
    net_.params.assign(theta);
    double loss = 0.0;
    grad = loss_param_gradient(net_, batch_, spec_, &loss).flatten();
    return loss;
  }

 private:
  Network net_;
  const Batch& batch_;
  const LossSpec& spec_;
};

// Two-loop recursion over stored (s, y) pairs.
VectorXd lbfgs_direction(const VectorXd& g, const std::deque<VectorXd>& S,
                         const std::deque<VectorXd>& Y) {
  VectorXd q = -g;
  const std::size_t m = S.size();
  std::vector<double> alpha(m), rho(m);
  for (std::size_t i = m; i-- > 0;) {
    rho[i] = 1.0 / Y[i].dot(S[i]);
    alpha[i] = rho[i] * S[i].dot(q);
    q -= alpha[i] * Y[i];
  }
  if (m > 0) q *= S.back().dot(Y.back()) / Y.back().squaredNorm();
  for (std::size_t i = 0; i < m; ++i) {
    const double beta = rho[i] * Y[i].dot(q);
    q += (alpha[i] - beta) * S[i];
  }
  return q;
}

// Runs `iterations` L-BFGS steps from theta on one batch with fresh memory.
void lbfgs_run(Objective& f, VectorXd& theta, int iterations, int memory, int epoch) {
  VectorXd g;
  double fx = f(theta, g);
  if (!std::isfinite(fx)) throw NonFiniteLoss(epoch);

  std::deque<VectorXd> S, Y;
  VectorXd g_new;
  for (int it = 0; it < iterations; ++it) {
    const double gnorm = g.norm();
    if (!(gnorm > 0.0)) break;
    VectorXd d = lbfgs_direction(g, S, Y);
    double slope = g.dot(d);
    if (!(slope < 0.0)) {
      S.clear();
      Y.clear();
      d = -g;
      slope = -gnorm * gnorm;
    }
    double step = S.empty() ? std::min(1.0, 1.0 / gnorm) : 1.0;

    bool accepted = false;
    VectorXd trial;
    double f_trial = 0.0;
    for (int bt = 0; bt < kMaxBacktracks; ++bt) {
      trial = theta + step * d;
      f_trial = f(trial, g_new);
      if (std::isfinite(f_trial) && f_trial <= fx + kArmijo * step * slope) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;

    VectorXd s = trial - theta;
    VectorXd y = g_new - g;
    if (s.dot(y) > 1e-10 * s.norm() * y.norm()) {
      S.push_back(std::move(s));
      Y.push_back(std::move(y));
      if (static_cast<int>(S.size()) > memory) {
        S.pop_front();
        Y.pop_front();
      }
    }
    theta = std::move(trial);
    g.swap(g_new);
    fx = f_trial;
  }
}

void check_set(const Batch& b, const char* name) {
  if (b.size() == 0) throw EmptySet(std::string(name) + " set is empty");
}

}  // namespace

double selection_r2(const Network& net, const Batch& batch, const TrainOptions& opts) {
  if (opts.loss.mode == LossMode::Direct) return r_squared(forward_batch(net, batch.X), batch.Y);
  if (opts.feedback) {
    const MatrixXd target = -0.5 * opts.feedback->R.ldlt().solve(opts.feedback->B.transpose() * batch.G);
    return r_squared(feedback_from_value_batch(net, *opts.feedback, batch.X), target);
  }
  return r_squared(forward_batch(net, batch.X), batch.Y);
}

TrainResult train(const Network& init, const Batch& train_set, const Batch& val_set,
                  const TrainOptions& opts) {
  init.check();
  check_set(train_set, "training");
  if (opts.epochs < 1) throw InvalidArgument("epochs must be positive");
  if (opts.batch_size < 1) throw InvalidArgument("batch size must be positive");
  if (opts.lbfgs_memory < 1) throw InvalidArgument("L-BFGS memory must be positive");
  // without validation data the training set doubles as the selection set
  const Batch& select_set = val_set.size() > 0 ? val_set : train_set;

  Network net = init;
  VectorXd theta = net.params.flatten();
  std::mt19937_64 rng(opts.seed);

  std::vector<Index> order(static_cast<std::size_t>(train_set.size()));
  std::iota(order.begin(), order.end(), Index{0});

  TrainResult result;
  result.params = net.params;
  result.best_r2 = -std::numeric_limits<double>::infinity();
  bool have_best = false;

  for (int epoch = 1; epoch <= opts.epochs; ++epoch) {
    if (opts.full_batch) {
      Objective f(net, train_set, opts.loss);
      lbfgs_run(f, theta, opts.iterations_per_batch, opts.lbfgs_memory, epoch);
    } else {
      std::shuffle(order.begin(), order.end(), rng);
      for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(opts.batch_size)) {
        const std::size_t stop = std::min(order.size(), start + static_cast<std::size_t>(opts.batch_size));
        const Batch batch = train_set.columns({order.begin() + static_cast<std::ptrdiff_t>(start),
                                               order.begin() + static_cast<std::ptrdiff_t>(stop)});
        Objective f(net, batch, opts.loss);
        lbfgs_run(f, theta, opts.iterations_per_batch, opts.lbfgs_memory, epoch);
      }
    }
    net.params.assign(theta);

    EpochRecord rec;
    rec.epoch = epoch;
    rec.train_loss = evaluate_loss(net, train_set, opts.loss).total;
    rec.val_loss = val_set.size() > 0 ? evaluate_loss(net, val_set, opts.loss).total
                                      : std::numeric_limits<double>::quiet_NaN();
    if (!std::isfinite(rec.train_loss)) throw NonFiniteLoss(epoch);
    try {
      rec.val_r2 = selection_r2(net, select_set, opts);
    } catch (const DegenerateTargets&) {
      rec.val_r2 = std::numeric_limits<double>::quiet_NaN();
    }
    result.history.push_back(rec);

    if (std::isfinite(rec.val_r2) && (!have_best || rec.val_r2 > result.best_r2)) {
      have_best = true;
      result.best_r2 = rec.val_r2;
      result.best_epoch = epoch;
      result.params = net.params;
    }
  }
  if (!have_best) {
    result.params = net.params;
    result.best_epoch = opts.epochs;
    result.best_r2 = std::numeric_limits<double>::quiet_NaN();
  }
  return result;
}

}  // namespace sdrenn::fnn
