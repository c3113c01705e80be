#include <string>

#include "network_internal.hpp"
#include "sdrenn/errors.hpp"

namespace sdrenn::fnn {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

void check_same_shape(const MatrixXd& a, const MatrixXd& b, const char* what) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw DimensionMismatch(std::string(what) + ": " + std::to_string(a.rows()) + "x" +
                            std::to_string(a.cols()) + " vs " + std::to_string(b.rows()) + "x" +
                            std::to_string(b.cols()));
}

void check_batch(const Network& net, const Batch& batch, const LossSpec& spec) {
  if (batch.size() == 0) throw EmptyBatch("loss over an empty batch");
  if (batch.X.rows() != net.arch.inputs()) throw DimensionMismatch("batch inputs do not match network");
  if (spec.mode == LossMode::Direct) {
    if (batch.Y.rows() != net.arch.outputs() || batch.Y.cols() != batch.size())
      throw DimensionMismatch("batch targets do not match network output");
    return;
  }
  if (net.arch.outputs() != 1) throw DimensionMismatch("value loss needs a scalar-output network");
  if (spec.weights.mu_V < 0.0 || spec.weights.mu_dV < 0.0 ||
      (spec.weights.mu_V == 0.0 && spec.weights.mu_dV == 0.0))
    throw InvalidArgument("loss weights must be non-negative and not both zero");
  if (spec.weights.mu_V > 0.0 && (batch.Y.rows() != 1 || batch.Y.cols() != batch.size()))
    throw DimensionMismatch("value targets must be a 1 x N row");
  if (spec.weights.mu_dV > 0.0 && (batch.G.rows() != batch.X.rows() || batch.G.cols() != batch.size()))
    throw DimensionMismatch("gradient targets must be n_in x N");
}

}  // namespace

Batch Batch::columns(const std::vector<Index>& idx) const {
  Batch b;
  b.X = X(Eigen::all, idx);
  if (Y.size() > 0) b.Y = Y(Eigen::all, idx);
  if (G.size() > 0) b.G = G(Eigen::all, idx);
  return b;
}

double mse_loss(const MatrixXd& preds, const MatrixXd& targets) {
  check_same_shape(preds, targets, "mse_loss");
  if (preds.cols() == 0) throw EmptyBatch("mse_loss over zero samples");
  return (preds - targets).squaredNorm() / static_cast<double>(preds.cols());
}

double r_squared(const MatrixXd& preds, const MatrixXd& targets) {
  check_same_shape(preds, targets, "r_squared");
  if (targets.cols() < 2) throw DegenerateTargets("r2 needs at least two samples");
  const VectorXd mean = targets.rowwise().mean();
  const double ss_tot = (targets.colwise() - mean).squaredNorm();
  if (!(ss_tot > 0.0)) throw DegenerateTargets("all targets are identical");
  return 1.0 - (targets - preds).squaredNorm() / ss_tot;
}

LossBreakdown evaluate_loss(const Network& net, const Batch& batch, const LossSpec& spec) {
  check_batch(net, batch, spec);
  const double inv_n = 1.0 / static_cast<double>(batch.size());
  LossBreakdown lb;
  if (spec.mode == LossMode::Direct) {
    lb.value_term = (forward_batch(net, batch.X) - batch.Y).squaredNorm() * inv_n;
    lb.total = lb.value_term;
    return lb;
  }
  const detail::ForwardCache cache = detail::forward_cached(net, batch.X);
  if (spec.weights.mu_V > 0.0) lb.value_term = (cache.out - batch.Y).squaredNorm() * inv_n;
  if (spec.weights.mu_dV > 0.0) {
    std::vector<MatrixXd> s, t;
    detail::input_gradient_sweep(net, cache, s, t);
    lb.gradient_term = (s[0] - batch.G).squaredNorm() * inv_n;
  }
  lb.total = spec.weights.mu_V * lb.value_term + spec.weights.mu_dV * lb.gradient_term;
  return lb;
}

double grad_aug_loss(const Network& net, const Batch& batch, const LossWeights& w) {
  return evaluate_loss(net, batch, LossSpec{LossMode::Value, w}).total;
}

NetworkParams loss_param_gradient(const Network& net, const Batch& batch, const LossSpec& spec,
                                  double* loss) {
  check_batch(net, batch, spec);
  const std::size_t L = net.arch.layers();
  const Index N = batch.size();
  const double inv_n = 1.0 / static_cast<double>(N);
  const auto& W = net.params.weights;

  const detail::ForwardCache cache = detail::forward_cached(net, batch.X);
  NetworkParams grad = net.params.zeros_like();

  const bool direct = spec.mode == LossMode::Direct;
  const double mu_v = direct ? 1.0 : spec.weights.mu_V;
  const bool value_term = direct || mu_v > 0.0;
  const bool grad_term = !direct && spec.weights.mu_dV > 0.0;

  double value_loss = 0.0, grad_loss = 0.0;

  // Adjoint of the input-gradient sweep. Each s[k] = W_k' t[k] and
  // t[k] = sigma'(z_k) .* s[k+1]; differentiating the latter through z_k
  // produces extra pre-activation adjoints that join the ordinary backprop.
  std::vector<MatrixXd> z_inject;
  if (grad_term) {
    std::vector<MatrixXd> s, t;
    detail::input_gradient_sweep(net, cache, s, t);
    const MatrixXd diff = s[0] - batch.G;
    grad_loss = diff.squaredNorm() * inv_n;
    MatrixXd s_bar = (2.0 * spec.weights.mu_dV * inv_n) * diff;
    z_inject.resize(L - 1);
    for (std::size_t k = 0; k + 1 < L; ++k) {
      grad.weights[k].noalias() += t[k] * s_bar.transpose();
      const MatrixXd t_bar = W[k] * s_bar;
      const Activation act = net.arch.activations[k];
      // relu has sigma'' = 0 off the kinks, so nothing is injected
      if (act != Activation::Relu)
        z_inject[k] = detail::second_derivative(act, cache.pre[k]).cwiseProduct(s[k + 1]).cwiseProduct(t_bar);
      s_bar = detail::derivative(act, cache.pre[k]).cwiseProduct(t_bar);
    }
    // s[L-1] is W_{L-1}' broadcast over the batch
    grad.weights[L - 1] += s_bar.rowwise().sum().transpose();
  }

  MatrixXd a_bar;
  if (value_term) {
    const MatrixXd diff = cache.out - batch.Y;
    value_loss = diff.squaredNorm() * inv_n;
    const MatrixXd out_bar = (2.0 * mu_v * inv_n) * diff;
    grad.weights[L - 1].noalias() += out_bar * cache.act[L - 1].transpose();
    grad.biases[L - 1] += out_bar.rowwise().sum();
    a_bar = W[L - 1].transpose() * out_bar;
  }

  bool have_a_bar = value_term;
  for (std::size_t k = L - 1; k-- > 0;) {
    MatrixXd z_bar;
    if (have_a_bar) {
      z_bar = detail::derivative(net.arch.activations[k], cache.pre[k]).cwiseProduct(a_bar);
      if (grad_term && z_inject[k].size() > 0) z_bar += z_inject[k];
    } else if (z_inject[k].size() > 0) {
      z_bar = std::move(z_inject[k]);
    } else {
      z_bar = MatrixXd::Zero(W[k].rows(), N);
    }
    grad.weights[k].noalias() += z_bar * cache.act[k].transpose();
    grad.biases[k] += z_bar.rowwise().sum();
    if (k > 0) {
      a_bar = W[k].transpose() * z_bar;
      have_a_bar = true;
    }
  }

  if (loss) {
    *loss = direct ? value_loss : mu_v * value_loss + spec.weights.mu_dV * grad_loss;
  }
  return grad;
}

}  // namespace sdrenn::fnn
