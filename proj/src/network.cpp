#include <cmath>
#include <random>
#include <string>

#include "network_internal.hpp"
#include "sdrenn/errors.hpp"
#include "sdrenn/sdre.hpp"

namespace sdrenn::fnn {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

Activation parse_activation(const std::string& name) {
  if (name == "relu") return Activation::Relu;
  if (name == "tanh") return Activation::Tanh;
  throw InvalidArgument("unknown activation '" + name + "'");
}

std::string to_string(Activation a) { return a == Activation::Relu ? "relu" : "tanh"; }

void Architecture::validate() const {
  if (layer_sizes.size() < 3) throw InvalidArgument("network needs at least one hidden layer");
  for (int s : layer_sizes) {
    if (s < 1) throw InvalidArgument("layer sizes must be positive");
  }
  if (activations.size() != layer_sizes.size() - 2)
    throw InvalidArgument("need one activation per hidden layer");
}

Architecture Architecture::uniform(int n_in, int hidden, int width, Activation act, int n_out) {
  Architecture a;
  a.layer_sizes.push_back(n_in);
  for (int i = 0; i < hidden; ++i) a.layer_sizes.push_back(width);
  a.layer_sizes.push_back(n_out);
  a.activations.assign(static_cast<std::size_t>(hidden), act);
  a.validate();
  return a;
}

std::size_t NetworkParams::size() const {
  std::size_t total = 0;
  for (std::size_t k = 0; k < weights.size(); ++k)
    total += static_cast<std::size_t>(weights[k].size() + biases[k].size());
  return total;
}

VectorXd NetworkParams::flatten() const {
  VectorXd flat(static_cast<Index>(size()));
  Index pos = 0;
  for (std::size_t k = 0; k < weights.size(); ++k) {
    flat.segment(pos, weights[k].size()) = weights[k].reshaped();
    pos += weights[k].size();
    flat.segment(pos, biases[k].size()) = biases[k];
    pos += biases[k].size();
  }
  return flat;
}

void NetworkParams::assign(const VectorXd& flat) {
  if (static_cast<std::size_t>(flat.size()) != size())
    throw DimensionMismatch("flat parameter vector of size " + std::to_string(flat.size()) +
                            ", expected " + std::to_string(size()));
  Index pos = 0;
  for (std::size_t k = 0; k < weights.size(); ++k) {
    weights[k].reshaped() = flat.segment(pos, weights[k].size());
    pos += weights[k].size();
    biases[k] = flat.segment(pos, biases[k].size());
    pos += biases[k].size();
  }
}

NetworkParams NetworkParams::zeros_like() const {
  NetworkParams z;
  for (std::size_t k = 0; k < weights.size(); ++k) {
    z.weights.push_back(MatrixXd::Zero(weights[k].rows(), weights[k].cols()));
    z.biases.push_back(VectorXd::Zero(biases[k].size()));
  }
  return z;
}

void Network::check() const {
  arch.validate();
  if (params.weights.size() != arch.layers() || params.biases.size() != arch.layers())
    throw DimensionMismatch("parameter layer count does not match architecture");
  for (std::size_t k = 0; k < arch.layers(); ++k) {
    if (params.weights[k].rows() != arch.layer_sizes[k + 1] ||
        params.weights[k].cols() != arch.layer_sizes[k] ||
        params.biases[k].size() != arch.layer_sizes[k + 1])
      throw DimensionMismatch("layer " + std::to_string(k) + " has wrong parameter shape");
  }
}

NetworkParams init_params(const Architecture& arch, std::uint64_t seed) {
  arch.validate();
  std::mt19937_64 rng(seed);
  NetworkParams p;
  for (std::size_t k = 0; k < arch.layers(); ++k) {
    const int fan_in = arch.layer_sizes[k];
    const int fan_out = arch.layer_sizes[k + 1];
    const double bound = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    std::uniform_real_distribution<double> dist(-bound, bound);
    MatrixXd W(fan_out, fan_in);
    for (Index j = 0; j < W.size(); ++j) W.data()[j] = dist(rng);
    p.weights.push_back(std::move(W));
    p.biases.push_back(VectorXd::Zero(fan_out));
  }
  return p;
}

Network make_network(const Architecture& arch, std::uint64_t seed) {
  return Network{arch, init_params(arch, seed)};
}

namespace detail {

MatrixXd activate(Activation a, const MatrixXd& z) {
  if (a == Activation::Relu) return z.cwiseMax(0.0);
  return z.array().tanh().matrix();
}

MatrixXd derivative(Activation a, const MatrixXd& z) {
  if (a == Activation::Relu) return (z.array() > 0.0).cast<double>().matrix();
  return (1.0 - z.array().tanh().square()).matrix();
}

MatrixXd second_derivative(Activation a, const MatrixXd& z) {
  if (a == Activation::Relu) return MatrixXd::Zero(z.rows(), z.cols());
  const Eigen::ArrayXXd th = z.array().tanh();
  return (-2.0 * th * (1.0 - th.square())).matrix();
}

ForwardCache forward_cached(const Network& net, const MatrixXd& X) {
  if (X.rows() != net.arch.inputs())
    throw DimensionMismatch("input of size " + std::to_string(X.rows()) + ", network expects " +
                            std::to_string(net.arch.inputs()));
  const std::size_t L = net.arch.layers();
  ForwardCache c;
  c.act.reserve(L);
  c.pre.reserve(L - 1);
  c.act.push_back(X);
  for (std::size_t k = 0; k + 1 < L; ++k) {
    MatrixXd z = net.params.weights[k] * c.act.back();
    z.colwise() += net.params.biases[k];
    c.act.push_back(activate(net.arch.activations[k], z));
    c.pre.push_back(std::move(z));
  }
  c.out = net.params.weights[L - 1] * c.act.back();
  c.out.colwise() += net.params.biases[L - 1];
  return c;
}

void input_gradient_sweep(const Network& net, const ForwardCache& cache, std::vector<MatrixXd>& s,
                          std::vector<MatrixXd>& t) {
  if (net.arch.outputs() != 1)
    throw DimensionMismatch("input gradient needs a scalar-output network");
  const std::size_t L = net.arch.layers();
  const Index N = cache.act.front().cols();
  s.assign(L, MatrixXd());
  t.assign(L - 1, MatrixXd());
  s[L - 1] = net.params.weights[L - 1].transpose().replicate(1, N);
  for (std::size_t k = L - 1; k-- > 0;) {
    t[k] = derivative(net.arch.activations[k], cache.pre[k]).cwiseProduct(s[k + 1]);
    s[k] = net.params.weights[k].transpose() * t[k];
  }
}

}  // namespace detail

MatrixXd forward_batch(const Network& net, const MatrixXd& X) {
  return detail::forward_cached(net, X).out;
}

VectorXd forward(const Network& net, const VectorXd& x) { return forward_batch(net, x); }

MatrixXd input_gradient_batch(const Network& net, const MatrixXd& X) {
  const detail::ForwardCache cache = detail::forward_cached(net, X);
  std::vector<MatrixXd> s, t;
  detail::input_gradient_sweep(net, cache, s, t);
  return std::move(s[0]);
}

VectorXd input_gradient(const Network& net, const VectorXd& x) {
  return input_gradient_batch(net, x);
}

MatrixXd input_jacobian(const Network& net, const VectorXd& x) {
  const detail::ForwardCache cache = detail::forward_cached(net, x);
  const std::size_t L = net.arch.layers();
  // rows of the running product d(out)/d(a_k)
  MatrixXd J = net.params.weights[L - 1];
  for (std::size_t k = L - 1; k-- > 0;) {
    const VectorXd d = detail::derivative(net.arch.activations[k], cache.pre[k]);
    J = (J * d.asDiagonal()) * net.params.weights[k];
  }
  return J;
}

VectorXd feedback_from_value(const Network& net, const MatrixXd& B, const MatrixXd& R,
                             const VectorXd& x) {
  return sdre::feedback_from_gradient(B, R, input_gradient(net, x));
}

MatrixXd feedback_from_value_batch(const Network& net, const FeedbackMap& fb, const MatrixXd& X) {
  const MatrixXd G = input_gradient_batch(net, X);
  if (fb.B.rows() != G.rows()) throw DimensionMismatch("feedback map B does not match network input");
  return -0.5 * fb.R.ldlt().solve(fb.B.transpose() * G);
}

}  // namespace sdrenn::fnn
