#pragma once

#include <vector>

#include "sdrenn/fnn.hpp"

namespace sdrenn::fnn::detail {

// Pre-activations z_k and activations a_k of every hidden layer, a_0 = X.
struct ForwardCache {
  std::vector<Eigen::MatrixXd> pre;
  std::vector<Eigen::MatrixXd> act;
  Eigen::MatrixXd out;
};

ForwardCache forward_cached(const Network& net, const Eigen::MatrixXd& X);

Eigen::MatrixXd activate(Activation a, const Eigen::MatrixXd& z);
// sigma'(z); relu uses 0 at the kink
Eigen::MatrixXd derivative(Activation a, const Eigen::MatrixXd& z);
// sigma''(z); zero for relu
Eigen::MatrixXd second_derivative(Activation a, const Eigen::MatrixXd& z);

// Reverse sweep of d(out)/dx for a scalar-output net. Fills s[k] (the adjoint
// of layer k's activation, s[0] = input gradient) and t[k] = sigma'(z_k) .* s[k].
void input_gradient_sweep(const Network& net, const ForwardCache& cache,
                          std::vector<Eigen::MatrixXd>& s, std::vector<Eigen::MatrixXd>& t);

}  // namespace sdrenn::fnn::detail
