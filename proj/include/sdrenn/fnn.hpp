#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace sdrenn::fnn {

enum class Activation { Relu, Tanh };

Activation parse_activation(const std::string& name);
std::string to_string(Activation a);

/// Layer sizes [n_in, h_1, ..., n_out]; one activation per hidden layer, the
/// output layer is linear.
struct Architecture {
  std::vector<int> layer_sizes;
  std::vector<Activation> activations;

  int inputs() const { return layer_sizes.front(); }
  int outputs() const { return layer_sizes.back(); }
  std::size_t layers() const { return layer_sizes.size() - 1; }
  /// Throws InvalidArgument.
  void validate() const;
  /// Convenience: `hidden` copies of `width` with the same activation.
  static Architecture uniform(int n_in, int hidden, int width, Activation act, int n_out);
};

/// weights[k] maps layer k to layer k+1 (shape sizes[k+1] x sizes[k]).
struct NetworkParams {
  std::vector<Eigen::MatrixXd> weights;
  std::vector<Eigen::VectorXd> biases;

  std::size_t size() const;
  /// Layer by layer: weight (column-major) then bias.
  Eigen::VectorXd flatten() const;
  void assign(const Eigen::VectorXd& flat);
  /// Same shapes, all zeros.
  NetworkParams zeros_like() const;
};

struct Network {
  Architecture arch;
  NetworkParams params;

  /// Shapes of params agree with arch; throws DimensionMismatch.
  void check() const;
};

/// Glorot-uniform weights, zero biases.
NetworkParams init_params(const Architecture& arch, std::uint64_t seed);
Network make_network(const Architecture& arch, std::uint64_t seed);

Eigen::VectorXd forward(const Network& net, const Eigen::VectorXd& x);
/// Columns of X are samples.
Eigen::MatrixXd forward_batch(const Network& net, const Eigen::MatrixXd& X);

/// Gradient of a scalar-output network with respect to its input.
Eigen::VectorXd input_gradient(const Network& net, const Eigen::VectorXd& x);
/// Column j is the input gradient at sample j (scalar-output networks).
Eigen::MatrixXd input_gradient_batch(const Network& net, const Eigen::MatrixXd& X);
/// n_out x n_in Jacobian.
Eigen::MatrixXd input_jacobian(const Network& net, const Eigen::VectorXd& x);

/// (1/N) sum_i |p_i - t_i|^2 with samples as columns.
double mse_loss(const Eigen::MatrixXd& preds, const Eigen::MatrixXd& targets);

/// 1 - SS_res / SS_tot with t-bar the componentwise mean; samples as columns.
double r_squared(const Eigen::MatrixXd& preds, const Eigen::MatrixXd& targets);

struct LossWeights {
  double mu_V = 1.0;
  double mu_dV = 0.0;
};

enum class LossMode {
  Direct,  // plain MSE on the network output
  Value,   // mu_V MSE(V) + mu_dV MSE(grad V) on a scalar-output network
};

struct LossSpec {
  LossMode mode = LossMode::Direct;
  LossWeights weights;
};

/// Training samples as columns. In Direct mode `Y` holds the targets; in
/// Value mode `Y` is the 1 x N row of values and `G` the n_in x N gradients.
struct Batch {
  Eigen::MatrixXd X;
  Eigen::MatrixXd Y;
  Eigen::MatrixXd G;

  Eigen::Index size() const { return X.cols(); }
  Batch columns(const std::vector<Eigen::Index>& idx) const;
};

struct LossBreakdown {
  double total = 0.0;
  double value_term = 0.0;     // MSE of outputs (Direct) or of V (Value)
  double gradient_term = 0.0;  // MSE of input gradients (Value mode only)
};

LossBreakdown evaluate_loss(const Network& net, const Batch& batch, const LossSpec& spec);

/// mu_V MSE(V, V_theta) + mu_dV MSE(grad V, grad V_theta).
double grad_aug_loss(const Network& net, const Batch& batch, const LossWeights& w);

/// Exact gradient of the selected loss with respect to every weight and bias.
/// In Value mode with mu_dV > 0 this differentiates the input gradient with
/// respect to the parameters (reverse over reverse).
NetworkParams loss_param_gradient(const Network& net, const Batch& batch, const LossSpec& spec,
                                  double* loss = nullptr);

/// Constant control map used by the feedback layer u = -1/2 R^{-1} B' grad V.
struct FeedbackMap {
  Eigen::MatrixXd B;
  Eigen::MatrixXd R;
};

Eigen::VectorXd feedback_from_value(const Network& net, const Eigen::MatrixXd& B,
                                    const Eigen::MatrixXd& R, const Eigen::VectorXd& x);
Eigen::MatrixXd feedback_from_value_batch(const Network& net, const FeedbackMap& fb,
                                          const Eigen::MatrixXd& X);

struct TrainOptions {
  LossSpec loss;
  int epochs = 20;
  int batch_size = 100;
  int lbfgs_memory = 10;
  int iterations_per_batch = 10;
  bool full_batch = false;
  std::uint64_t seed = 0;
  /// Value mode only: select the best epoch by r2 of the induced feedback
  /// instead of r2 of V.
  std::optional<FeedbackMap> feedback;
};

struct EpochRecord {
  int epoch = 0;
  double train_loss = 0.0;
  double val_loss = 0.0;
  double val_r2 = 0.0;  // NaN when the targets are degenerate
};

struct TrainResult {
  NetworkParams params;
  std::vector<EpochRecord> history;
  int best_epoch = 0;
  double best_r2 = 0.0;
};

/// Mini-batch L-BFGS. Curvature memory is reset at every batch boundary.
/// Returns the parameters of the epoch with the best validation r2.
TrainResult train(const Network& init, const Batch& train_set, const Batch& val_set,
                  const TrainOptions& opts);

/// Validation metric used for early stopping.
double selection_r2(const Network& net, const Batch& batch, const TrainOptions& opts);

struct CheckpointMeta {
  std::uint64_t seed = 0;
  LossSpec loss;
  std::string label;
};

/// One JSON header line followed by the raw little-endian float64 parameters.
void save_checkpoint(const std::filesystem::path& path, const Network& net,
                     const CheckpointMeta& meta);
Network load_checkpoint(const std::filesystem::path& path, CheckpointMeta* meta = nullptr);

}  // namespace sdrenn::fnn
