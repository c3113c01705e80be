#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "sdrenn/fnn.hpp"
#include "sdrenn/models.hpp"

namespace sdrenn::config {

struct SystemConfig {
  std::string model = "allen_cahn";  // allen_cahn | cucker_smale | linear
  models::AllenCahnConfig allen_cahn;
  models::CuckerSmaleConfig cucker_smale;
  // linear model only
  Eigen::MatrixXd A, B, Q, R;
  double box_half_width = 1.0;
};

struct SamplingConfig {
  std::uint64_t count = 1000;
  std::uint64_t start_index = 1;
  double tolerance = 1e-9;
};

/// One trainable surrogate: a direct feedback net or a value net.
struct ModelConfig {
  std::string name;
  fnn::LossMode mode = fnn::LossMode::Value;
  std::vector<int> hidden;
  fnn::Activation activation = fnn::Activation::Relu;
  fnn::LossWeights weights{1.0, 1.0};
  int epochs = 20;
  int batch_size = 100;
  int lbfgs_memory = 10;
  int iterations_per_batch = 10;
  bool full_batch = false;
  std::uint64_t seed = 0;
  double train_fraction = 0.8;
  std::uint64_t split_seed = 0;
};

struct EvalConfig {
  std::uint64_t count = 10000;
  std::optional<std::uint64_t> start_index;  // default: first index after the training samples
};

struct ControllerSpec {
  std::string kind;   // zero | linear_k0 | sdre | nn_direct | nn_value
  std::string model;  // model name for nn_* controllers
  std::string label() const { return model.empty() ? kind : kind + "_" + model; }
};

struct InitialStateSpec {
  std::string kind = "allen_cahn_profile";  // allen_cahn_profile | linspace | constant | values
  double lo = 0.0;
  double hi = 0.4;
  double value = 0.0;
  std::vector<double> values;
};

struct SimulationConfig {
  std::vector<ControllerSpec> controllers;
  InitialStateSpec x0;
  double horizon = 10.0;
  double dt = 0.01;
  int substeps = 1;  // RK4 steps per control interval
  int refresh_steps = 1;
};

struct RunConfig {
  std::string name = "run";
  SystemConfig system;
  SamplingConfig sampling;
  std::vector<ModelConfig> models;
  EvalConfig eval;
  SimulationConfig simulation;
  unsigned threads = 1;
  std::filesystem::path out;

  const ModelConfig& model(const std::string& name) const;
};

/// Parses a JSON run description. Unknown keys are rejected. Throws InvalidConfig.
RunConfig parse(const std::string& text);
RunConfig load(const std::filesystem::path& path);

models::SemilinearSystem build_system(const SystemConfig& cfg);
Eigen::VectorXd initial_state(const InitialStateSpec& spec, const models::SemilinearSystem& sys);

/// Shipped hyperparameters for the two benchmark tests.
RunConfig allen_cahn_defaults();
RunConfig cucker_smale_defaults();

}  // namespace sdrenn::config
