#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "sdrenn/config.hpp"
#include "sdrenn/dataset.hpp"
#include "sdrenn/fnn.hpp"

namespace sdrenn::pipeline {

/// File names inside a run directory.
struct RunLayout {
  std::filesystem::path root;

  std::filesystem::path dataset() const { return root / "dataset.csv"; }
  std::filesystem::path manifest() const { return root / "manifest.json"; }
  std::filesystem::path checkpoint(const std::string& model) const { return root / ("model_" + model + ".ckpt"); }
  std::filesystem::path history(const std::string& model) const { return root / ("history_" + model + ".csv"); }
  std::filesystem::path summary(const std::string& model) const { return root / ("summary_" + model + ".json"); }
  std::filesystem::path eval() const { return root / "eval.json"; }
  std::filesystem::path trajectory(const std::string& label) const { return root / ("traj_" + label + ".csv"); }
  std::filesystem::path costs() const { return root / "costs.csv"; }
};

/// r2 and MSE of one predicted variable; r2 is absent for degenerate targets.
struct FitMetric {
  std::string variable;  // V, gradV, u_V, u_theta
  std::optional<double> r2;
  double mse = 0.0;
  std::string note;
};

struct GenReport {
  std::size_t records = 0;
  std::size_t discarded = 0;
  double seconds = 0.0;
};

struct TrainReport {
  std::string model;
  int best_epoch = 0;
  std::vector<fnn::EpochRecord> history;
  std::vector<FitMetric> metrics;
};

struct SimRow {
  std::string controller;
  double cost = 0.0;
  double final_inf_norm = 0.0;
  double final_two_norm = 0.0;
  bool diverged = false;
  double divergence_time = 0.0;
  std::string error;
};

/// Batch for training the given model kind from dataset records.
fnn::Batch make_batch(const dataset::Dataset& ds, fnn::LossMode mode);

/// Goodness-of-fit table for a trained model against reference records.
std::vector<FitMetric> fit_metrics(const fnn::Network& net, fnn::LossMode mode,
                                   const dataset::Dataset& reference, const fnn::FeedbackMap& fb);

/// Halton-sample the system box and solve the SDRE at each state.
GenReport cmd_gen(const config::RunConfig& cfg);
/// Train one configured model on the run's dataset.
TrainReport cmd_train(const config::RunConfig& cfg, const std::string& model);
/// Score every trained model against fresh SDRE solves on held-out points.
std::vector<std::pair<std::string, std::vector<FitMetric>>> cmd_eval(const config::RunConfig& cfg);
/// Closed-loop runs for every configured controller.
std::vector<SimRow> cmd_simulate(const config::RunConfig& cfg);

}  // namespace sdrenn::pipeline
