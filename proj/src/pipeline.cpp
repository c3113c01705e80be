#include "sdrenn/pipeline.hpp"

#include <chrono>
#include <cstdio>
#include <fstream>

#include "json.hpp"
#include "sdrenn/errors.hpp"
#include "sdrenn/sdre.hpp"
#include "sdrenn/simulator.hpp"

namespace sdrenn::pipeline {

namespace {

using json = nlohmann::json;
using Eigen::MatrixXd;
using Eigen::VectorXd;

std::string g17(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

fnn::FeedbackMap feedback_map(const models::SemilinearSystem& sys) {
  return {sys.eval_B(VectorXd::Zero(sys.n)), sys.R};
}

FitMetric metric(std::string variable, const MatrixXd& pred, const MatrixXd& target) {
  FitMetric m;
  m.variable = std::move(variable);
  m.mse = fnn::mse_loss(pred, target);
  try {
    m.r2 = fnn::r_squared(pred, target);
  } catch (const DegenerateTargets& e) {
    m.note = "DegenerateTargets";
  }
  return m;
}

json metrics_json(const std::vector<FitMetric>& metrics) {
  json rows = json::array();
  for (const auto& m : metrics) {
    json row = {{"variable", m.variable}, {"mse", m.mse}};
    row["r2"] = m.r2 ? json(*m.r2) : json(nullptr);
    if (!m.note.empty()) row["note"] = m.note;
    rows.push_back(row);
  }
  return rows;
}

void write_json(const std::filesystem::path& path, const json& j) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << j.dump(2) << '\n';
  if (!out) throw IoError("write failed for " + path.string());
}

dataset::Dataset load_run_dataset(const config::RunConfig& cfg, const models::SemilinearSystem& sys) {
  const RunLayout layout{cfg.out};
  dataset::Dataset ds = dataset::load(layout.dataset(), layout.manifest());
  if (ds.meta.system_name != sys.name || ds.n != sys.n || ds.m != sys.m)
    throw FormatError("dataset was generated for '" + ds.meta.system_name + "' (n=" + std::to_string(ds.n) +
                      "), config describes '" + sys.name + "' (n=" + std::to_string(sys.n) + ")");
  return ds;
}

fnn::Architecture architecture(const config::ModelConfig& mc, const models::SemilinearSystem& sys) {
  fnn::Architecture arch;
  arch.layer_sizes.push_back(sys.n);
  for (int h : mc.hidden) arch.layer_sizes.push_back(h);
  arch.layer_sizes.push_back(mc.mode == fnn::LossMode::Direct ? sys.m : 1);
  arch.activations.assign(mc.hidden.size(), mc.activation);
  arch.validate();
  return arch;
}

fnn::Network load_model(const config::RunConfig& cfg, const std::string& name,
                        const models::SemilinearSystem& sys, fnn::LossMode* mode = nullptr) {
  fnn::CheckpointMeta meta;
  fnn::Network net = fnn::load_checkpoint(RunLayout{cfg.out}.checkpoint(name), &meta);
  const int expected_out = meta.loss.mode == fnn::LossMode::Direct ? sys.m : 1;
  if (net.arch.inputs() != sys.n || net.arch.outputs() != expected_out)
    throw FormatError("checkpoint '" + name + "' does not match system " + sys.name);
  if (mode) *mode = meta.loss.mode;
  return net;
}

}  // namespace

fnn::Batch make_batch(const dataset::Dataset& ds, fnn::LossMode mode) {
  const auto N = static_cast<Eigen::Index>(ds.size());
  fnn::Batch b;
  b.X.resize(ds.n, N);
  for (Eigen::Index j = 0; j < N; ++j) b.X.col(j) = ds.records[static_cast<std::size_t>(j)].x;
  if (mode == fnn::LossMode::Direct) {
    b.Y.resize(ds.m, N);
    for (Eigen::Index j = 0; j < N; ++j) b.Y.col(j) = ds.records[static_cast<std::size_t>(j)].u;
  } else {
    b.Y.resize(1, N);
    b.G.resize(ds.n, N);
    for (Eigen::Index j = 0; j < N; ++j) {
      b.Y(0, j) = ds.records[static_cast<std::size_t>(j)].V;
      b.G.col(j) = ds.records[static_cast<std::size_t>(j)].gradV;
    }
  }
  return b;
}

std::vector<FitMetric> fit_metrics(const fnn::Network& net, fnn::LossMode mode,
                                   const dataset::Dataset& reference, const fnn::FeedbackMap& fb) {
  if (reference.empty()) throw EmptySet("no reference records to score against");
  const fnn::Batch direct = make_batch(reference, fnn::LossMode::Direct);
  if (mode == fnn::LossMode::Direct)
    return {metric("u_theta", fnn::forward_batch(net, direct.X), direct.Y)};
  const fnn::Batch value = make_batch(reference, fnn::LossMode::Value);
  const MatrixXd grad = fnn::input_gradient_batch(net, value.X);
  const MatrixXd u_v = -0.5 * fb.R.ldlt().solve(fb.B.transpose() * grad);
  return {metric("V", fnn::forward_batch(net, value.X), value.Y), metric("gradV", grad, value.G),
          metric("u_V", u_v, direct.Y)};
}

GenReport cmd_gen(const config::RunConfig& cfg) {
  if (cfg.sampling.count == 0) throw InvalidConfig("sampling.count must be positive");
  const auto start = std::chrono::steady_clock::now();
  const models::SemilinearSystem sys = config::build_system(cfg.system);
  const dataset::HaltonSampler sampler(static_cast<std::size_t>(sys.n), cfg.sampling.start_index);
  const auto states = dataset::sample_states(sampler, cfg.sampling.count, sys.lower, sys.upper);
  dataset::Dataset ds = dataset::generate(sys, states, cfg.sampling.tolerance, cfg.threads);
  ds.meta.start_index = cfg.sampling.start_index;

  std::filesystem::create_directories(cfg.out);
  const RunLayout layout{cfg.out};
  dataset::save(ds, layout.dataset(), layout.manifest());

  GenReport r;
  r.records = ds.size();
  r.discarded = ds.meta.discarded;
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return r;
}

TrainReport cmd_train(const config::RunConfig& cfg, const std::string& model) {
  const config::ModelConfig& mc = cfg.model(model);
  const models::SemilinearSystem sys = config::build_system(cfg.system);
  const dataset::Dataset ds = load_run_dataset(cfg, sys);
  if (ds.empty()) throw EmptySet("dataset has no records");
  const auto [train_ds, val_ds] = dataset::split(ds, mc.train_fraction, mc.split_seed);

  fnn::TrainOptions opts;
  opts.loss = {mc.mode, mc.mode == fnn::LossMode::Direct ? fnn::LossWeights{1.0, 0.0} : mc.weights};
  opts.epochs = mc.epochs;
  opts.batch_size = mc.batch_size;
  opts.lbfgs_memory = mc.lbfgs_memory;
  opts.iterations_per_batch = mc.iterations_per_batch;
  opts.full_batch = mc.full_batch;
  opts.seed = mc.seed;
  const fnn::FeedbackMap fb = feedback_map(sys);
  if (mc.mode == fnn::LossMode::Value) opts.feedback = fb;

  const fnn::Network init = fnn::make_network(architecture(mc, sys), mc.seed);
  const fnn::Batch train_batch = make_batch(train_ds, mc.mode);
  const fnn::Batch val_batch = val_ds.empty() ? fnn::Batch{} : make_batch(val_ds, mc.mode);
  fnn::TrainResult result = fnn::train(init, train_batch, val_batch, opts);
  const fnn::Network trained{init.arch, std::move(result.params)};

  const RunLayout layout{cfg.out};
  fnn::save_checkpoint(layout.checkpoint(model), trained, {mc.seed, opts.loss, model});

  std::ofstream hist(layout.history(model), std::ios::binary);
  if (!hist) throw IoError("cannot open " + layout.history(model).string());
  hist << "epoch,train_loss,val_loss,val_r2\n";
  for (const auto& e : result.history)
    hist << e.epoch << ',' << g17(e.train_loss) << ',' << g17(e.val_loss) << ',' << g17(e.val_r2) << '\n';
  if (!hist) throw IoError("write failed for " + layout.history(model).string());

  TrainReport report;
  report.model = model;
  report.best_epoch = result.best_epoch;
  report.history = std::move(result.history);
  report.metrics = fit_metrics(trained, mc.mode, val_ds.empty() ? train_ds : val_ds, fb);

  write_json(layout.summary(model), {{"model", model},
                                     {"set", val_ds.empty() ? "training" : "validation"},
                                     {"records", val_ds.empty() ? train_ds.size() : val_ds.size()},
                                     {"best_epoch", report.best_epoch},
                                     {"metrics", metrics_json(report.metrics)}});
  return report;
}

std::vector<std::pair<std::string, std::vector<FitMetric>>> cmd_eval(const config::RunConfig& cfg) {
  const models::SemilinearSystem sys = config::build_system(cfg.system);
  const RunLayout layout{cfg.out};
  const std::uint64_t start = cfg.eval.start_index.value_or(cfg.sampling.start_index + cfg.sampling.count);
  if (cfg.eval.count == 0) throw InvalidConfig("eval.count must be positive");

  std::vector<std::pair<std::string, fnn::Network>> nets;
  std::vector<fnn::LossMode> modes;
  for (const auto& mc : cfg.models) {
    if (!std::filesystem::exists(layout.checkpoint(mc.name))) continue;
    fnn::LossMode mode{};
    nets.emplace_back(mc.name, load_model(cfg, mc.name, sys, &mode));
    modes.push_back(mode);
  }
  if (nets.empty()) throw IoError("no trained checkpoints in " + cfg.out.string());

  const dataset::HaltonSampler sampler(static_cast<std::size_t>(sys.n), start);
  const auto states = dataset::sample_states(sampler, cfg.eval.count, sys.lower, sys.upper);
  const dataset::Dataset reference = dataset::generate(sys, states, cfg.sampling.tolerance, cfg.threads);

  std::vector<std::pair<std::string, std::vector<FitMetric>>> out;
  json models = json::object();
  for (std::size_t k = 0; k < nets.size(); ++k) {
    auto metrics = fit_metrics(nets[k].second, modes[k], reference, feedback_map(sys));
    models[nets[k].first] = metrics_json(metrics);
    out.emplace_back(nets[k].first, std::move(metrics));
  }
  write_json(layout.eval(), {{"points", reference.size()},
                             {"discarded", reference.meta.discarded},
                             {"start_index", start},
                             {"models", models}});
  return out;
}

std::vector<SimRow> cmd_simulate(const config::RunConfig& cfg) {
  const models::SemilinearSystem sys = config::build_system(cfg.system);
  const VectorXd x0 = config::initial_state(cfg.simulation.x0, sys);
  const RunLayout layout{cfg.out};
  std::filesystem::create_directories(cfg.out);
  const auto& sc = cfg.simulation;

  std::vector<SimRow> rows;
  for (const auto& spec : sc.controllers) {
    SimRow row;
    row.controller = spec.label();
    try {
      simulator::ControllerKind controller;
      if (spec.kind == "zero") controller = simulator::ZeroControl{};
      else if (spec.kind == "linear_k0") controller = simulator::LinearGain{sdre::linear_gain_at_origin(sys, cfg.sampling.tolerance)};
      else if (spec.kind == "sdre") controller = simulator::SdreControl{sc.refresh_steps, cfg.sampling.tolerance};
      else if (spec.kind == "nn_direct") controller = simulator::NetworkDirect{load_model(cfg, spec.model, sys)};
      else {
        const fnn::FeedbackMap fb = feedback_map(sys);
        controller = simulator::NetworkValue{load_model(cfg, spec.model, sys), fb.B, fb.R};
      }
      const simulator::Trajectory traj = simulator::simulate(sys, controller, x0, sc.horizon, sc.dt, sc.substeps);
      simulator::write_csv(traj, layout.trajectory(row.controller));
      row.cost = traj.total_cost();
      row.final_inf_norm = traj.final_state().lpNorm<Eigen::Infinity>();
      row.final_two_norm = traj.final_state().norm();
      row.diverged = traj.diverged;
      row.divergence_time = traj.divergence_time;
    } catch (const Error& e) {
      row.error = e.what();
    }
    rows.push_back(std::move(row));
  }

  std::ofstream costs(layout.costs(), std::ios::binary);
  if (!costs) throw IoError("cannot open " + layout.costs().string());
  costs << "controller,cost,final_inf_norm,final_two_norm,diverged,divergence_time,error\n";
  for (const auto& r : rows) {
    costs << r.controller << ',' << g17(r.cost) << ',' << g17(r.final_inf_norm) << ','
          << g17(r.final_two_norm) << ',' << (r.diverged ? 1 : 0) << ',' << g17(r.divergence_time) << ",\""
          << r.error << "\"\n";
  }
  if (!costs) throw IoError("write failed for " + layout.costs().string());
  return rows;
}

}  // namespace sdrenn::pipeline
