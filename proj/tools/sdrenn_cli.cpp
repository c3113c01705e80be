#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "sdrenn/config.hpp"
#include "sdrenn/errors.hpp"
#include "sdrenn/pipeline.hpp"

namespace {

using namespace sdrenn;

struct Options {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  unsigned threads = 0;
  std::string model;
};

config::RunConfig resolve(const Options& o) {
  config::RunConfig cfg = config::load(o.config);
  if (o.seed) {
    for (auto& m : cfg.models) {
      m.seed = *o.seed;
      m.split_seed = *o.seed;
    }
  }
  if (!o.out.empty()) cfg.out = o.out;
  if (o.threads > 0) cfg.threads = o.threads;
  return cfg;
}

void print_metrics(const std::string& model, const std::vector<pipeline::FitMetric>& metrics) {
  for (const auto& m : metrics) {
    if (m.r2)
      std::printf("%-12s %-8s r2=%.6f mse=%.6g\n", model.c_str(), m.variable.c_str(), *m.r2, m.mse);
    else
      std::printf("%-12s %-8s r2=n/a (%s) mse=%.6g\n", model.c_str(), m.variable.c_str(), m.note.c_str(), m.mse);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"SDRE data generation, surrogate training and closed-loop evaluation"};
  app.require_subcommand(1);
  Options o;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--config", o.config, "run description (JSON)")->required()->check(CLI::ExistingFile);
    sub->add_option("--seed", o.seed, "override model init and split seeds");
    sub->add_option("--out", o.out, "run directory");
    sub->add_option("--threads", o.threads, "worker threads for SDRE solves");
  };
  auto* gen = app.add_subcommand("gen", "sample states and solve the SDRE at each");
  auto* train = app.add_subcommand("train", "fit surrogate models on the run dataset");
  auto* eval = app.add_subcommand("eval", "score trained models on held-out SDRE solves");
  auto* sim = app.add_subcommand("simulate", "closed-loop runs for the configured controllers");
  for (auto* s : {gen, train, eval, sim}) common(s);
  train->add_option("--model", o.model, "train only this model");

  CLI11_PARSE(app, argc, argv);

  try {
    const config::RunConfig cfg = resolve(o);
    if (*gen) {
      const auto r = pipeline::cmd_gen(cfg);
      std::printf("records=%zu discarded=%zu seconds=%.2f out=%s\n", r.records, r.discarded, r.seconds,
                  cfg.out.string().c_str());
    } else if (*train) {
      std::vector<std::string> names;
      if (!o.model.empty()) names.push_back(o.model);
      else for (const auto& m : cfg.models) names.push_back(m.name);
      for (const auto& name : names) {
        const auto r = pipeline::cmd_train(cfg, name);
        std::printf("%s: best epoch %d of %zu\n", name.c_str(), r.best_epoch, r.history.size());
        print_metrics(name, r.metrics);
      }
    } else if (*eval) {
      for (const auto& [name, metrics] : pipeline::cmd_eval(cfg)) print_metrics(name, metrics);
    } else {
      for (const auto& r : pipeline::cmd_simulate(cfg)) {
        if (!r.error.empty())
          std::printf("%-20s error: %s\n", r.controller.c_str(), r.error.c_str());
        else
          std::printf("%-20s cost=%.6g |x(T)|inf=%.3e%s\n", r.controller.c_str(), r.cost, r.final_inf_norm,
                      r.diverged ? " diverged" : "");
      }
    }
  } catch (const Error& e) {
    std::cerr << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
