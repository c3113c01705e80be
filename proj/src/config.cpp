#include "sdrenn/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "sdrenn/errors.hpp"

namespace sdrenn::config {

namespace {

using json = nlohmann::json;
using Eigen::MatrixXd;
using Eigen::VectorXd;

void allow_keys(const json& obj, const std::string& where, std::initializer_list<const char*> keys) {
  if (!obj.is_object()) throw InvalidConfig(where + " must be an object");
  const std::set<std::string> allowed(keys.begin(), keys.end());
  for (const auto& [key, _] : obj.items()) {
    if (!allowed.count(key)) throw InvalidConfig("unknown key '" + key + "' in " + where);
  }
}

template <class T>
void read(const json& obj, const char* key, T& field) {
  if (obj.contains(key)) field = obj.at(key).get<T>();
}

MatrixXd read_matrix(const json& j, const std::string& what) {
  const auto rows = j.get<std::vector<std::vector<double>>>();
  if (rows.empty()) throw InvalidConfig(what + " is empty");
  MatrixXd M(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != rows.front().size()) throw InvalidConfig(what + " has ragged rows");
    for (std::size_t k = 0; k < rows[i].size(); ++k)
      M(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = rows[i][k];
  }
  return M;
}

SystemConfig parse_system(const json& j) {
  allow_keys(j, "system", {"model", "grid", "diffusion", "omega", "control_weight", "box_half_width",
                           "reaction", "agents", "A", "B", "Q", "R"});
  SystemConfig s;
  read(j, "model", s.model);
  if (s.model == "allen_cahn") {
    auto& ac = s.allen_cahn;
    read(j, "grid", ac.grid);
    read(j, "diffusion", ac.diffusion);
    read(j, "control_weight", ac.control_weight);
    read(j, "box_half_width", ac.box_half_width);
    if (j.contains("omega")) {
      const auto w = j.at("omega").get<std::vector<double>>();
      if (w.size() != 2) throw InvalidConfig("omega must be [lo, hi]");
      ac.omega_lo = w[0];
      ac.omega_hi = w[1];
    }
    if (j.contains("reaction")) {
      const auto r = j.at("reaction").get<std::string>();
      if (r == "bistable") ac.reaction = models::AllenCahnReaction::Bistable;
      else if (r == "printed") ac.reaction = models::AllenCahnReaction::Printed;
      else throw InvalidConfig("reaction must be 'bistable' or 'printed'");
    }
  } else if (s.model == "cucker_smale") {
    read(j, "agents", s.cucker_smale.agents);
    read(j, "box_half_width", s.cucker_smale.box_half_width);
  } else if (s.model == "linear") {
    for (const char* key : {"A", "B", "Q", "R"}) {
      if (!j.contains(key)) throw InvalidConfig(std::string("linear system needs ") + key);
    }
    s.A = read_matrix(j.at("A"), "A");
    s.B = read_matrix(j.at("B"), "B");
    s.Q = read_matrix(j.at("Q"), "Q");
    s.R = read_matrix(j.at("R"), "R");
    read(j, "box_half_width", s.box_half_width);
  } else {
    throw InvalidConfig("unknown system model '" + s.model + "'");
  }
  return s;
}

ModelConfig parse_model(const json& j) {
  allow_keys(j, "models[]", {"name", "mode", "hidden", "activation", "mu_V", "mu_dV", "epochs",
                             "batch_size", "lbfgs_memory", "iterations_per_batch", "full_batch",
                             "seed", "train_fraction", "split_seed"});
  ModelConfig m;
  if (!j.contains("name")) throw InvalidConfig("every model needs a name");
  read(j, "name", m.name);
  if (j.contains("mode")) {
    const auto mode = j.at("mode").get<std::string>();
    if (mode == "value") m.mode = fnn::LossMode::Value;
    else if (mode == "direct") m.mode = fnn::LossMode::Direct;
    else throw InvalidConfig("mode must be 'value' or 'direct'");
  }
  read(j, "hidden", m.hidden);
  if (j.contains("activation")) {
    try {
      m.activation = fnn::parse_activation(j.at("activation").get<std::string>());
    } catch (const InvalidArgument& e) {
      throw InvalidConfig(e.what());
    }
  }
  read(j, "mu_V", m.weights.mu_V);
  read(j, "mu_dV", m.weights.mu_dV);
  read(j, "epochs", m.epochs);
  read(j, "batch_size", m.batch_size);
  read(j, "lbfgs_memory", m.lbfgs_memory);
  read(j, "iterations_per_batch", m.iterations_per_batch);
  read(j, "full_batch", m.full_batch);
  read(j, "seed", m.seed);
  read(j, "train_fraction", m.train_fraction);
  read(j, "split_seed", m.split_seed);
  if (m.hidden.empty()) throw InvalidConfig("model '" + m.name + "' needs hidden layers");
  for (int h : m.hidden) {
    if (h < 1) throw InvalidConfig("hidden layer widths must be positive");
  }
  if (m.epochs < 1 || m.batch_size < 1 || m.lbfgs_memory < 1 || m.iterations_per_batch < 1)
    throw InvalidConfig("model '" + m.name + "': epochs, batch size, memory and iterations must be positive");
  if (!(m.train_fraction > 0.0 && m.train_fraction < 1.0))
    throw InvalidConfig("train_fraction must lie in (0, 1)");
  if (m.mode == fnn::LossMode::Value &&
      (m.weights.mu_V < 0.0 || m.weights.mu_dV < 0.0 || m.weights.mu_V + m.weights.mu_dV == 0.0))
    throw InvalidConfig("loss weights must be non-negative and not both zero");
  return m;
}

ControllerSpec parse_controller(const std::string& text) {
  ControllerSpec c;
  const auto colon = text.find(':');
  c.kind = text.substr(0, colon);
  if (colon != std::string::npos) c.model = text.substr(colon + 1);
  static const std::set<std::string> kinds{"zero", "linear_k0", "sdre", "nn_direct", "nn_value"};
  if (!kinds.count(c.kind)) throw InvalidConfig("unknown controller '" + c.kind + "'");
  const bool network = c.kind.rfind("nn_", 0) == 0;
  if (network && c.model.empty()) throw InvalidConfig(c.kind + " needs a model name (" + c.kind + ":<model>)");
  if (!network && !c.model.empty()) throw InvalidConfig(c.kind + " takes no model name");
  return c;
}

SimulationConfig parse_simulation(const json& j) {
  allow_keys(j, "simulation", {"controllers", "x0", "horizon", "dt", "substeps", "refresh_steps"});
  SimulationConfig s;
  if (j.contains("controllers")) {
    for (const auto& c : j.at("controllers")) s.controllers.push_back(parse_controller(c.get<std::string>()));
  }
  if (j.contains("x0")) {
    const json& x0 = j.at("x0");
    allow_keys(x0, "simulation.x0", {"kind", "lo", "hi", "value", "values"});
    read(x0, "kind", s.x0.kind);
    read(x0, "lo", s.x0.lo);
    read(x0, "hi", s.x0.hi);
    read(x0, "value", s.x0.value);
    read(x0, "values", s.x0.values);
  }
  read(j, "horizon", s.horizon);
  read(j, "dt", s.dt);
  read(j, "substeps", s.substeps);
  read(j, "refresh_steps", s.refresh_steps);
  if (!(s.horizon > 0.0) || !(s.dt > 0.0)) throw InvalidConfig("horizon and dt must be positive");
  if (s.refresh_steps < 1 || s.substeps < 1) throw InvalidConfig("refresh_steps and substeps must be positive");
  return s;
}

ModelConfig make_model(std::string name, fnn::LossMode mode, std::vector<int> hidden, fnn::Activation act,
                       fnn::LossWeights w, int epochs) {
  ModelConfig m;
  m.name = std::move(name);
  m.mode = mode;
  m.hidden = std::move(hidden);
  m.activation = act;
  m.weights = w;
  m.epochs = epochs;
  return m;
}

}  // namespace

const ModelConfig& RunConfig::model(const std::string& name) const {
  for (const auto& m : models) {
    if (m.name == name) return m;
  }
  throw InvalidConfig("no model named '" + name + "'");
}

RunConfig parse(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::exception& e) {
    throw InvalidConfig(std::string("config is not valid JSON: ") + e.what());
  }
  RunConfig cfg;
  try {
    allow_keys(root, "config", {"name", "threads", "out", "system", "sampling", "models", "eval", "simulation"});
    read(root, "name", cfg.name);
    read(root, "threads", cfg.threads);
    if (root.contains("out")) cfg.out = root.at("out").get<std::string>();
    if (root.contains("system")) cfg.system = parse_system(root.at("system"));
    if (root.contains("sampling")) {
      const json& s = root.at("sampling");
      allow_keys(s, "sampling", {"count", "start_index", "tolerance"});
      read(s, "count", cfg.sampling.count);
      read(s, "start_index", cfg.sampling.start_index);
      read(s, "tolerance", cfg.sampling.tolerance);
    }
    if (root.contains("models")) {
      for (const auto& m : root.at("models")) cfg.models.push_back(parse_model(m));
    }
    if (root.contains("eval")) {
      const json& e = root.at("eval");
      allow_keys(e, "eval", {"count", "start_index"});
      read(e, "count", cfg.eval.count);
      if (e.contains("start_index")) cfg.eval.start_index = e.at("start_index").get<std::uint64_t>();
    }
    if (root.contains("simulation")) cfg.simulation = parse_simulation(root.at("simulation"));
  } catch (const json::exception& e) {
    throw InvalidConfig(e.what());
  }
  if (cfg.sampling.start_index < 1) throw InvalidConfig("sampling.start_index must be positive");
  if (!(cfg.sampling.tolerance > 0.0)) throw InvalidConfig("sampling.tolerance must be positive");
  if (cfg.threads < 1) cfg.threads = 1;
  std::set<std::string> names;
  for (const auto& m : cfg.models) {
    if (!names.insert(m.name).second) throw InvalidConfig("duplicate model name '" + m.name + "'");
  }
  for (const auto& c : cfg.simulation.controllers) {
    if (!c.model.empty() && !names.count(c.model))
      throw InvalidConfig("controller refers to unknown model '" + c.model + "'");
  }
  if (cfg.out.empty()) cfg.out = std::filesystem::path("runs") / cfg.name;
  return cfg;
}

RunConfig load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse(buf.str());
}

models::SemilinearSystem build_system(const SystemConfig& cfg) {
  if (cfg.model == "allen_cahn") return models::allen_cahn_system(cfg.allen_cahn);
  if (cfg.model == "cucker_smale") return models::cucker_smale_system(cfg.cucker_smale);
  if (cfg.model == "linear") {
    try {
      return models::linear_system("linear", cfg.A, cfg.B, cfg.Q, cfg.R, cfg.box_half_width);
    } catch (const InvalidConfig&) {
      throw;
    } catch (const Error& e) {
      throw InvalidConfig(e.what());
    }
  }
  throw InvalidConfig("unknown system model '" + cfg.model + "'");
}

VectorXd initial_state(const InitialStateSpec& spec, const models::SemilinearSystem& sys) {
  const int n = sys.n;
  if (spec.kind == "allen_cahn_profile") {
    const VectorXd xi = models::allen_cahn_grid(n);
    return (1.0 + ((1.0 - xi.array()) * xi.array())).matrix();
  }
  if (spec.kind == "linspace") return VectorXd::LinSpaced(n, spec.lo, spec.hi);
  if (spec.kind == "constant") return VectorXd::Constant(n, spec.value);
  if (spec.kind == "values") {
    if (static_cast<int>(spec.values.size()) != n)
      throw InvalidConfig("x0 has " + std::to_string(spec.values.size()) + " values, system has " +
                          std::to_string(n));
    return Eigen::Map<const VectorXd>(spec.values.data(), n);
  }
  throw InvalidConfig("unknown x0 kind '" + spec.kind + "'");
}

RunConfig allen_cahn_defaults() {
  RunConfig cfg;
  cfg.name = "allen_cahn";
  cfg.out = "runs/allen_cahn";
  cfg.system.model = "allen_cahn";
  cfg.sampling.count = 1000;
  using fnn::Activation;
  using fnn::LossMode;
  cfg.models.push_back(make_model("value", LossMode::Value, {500, 500, 500}, Activation::Relu, {0.9, 7.0}, 71));
  cfg.models.push_back(make_model("direct", LossMode::Direct, {500, 500, 500, 500}, Activation::Relu, {1.0, 0.0}, 50));
  cfg.simulation.controllers = {{"zero", ""}, {"linear_k0", ""}, {"sdre", ""}, {"nn_value", "value"}, {"nn_direct", "direct"}};
  cfg.simulation.x0.kind = "allen_cahn_profile";
  cfg.simulation.substeps = 10;
  return cfg;
}

RunConfig cucker_smale_defaults() {
  RunConfig cfg;
  cfg.name = "cucker_smale";
  cfg.out = "runs/cucker_smale";
  cfg.system.model = "cucker_smale";
  cfg.sampling.count = 1000;
  using fnn::Activation;
  using fnn::LossMode;
  cfg.models.push_back(make_model("value", LossMode::Value, {400, 400, 400}, Activation::Relu, {0.1, 2.0}, 41));
  cfg.models.push_back(make_model("direct", LossMode::Direct, {400, 400}, Activation::Tanh, {1.0, 0.0}, 20));
  cfg.simulation.controllers = {{"zero", ""}, {"linear_k0", ""}, {"sdre", ""}, {"nn_value", "value"}, {"nn_direct", "direct"}};
  cfg.simulation.x0 = {"linspace", 0.0, 0.4, 0.0, {}};
  return cfg;
}

}  // namespace sdrenn::config
