#include <bit>
#include <cstring>
#include <fstream>

#include "json.hpp"
#include "sdrenn/errors.hpp"
#include "sdrenn/fnn.hpp"

namespace sdrenn::fnn {

namespace {

using json = nlohmann::json;
constexpr const char* kFormat = "sdrenn-checkpoint";

static_assert(std::endian::native == std::endian::little, "checkpoint payload is little-endian");

std::string mode_name(LossMode m) { return m == LossMode::Direct ? "direct" : "value"; }

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const Network& net,
                     const CheckpointMeta& meta) {
  net.check();
  std::vector<std::string> acts;
  for (Activation a : net.arch.activations) acts.push_back(to_string(a));
  const Eigen::VectorXd flat = net.params.flatten();
  const json header = {
      {"format", kFormat},
      {"version", 1},
      {"label", meta.label},
      {"layer_sizes", net.arch.layer_sizes},
      {"activations", acts},
      {"seed", meta.seed},
      {"loss", {{"mode", mode_name(meta.loss.mode)},
                {"mu_V", meta.loss.weights.mu_V},
                {"mu_dV", meta.loss.weights.mu_dV}}},
      {"param_count", flat.size()},
  };
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << header.dump() << '\n';
  out.write(reinterpret_cast<const char*>(flat.data()),
            static_cast<std::streamsize>(flat.size() * sizeof(double)));
  if (!out) throw IoError("write failed for " + path.string());
}

Network load_checkpoint(const std::filesystem::path& path, CheckpointMeta* meta) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw FormatError(path.string() + ": missing header");

  Network net;
  std::size_t count = 0;
  try {
    const json header = json::parse(line);
    if (header.at("format") != kFormat) throw FormatError(path.string() + ": not a checkpoint");
    net.arch.layer_sizes = header.at("layer_sizes").get<std::vector<int>>();
    for (const auto& a : header.at("activations")) net.arch.activations.push_back(parse_activation(a.get<std::string>()));
    count = header.at("param_count").get<std::size_t>();
    if (meta) {
      meta->label = header.value("label", "");
      meta->seed = header.at("seed").get<std::uint64_t>();
      const json& loss = header.at("loss");
      meta->loss.mode = loss.at("mode") == "direct" ? LossMode::Direct : LossMode::Value;
      meta->loss.weights.mu_V = loss.at("mu_V").get<double>();
      meta->loss.weights.mu_dV = loss.at("mu_dV").get<double>();
    }
  } catch (const json::exception& e) {
    throw FormatError(path.string() + ": " + e.what());
  } catch (const InvalidArgument& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
  try {
    net.arch.validate();
  } catch (const InvalidArgument& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
  net.params = init_params(net.arch, 0).zeros_like();
  if (count != net.params.size())
    throw FormatError(path.string() + ": parameter count does not match architecture");

  Eigen::VectorXd flat(static_cast<Eigen::Index>(count));
  in.read(reinterpret_cast<char*>(flat.data()), static_cast<std::streamsize>(count * sizeof(double)));
  if (in.gcount() != static_cast<std::streamsize>(count * sizeof(double)))
    throw FormatError(path.string() + ": truncated parameter payload");
  if (in.peek() != std::char_traits<char>::eof()) throw FormatError(path.string() + ": trailing bytes");
  net.params.assign(flat);
  return net;
}

}  // namespace sdrenn::fnn
