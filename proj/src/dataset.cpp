#include "sdrenn/dataset.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <mutex>
#include <numeric>
#include <optional>
#include <random>
#include <sstream>
#include <thread>

#include "json.hpp"
#include "sdrenn/errors.hpp"
#include "sdrenn/sdre.hpp"

namespace sdrenn::dataset {
namespace {

using Eigen::VectorXd;
using json = nlohmann::json;

void append_number(std::string& line, double v) {
  char buf[32];
  const int len = std::snprintf(buf, sizeof buf, "%.17g", v);
  line.append(buf, static_cast<std::size_t>(len));
}

std::vector<double> parse_row(const std::string& line, std::size_t line_no) {
  std::vector<double> out;
  const char* p = line.data();
  const char* end = p + line.size();
  while (p <= end) {
    const char* comma = std::find(p, end, ',');
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(p, comma, v);
    if (ec != std::errc() || ptr != comma)
      throw FormatError("line " + std::to_string(line_no) + ": bad number '" +
                        std::string(p, comma) + "'");
    out.push_back(v);
    p = comma + 1;
  }
  return out;
}

std::string header(int n, int m) {
  std::string h;
  for (int i = 1; i <= n; ++i) h += "x_" + std::to_string(i) + ",";
  for (int i = 1; i <= m; ++i) h += "u_" + std::to_string(i) + ",";
  h += "V";
  for (int i = 1; i <= n; ++i) h += ",dV_" + std::to_string(i);
  return h;
}

json to_json(const VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

VectorXd vector_from_json(const json& j) {
  const auto values = j.get<std::vector<double>>();
  return Eigen::Map<const VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
}

}  // namespace

void Dataset::validate() const {
  for (std::size_t i = 0; i < records.size(); ++i) {
    const Record& r = records[i];
    if (r.x.size() != n || r.gradV.size() != n || r.u.size() != m)
      throw FormatError("record " + std::to_string(i) + " has inconsistent dimensions");
    if (!r.x.allFinite() || !r.u.allFinite() || !std::isfinite(r.V) || !r.gradV.allFinite())
      throw FormatError("record " + std::to_string(i) + " has non-finite entries");
    if (r.V < 0.0) throw FormatError("record " + std::to_string(i) + " has negative V");
  }
}

Dataset generate(const models::SemilinearSystem& sys, const std::vector<VectorXd>& states,
                 double tol, unsigned threads) {
  sys.validate();
  std::vector<std::optional<Record>> slots(states.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;

  auto worker = [&] {
    for (std::size_t i = next++; i < states.size(); i = next++) {
      try {
        sdre::SdreSample s = sdre::sdre_solve(sys, states[i], tol);
        slots[i] = Record{std::move(s.x), std::move(s.u), s.V, std::move(s.gradV)};
      } catch (const NotStabilizable&) {
        // dropped and counted below
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };

  const unsigned workers = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(states.size())));
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < workers; ++t) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);

  Dataset ds;
  ds.n = sys.n;
  ds.m = sys.m;
  ds.meta.system_name = sys.name;
  ds.meta.lower = sys.lower;
  ds.meta.upper = sys.upper;
  ds.meta.requested = states.size();
  ds.meta.tolerance = tol;
  ds.records.reserve(states.size());
  for (auto& slot : slots) {
    if (slot) {
      ds.records.push_back(std::move(*slot));
    } else {
      ++ds.meta.discarded;
    }
  }
  return ds;
}

std::pair<Dataset, Dataset> split(const Dataset& ds, double train_fraction,
                                  std::uint64_t shuffle_seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0))
    throw InvalidArgument("train fraction must lie in (0, 1)");
  if (ds.empty()) throw EmptyDataset("cannot split an empty dataset");

  std::vector<std::size_t> order(ds.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 rng(shuffle_seed);
  std::shuffle(order.begin(), order.end(), rng);

  const auto n_train = static_cast<std::size_t>(
      std::ceil(train_fraction * static_cast<double>(ds.size()) - 1e-9));
  Dataset train, val;
  for (Dataset* part : {&train, &val}) {
    part->n = ds.n;
    part->m = ds.m;
    part->meta = ds.meta;
  }
  for (std::size_t k = 0; k < order.size(); ++k) {
    (k < n_train ? train : val).records.push_back(ds.records[order[k]]);
  }
  return {std::move(train), std::move(val)};
}

void save(const Dataset& ds, const std::filesystem::path& csv_path,
          const std::filesystem::path& manifest_path) {
  ds.validate();
  std::ofstream csv(csv_path, std::ios::binary);
  if (!csv) throw IoError("cannot open " + csv_path.string() + " for writing");
  csv << header(ds.n, ds.m) << '\n';
  std::string line;
  for (const Record& r : ds.records) {
    line.clear();
    for (double v : r.x) { append_number(line, v); line += ','; }
    for (double v : r.u) { append_number(line, v); line += ','; }
    append_number(line, r.V);
    for (double v : r.gradV) { line += ','; append_number(line, v); }
    csv << line << '\n';
  }
  if (!csv) throw IoError("write failed for " + csv_path.string());

  const json manifest = {
      {"system", ds.meta.system_name},
      {"n", ds.n},
      {"m", ds.m},
      {"records", ds.size()},
      {"requested", ds.meta.requested},
      {"discarded", ds.meta.discarded},
      {"start_index", ds.meta.start_index},
      {"seed", ds.meta.seed},
      {"tolerance", ds.meta.tolerance},
      {"lower", to_json(ds.meta.lower)},
      {"upper", to_json(ds.meta.upper)},
  };
  std::ofstream mf(manifest_path, std::ios::binary);
  if (!mf) throw IoError("cannot open " + manifest_path.string() + " for writing");
  mf << manifest.dump(2) << '\n';
  if (!mf) throw IoError("write failed for " + manifest_path.string());
}

Dataset load(const std::filesystem::path& csv_path, const std::filesystem::path& manifest_path) {
  std::ifstream mf(manifest_path);
  if (!mf) throw IoError("cannot open " + manifest_path.string());
  json manifest;
  try {
    manifest = json::parse(mf);
  } catch (const json::exception& e) {
    throw FormatError(manifest_path.string() + ": " + e.what());
  }

  Dataset ds;
  try {
    ds.n = manifest.at("n").get<int>();
    ds.m = manifest.at("m").get<int>();
    ds.meta.system_name = manifest.at("system").get<std::string>();
    ds.meta.requested = manifest.at("requested").get<std::uint64_t>();
    ds.meta.discarded = manifest.at("discarded").get<std::uint64_t>();
    ds.meta.start_index = manifest.at("start_index").get<std::uint64_t>();
    ds.meta.seed = manifest.at("seed").get<std::uint64_t>();
    ds.meta.tolerance = manifest.at("tolerance").get<double>();
    ds.meta.lower = vector_from_json(manifest.at("lower"));
    ds.meta.upper = vector_from_json(manifest.at("upper"));
  } catch (const json::exception& e) {
    throw FormatError(manifest_path.string() + ": " + e.what());
  }
  if (ds.n < 1 || ds.m < 1) throw FormatError("manifest has non-positive dimensions");

  std::ifstream csv(csv_path);
  if (!csv) throw IoError("cannot open " + csv_path.string());
  std::string line;
  if (!std::getline(csv, line) || line != header(ds.n, ds.m))
    throw FormatError(csv_path.string() + ": header does not match n=" + std::to_string(ds.n) +
                      ", m=" + std::to_string(ds.m));

  const std::size_t columns = static_cast<std::size_t>(2 * ds.n + ds.m + 1);
  std::size_t line_no = 1;
  while (std::getline(csv, line)) {
    ++line_no;
    if (line.empty()) continue;
    const std::vector<double> row = parse_row(line, line_no);
    if (row.size() != columns)
      throw FormatError("line " + std::to_string(line_no) + " has " + std::to_string(row.size()) +
                        " columns, expected " + std::to_string(columns));
    Record r;
    const double* p = row.data();
    r.x = Eigen::Map<const VectorXd>(p, ds.n);
    r.u = Eigen::Map<const VectorXd>(p + ds.n, ds.m);
    r.V = p[ds.n + ds.m];
    r.gradV = Eigen::Map<const VectorXd>(p + ds.n + ds.m + 1, ds.n);
    ds.records.push_back(std::move(r));
  }
  if (manifest.contains("records") && manifest["records"].get<std::size_t>() != ds.size())
    throw FormatError("manifest lists " + manifest["records"].dump() + " records, CSV has " +
                      std::to_string(ds.size()));
  ds.validate();
  return ds;
}

double max_consistency_violation(const Dataset& ds, const models::SemilinearSystem& sys) {
  double worst = 0.0;
  for (const Record& r : ds.records) {
    const VectorXd u = sdre::feedback_from_gradient(sys.eval_B(r.x), sys.R, r.gradV);
    worst = std::max(worst, (u - r.u).lpNorm<Eigen::Infinity>() / std::max(1.0, r.u.lpNorm<Eigen::Infinity>()));
  }
  return worst;
}

}  // namespace sdrenn::dataset
