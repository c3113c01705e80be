#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "sdrenn/models.hpp"

namespace sdrenn::dataset {

/// Radical inverse of `index` in base `base` (base must be prime).
double halton(std::uint64_t index, std::uint32_t base);

/// First `count` primes, in increasing order.
std::vector<std::uint32_t> first_primes(std::size_t count);

/// Plain (unscrambled) Halton point generator, one prime base per dimension.
class HaltonSampler {
 public:
  explicit HaltonSampler(std::size_t dim, std::uint64_t start_index = 1);

  std::size_t dim() const { return bases_.size(); }
  std::uint64_t start_index() const { return start_index_; }
  const std::vector<std::uint32_t>& bases() const { return bases_; }

  /// Halton point for a given (1-based) sequence index.
  Eigen::VectorXd point(std::uint64_t index) const;

 private:
  std::vector<std::uint32_t> bases_;
  std::uint64_t start_index_;
};

/// Point i (0-based) is lower + (upper - lower) .* halton(start_index + i).
std::vector<Eigen::VectorXd> sample_states(const HaltonSampler& sampler, std::size_t count,
                                           const Eigen::VectorXd& lower,
                                           const Eigen::VectorXd& upper);

struct Record {
  Eigen::VectorXd x;
  Eigen::VectorXd u;
  double V = 0.0;
  Eigen::VectorXd gradV;
};

/// Provenance carried in the JSON manifest next to the CSV.
struct Meta {
  std::string system_name;
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;
  std::uint64_t requested = 0;
  std::uint64_t start_index = 1;
  std::uint64_t seed = 0;
  double tolerance = 0.0;
  std::uint64_t discarded = 0;
};

struct Dataset {
  std::vector<Record> records;
  Meta meta;
  int n = 0;
  int m = 0;

  std::size_t size() const { return records.size(); }
  bool empty() const { return records.empty(); }
  /// Throws FormatError when a record disagrees with (n, m) or is non-finite.
  void validate() const;
};

/// Solves the SDRE at every state, fanning out over `threads` workers.
/// Records keep the input order; NotStabilizable states are dropped and
/// counted in meta.discarded.
Dataset generate(const models::SemilinearSystem& sys, const std::vector<Eigen::VectorXd>& states,
                 double tol, unsigned threads = 1);

/// Seeded shuffle then split into ceil(f N) training and N - ceil(f N)
/// validation records.
std::pair<Dataset, Dataset> split(const Dataset& ds, double train_fraction,
                                  std::uint64_t shuffle_seed);

/// Writes `<stem>.csv` with header x_1..x_n,u_1..u_m,V,dV_1..dV_n and a JSON
/// manifest at `manifest_path`.
void save(const Dataset& ds, const std::filesystem::path& csv_path,
          const std::filesystem::path& manifest_path);
Dataset load(const std::filesystem::path& csv_path, const std::filesystem::path& manifest_path);

/// Largest violation of u = -1/2 R^{-1} B(x)' gradV over the records.
double max_consistency_violation(const Dataset& ds, const models::SemilinearSystem& sys);

}  // namespace sdrenn::dataset
