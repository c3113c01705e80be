#include <string>

#include "sdrenn/dataset.hpp"
#include "sdrenn/errors.hpp"

namespace sdrenn::dataset {
namespace {

bool is_prime(std::uint32_t p) {
  if (p < 2) return false;
  for (std::uint32_t d = 2; d * d <= p; ++d) {
    if (p % d == 0) return false;
  }
  return true;
}

}  // namespace

double halton(std::uint64_t index, std::uint32_t base) {
  if (!is_prime(base)) throw InvalidBase("Halton base " + std::to_string(base) + " is not prime");
  if (index == 0) throw InvalidArgument("Halton index must be positive");
  // reversed digits form an integer numerator over base^k; one rounding only
  std::uint64_t numerator = 0;
  std::uint64_t denominator = 1;
  while (index > 0) {
    numerator = numerator * base + index % base;
    denominator *= base;
    index /= base;
  }
  return static_cast<double>(numerator) / static_cast<double>(denominator);
}

std::vector<std::uint32_t> first_primes(std::size_t count) {
  std::vector<std::uint32_t> primes;
  primes.reserve(count);
  for (std::uint32_t p = 2; primes.size() < count; ++p) {
    if (is_prime(p)) primes.push_back(p);
  }
  return primes;
}

HaltonSampler::HaltonSampler(std::size_t dim, std::uint64_t start_index)
    : bases_(first_primes(dim)), start_index_(start_index) {
  if (start_index == 0) throw InvalidArgument("Halton start index must be positive");
}

Eigen::VectorXd HaltonSampler::point(std::uint64_t index) const {
  Eigen::VectorXd p(static_cast<Eigen::Index>(bases_.size()));
  for (std::size_t k = 0; k < bases_.size(); ++k) p[static_cast<Eigen::Index>(k)] = halton(index, bases_[k]);
  return p;
}

std::vector<Eigen::VectorXd> sample_states(const HaltonSampler& sampler, std::size_t count,
                                           const Eigen::VectorXd& lower,
                                           const Eigen::VectorXd& upper) {
  const auto dim = static_cast<Eigen::Index>(sampler.dim());
  if (lower.size() != dim || upper.size() != dim)
    throw InvalidBounds("bounds of size " + std::to_string(lower.size()) + "/" +
                        std::to_string(upper.size()) + " for a " + std::to_string(dim) +
                        "-dimensional sampler");
  if (!(lower.array() < upper.array()).all()) throw InvalidBounds("lower must be below upper");

  const Eigen::VectorXd width = upper - lower;
  std::vector<Eigen::VectorXd> states;
  states.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    states.push_back(lower + width.cwiseProduct(sampler.point(sampler.start_index() + i)));
  }
  return states;
}

}  // namespace sdrenn::dataset
