#pragma once

#include <stdexcept>
#include <string>

namespace sdrenn {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define SDRENN_DEFINE_ERROR(Name)            \
  class Name : public Error {                \
   public:                                   \
    explicit Name(const std::string& what)   \
        : Error(#Name ": " + what) {}        \
  }

SDRENN_DEFINE_ERROR(DimensionMismatch);
SDRENN_DEFINE_ERROR(InvalidArgument);
SDRENN_DEFINE_ERROR(InvalidConfig);

// riccati
SDRENN_DEFINE_ERROR(NotStabilizable);
SDRENN_DEFINE_ERROR(NoConvergence);
SDRENN_DEFINE_ERROR(SingularSylvester);

// dataset
SDRENN_DEFINE_ERROR(InvalidBase);
SDRENN_DEFINE_ERROR(InvalidBounds);
SDRENN_DEFINE_ERROR(EmptyDataset);
SDRENN_DEFINE_ERROR(IoError);
SDRENN_DEFINE_ERROR(FormatError);

// fnn
SDRENN_DEFINE_ERROR(EmptyBatch);
SDRENN_DEFINE_ERROR(EmptySet);
SDRENN_DEFINE_ERROR(DegenerateTargets);

// simulator
SDRENN_DEFINE_ERROR(NonFiniteState);

#undef SDRENN_DEFINE_ERROR

/// Training diverged. Carries the epoch at which the loss became non-finite.
class NonFiniteLoss : public Error {
 public:
  explicit NonFiniteLoss(int epoch)
      : Error("NonFiniteLoss: loss became non-finite at epoch " +
              std::to_string(epoch)),
        epoch_(epoch) {}
  int epoch() const noexcept { return epoch_; }

 private:
  int epoch_;
};

}  // namespace sdrenn
