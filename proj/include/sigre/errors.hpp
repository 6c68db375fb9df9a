#ifndef SIGRE_ERRORS_HPP
#define SIGRE_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace sigre {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// All pairwise distances vanished; no usable kernel scale.
struct DegenerateScale : Error {
  using Error::Error;
};

struct DimensionMismatch : Error {
  using Error::Error;
};

// Unbiased MMD needs at least two points on each side.
struct TooFewPoints : Error {
  using Error::Error;
};

struct NonFinite : Error {
  using Error::Error;
};

// No eigenvalue of the landmark Gram survived the floor.
struct RankCollapse : Error {
  using Error::Error;
};

struct NotPositiveDefinite : Error {
  using Error::Error;
};

struct ZeroAcceptance : Error {
  using Error::Error;
};

struct AllWeightsDegenerate : Error {
  using Error::Error;
};

struct BudgetTooSmall : Error {
  using Error::Error;
};

struct TooFewValues : Error {
  using Error::Error;
};

struct InvalidArgument : Error {
  using Error::Error;
};

}  // namespace sigre

#endif
