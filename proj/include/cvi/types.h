#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>

namespace cvi {

/// Dense point in R^n (flows, quantities, qualities, prices).
using Point = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Index = Eigen::Index;

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionMismatch : public Error {
 public:
  DimensionMismatch(const std::string& what, Index expected, Index actual)
      : Error(what + ": expected dimension " + std::to_string(expected) +
              ", got " + std::to_string(actual)) {}
};

/// Malformed input: bad set data, invalid schedule, infeasible clamp, etc.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// An iterative routine gave up. Carries the last iterate and an estimate of
/// how far it is from satisfying its stopping test.
class NonConvergence : public Error {
 public:
  NonConvergence(const std::string& what, Point last_iterate, double distance)
      : Error(what),
        last_iterate_(std::move(last_iterate)),
        distance_(distance) {}

  const Point& last_iterate() const { return last_iterate_; }
  double distance() const { return distance_; }

 private:
  Point last_iterate_;
  double distance_;
};

/// The requested analysis does not apply to this kind of intervention.
class UnsupportedAnalysis : public Error {
 public:
  using Error::Error;
};

inline void RequireDimension(const std::string& what, Index expected,
                             Index actual) {
  if (expected != actual) throw DimensionMismatch(what, expected, actual);
}

inline void RequireFinite(const std::string& what, const Point& x) {
  if (!x.allFinite()) throw InvalidArgument(what + ": non-finite entry");
}

}  // namespace cvi
