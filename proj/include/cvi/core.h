#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cvi/mappings.h"
#include "cvi/sets.h"
#include "cvi/types.h"

namespace cvi {

inline constexpr double kDefaultResidualAlpha = 1.0;
inline constexpr double kDefaultTolerance = 1e-8;
inline constexpr double kProbeFeasibilityTol = 1e-9;

/// A variational inequality VI(F, K): find x in K with <F(x), y - x> >= 0
/// for all y in K.
///
/// Coordinates marked exogenous are held fixed by an intervention; they are
/// not chosen by any agent, so they are dropped from the residual.
class Problem {
 public:
  Problem(Mapping mapping, FeasibleSet set,
          std::vector<std::string> labels = {});

  const Mapping& mapping() const { return mapping_; }
  const FeasibleSet& set() const { return set_; }
  Index dimension() const { return set_.dimension(); }
  const std::vector<std::string>& labels() const { return labels_; }
  const std::vector<bool>& exogenous() const { return exogenous_; }

  /// Label of coordinate i, or "x_<i+1>" when unlabeled.
  std::string label(Index i) const;
  /// Index of the coordinate with this label, if any.
  std::optional<Index> FindLabel(const std::string& name) const;

  Problem WithMapping(Mapping mapping) const;
  Problem WithSet(FeasibleSet set) const;
  Problem WithExogenous(Index i) const;

 private:
  Mapping mapping_;
  FeasibleSet set_;
  std::vector<std::string> labels_;
  std::vector<bool> exogenous_;
};

struct Solution {
  Point point;
  double residual = 0.0;
  int iterations = 0;
  bool converged = false;
  std::string algorithm;
  std::optional<std::uint64_t> seed;
  double tolerance = kDefaultTolerance;
  bool diverged = false;
};

/// ||x - P_K(x - alpha F(x))||_2 over the endogenous coordinates. Zero
/// exactly at solutions, for every alpha > 0.
double NaturalResidual(const Point& x, const Problem& problem,
                       double alpha = kDefaultResidualAlpha);

struct NormalConeResult {
  double max_violation = 0.0;
  bool holds = false;
};

class RejectedProbe : public Error {
 public:
  RejectedProbe(std::size_t index, double distance)
      : Error("probe " + std::to_string(index) +
              " lies outside the feasible set (distance " +
              std::to_string(distance) + ")"),
        index_(index) {}
  std::size_t index() const { return index_; }

 private:
  std::size_t index_;
};

/// Checks that -F(x) lies in the normal cone of K at x against the given
/// feasible probes: max over probes of -<F(x), y - x> must be <= tol.
NormalConeResult NormalConeCheck(const Point& x, const Problem& problem,
                                 const std::vector<Point>& probes,
                                 double tol = 1e-6);

}  // namespace cvi
