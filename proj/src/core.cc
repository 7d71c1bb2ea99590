#include "cvi/core.h"

#include <algorithm>
#include <limits>

namespace cvi {

Problem::Problem(Mapping mapping, FeasibleSet set,
                 std::vector<std::string> labels)
    : mapping_(std::move(mapping)),
      set_(std::move(set)),
      labels_(std::move(labels)),
      exogenous_(static_cast<std::size_t>(set_.dimension()), false) {
  RequireDimension("mapping input vs feasible set", set_.dimension(),
                   mapping_.input_dimension());
  RequireDimension("mapping output vs feasible set", set_.dimension(),
                   mapping_.output_dimension());
  if (!labels_.empty()) {
    RequireDimension("labels", set_.dimension(),
                     static_cast<Index>(labels_.size()));
  }
}

std::string Problem::label(Index i) const {
  if (!labels_.empty()) return labels_[i];
  return "x_" + std::to_string(i + 1);
}

std::optional<Index> Problem::FindLabel(const std::string& name) const {
  for (Index i = 0; i < dimension(); ++i) {
    if (label(i) == name) return i;
  }
  return std::nullopt;
}

Problem Problem::WithMapping(Mapping mapping) const {
  Problem out = *this;
  RequireDimension("replacement mapping", dimension(),
                   mapping.input_dimension());
  RequireDimension("replacement mapping", dimension(),
                   mapping.output_dimension());
  out.mapping_ = std::move(mapping);
  return out;
}

Problem Problem::WithSet(FeasibleSet set) const {
  RequireDimension("replacement set", dimension(), set.dimension());
  Problem out = *this;
  out.set_ = std::move(set);
  return out;
}

Problem Problem::WithExogenous(Index i) const {
  Problem out = *this;
  out.exogenous_.at(static_cast<std::size_t>(i)) = true;
  return out;
}

double NaturalResidual(const Point& x, const Problem& problem, double alpha) {
  RequireDimension("residual point", problem.dimension(), x.size());
  RequireFinite("residual point", x);
  if (!(alpha > 0.0)) throw InvalidArgument("residual alpha must be > 0");
  Point r = x - problem.set().Project(x - alpha * problem.mapping().Evaluate(x));
  const auto& exo = problem.exogenous();
  for (Index i = 0; i < r.size(); ++i) {
    if (exo[i]) r(i) = 0.0;
  }
  return r.norm();
}

NormalConeResult NormalConeCheck(const Point& x, const Problem& problem,
                                 const std::vector<Point>& probes, double tol) {
  RequireDimension("normal cone point", problem.dimension(), x.size());
  Point F = problem.mapping().Evaluate(x);
  const auto& exo = problem.exogenous();
  for (Index i = 0; i < F.size(); ++i) {
    if (exo[i]) F(i) = 0.0;
  }
  NormalConeResult result;
  result.max_violation = probes.empty()
                             ? 0.0
                             : -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < probes.size(); ++k) {
    const Point& y = probes[k];
    RequireDimension("probe", problem.dimension(), y.size());
    const double distance = problem.set().Distance(y);
    if (!(distance <= kProbeFeasibilityTol)) throw RejectedProbe(k, distance);
    result.max_violation = std::max(result.max_violation, -F.dot(y - x));
  }
  result.holds = result.max_violation <= tol;
  return result;
}

}  // namespace cvi
