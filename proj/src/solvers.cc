#include "cvi/solvers.h"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <string>

namespace cvi {
namespace {

constexpr int kDefaultStepSamples = 50;

Point StartingPoint(const Problem& problem, const SolverOptions& options) {
  if (options.x0) {
    RequireDimension("initial point", problem.dimension(), options.x0->size());
    RequireFinite("initial point", *options.x0);
    return problem.set().Project(*options.x0);
  }
  return problem.set().Project(Point::Zero(problem.dimension()));
}

void CheckOptions(const SolverOptions& options) {
  if (!(options.tol > 0.0)) throw InvalidArgument("tolerance must be > 0");
  if (options.max_iter < 0) throw InvalidArgument("max_iter must be >= 0");
  if (options.check_interval < 1) {
    throw InvalidArgument("check_interval must be >= 1");
  }
}

// Shared driver for the deterministic fixed-point schemes. `step` maps x_k to
// x_{k+1}.
SolveResult RunDeterministic(const Problem& problem,
                             const SolverOptions& options,
                             const std::string& tag,
                             const std::function<Point(const Point&, int)>& step) {
  CheckOptions(options);
  SolveResult result;
  result.algorithm = tag;
  result.tolerance = options.tol;
  Point x = StartingPoint(problem, options);
  double r = NaturalResidual(x, problem, options.residual_alpha);
  const double r0 = r;
  int k = 0;
  while (r > options.tol && k < options.max_iter) {
    Point next = step(x, k);
    ++k;
    if (!next.allFinite()) {
      result.diverged = true;
      break;
    }
    x = std::move(next);
    if (options.record_history) result.history.push_back(x);
    r = NaturalResidual(x, problem, options.residual_alpha);
    if (r > kDivergenceFactor * r0) {
      result.diverged = true;
      break;
    }
  }
  result.point = std::move(x);
  result.residual = r;
  result.iterations = k;
  result.converged = !result.diverged && r <= options.tol;
  return result;
}

// Projection onto {x : x_block in K_i}, leaving other coordinates alone.
Point ProjectComponent(const FeasibleSet& set, Index component,
                       const Point& z) {
  const auto* prod = set.product();
  if (prod == nullptr) return set.Project(z);
  Point out = z;
  const Index offset = prod->offsets[component];
  const Index len = prod->parts[component].dimension();
  out.segment(offset, len) = prod->parts[component].Project(z.segment(offset, len));
  return out;
}

}  // namespace

StepSchedule StepSchedule::Constant(double alpha, double beta) {
  return StepSchedule{ConstantStep{alpha}, beta};
}

StepSchedule StepSchedule::Polynomial(double a, double b, double beta) {
  return StepSchedule{PolynomialStep{a, b}, beta};
}

double StepSchedule::alpha(int k) const {
  if (const auto* c = std::get_if<ConstantStep>(&rule)) return c->alpha;
  const auto& p = std::get<PolynomialStep>(rule);
  return p.a / (static_cast<double>(k) + p.b);
}

void StepSchedule::ValidateDeterministic() const {
  if (const auto* c = std::get_if<ConstantStep>(&rule)) {
    if (!(c->alpha > 0.0) || !std::isfinite(c->alpha)) {
      throw InvalidArgument("constant step must be positive and finite");
    }
    return;
  }
  const auto& p = std::get<PolynomialStep>(rule);
  if (!(p.a > 0.0) || !(p.b > 0.0) || !std::isfinite(p.a) ||
      !std::isfinite(p.b)) {
    throw InvalidArgument("polynomial step needs a > 0 and b > 0");
  }
}

void StepSchedule::ValidateStochastic() const {
  if (is_constant()) {
    throw InvalidArgument(
        "stochastic solver needs a diminishing step: constant steps violate "
        "sum alpha_k^2 < inf");
  }
  const auto& p = std::get<PolynomialStep>(rule);
  if (!(p.a > 0.0) || !std::isfinite(p.a)) {
    throw InvalidArgument("polynomial step needs a > 0");
  }
  if (!(p.b >= 1.0) || !std::isfinite(p.b)) {
    throw InvalidArgument("polynomial step needs b >= 1");
  }
  if (!(beta > 0.0 && beta < 2.0)) {
    throw InvalidArgument("relaxation beta must lie in (0, 2)");
  }
}

ConstraintSampler::ConstraintSampler(std::vector<double> probabilities,
                                     double floor, std::uint64_t seed)
    : probabilities_(std::move(probabilities)),
      floor_(floor),
      rng_(seed),
      dist_(probabilities_.begin(), probabilities_.end()) {}

ConstraintSampler ConstraintSampler::Uniform(Index components,
                                             std::uint64_t seed) {
  if (components < 1) throw InvalidArgument("sampler needs >= 1 component");
  const double p = 1.0 / static_cast<double>(components);
  return ConstraintSampler(std::vector<double>(components, p), p, seed);
}

ConstraintSampler ConstraintSampler::Prioritized(
    Index components, const std::vector<Index>& intervened, std::uint64_t seed,
    double priority_mass, double rho) {
  if (components < 1) throw InvalidArgument("sampler needs >= 1 component");
  if (!(rho > 0.0 && rho <= 1.0)) throw InvalidArgument("rho must be in (0, 1]");
  if (!(priority_mass >= 0.0 && priority_mass <= 1.0)) {
    throw InvalidArgument("priority mass must be in [0, 1]");
  }
  const double m = static_cast<double>(components);
  std::vector<double> p(components, 1.0 / m);
  std::vector<bool> flagged(components, false);
  for (Index i : intervened) {
    if (i < 0 || i >= components) {
      throw InvalidArgument("intervened component " + std::to_string(i) +
                            " out of range");
    }
    flagged[i] = true;
  }
  const auto num_flagged = std::count(flagged.begin(), flagged.end(), true);
  if (num_flagged > 0) {
    for (Index i = 0; i < components; ++i) {
      p[i] = (1.0 - priority_mass) / m +
             (flagged[i] ? priority_mass / static_cast<double>(num_flagged)
                         : 0.0);
    }
  }
  // Lift anything under the floor and take the mass from the rest.
  const double floor = rho / m;
  std::vector<bool> pinned(components, false);
  for (bool changed = true; changed;) {
    changed = false;
    double pinned_mass = 0.0;
    double free_mass = 0.0;
    for (Index i = 0; i < components; ++i) {
      if (!pinned[i] && p[i] < floor) {
        pinned[i] = true;
        changed = true;
      }
      if (pinned[i]) {
        pinned_mass += floor;
      } else {
        free_mass += p[i];
      }
    }
    for (Index i = 0; i < components; ++i) {
      p[i] = pinned[i] ? floor : p[i] * (1.0 - pinned_mass) / free_mass;
    }
  }
  return ConstraintSampler(std::move(p), floor, seed);
}

Index ConstraintSampler::Next() { return dist_(rng_); }

StepSchedule DefaultStep(const Problem& problem, bool extragradient) {
  const PropertyReport props = CheckProperties(
      problem.mapping(), problem.set(), kDefaultStepSamples, 0);
  const double mu = props.mu_exact.value_or(props.mu_estimate);
  double lipschitz = props.lipschitz_exact.value_or(props.lipschitz_estimate);
  if (!(lipschitz > 0.0)) lipschitz = 1.0;
  if (!extragradient && mu > 0.0) {
    return StepSchedule::Constant(mu / (lipschitz * lipschitz));
  }
  return StepSchedule::Constant(0.9 / lipschitz);
}

SolveResult SolveProjection(const Problem& problem,
                            const StepSchedule& schedule,
                            const SolverOptions& options) {
  schedule.ValidateDeterministic();
  const Mapping& F = problem.mapping();
  const FeasibleSet& K = problem.set();
  return RunDeterministic(problem, options, "projection",
                          [&](const Point& x, int k) {
                            return K.Project(x - schedule.alpha(k) * F.Evaluate(x));
                          });
}

SolveResult SolveExtragradient(const Problem& problem,
                               const StepSchedule& schedule,
                               const SolverOptions& options) {
  schedule.ValidateDeterministic();
  const Mapping& F = problem.mapping();
  const FeasibleSet& K = problem.set();
  return RunDeterministic(problem, options, "extragradient",
                          [&](const Point& x, int k) {
                            const double alpha = schedule.alpha(k);
                            const Point y = K.Project(x - alpha * F.Evaluate(x));
                            return K.Project(x - alpha * F.Evaluate(y));
                          });
}

SolveResult SolveIncremental(const Problem& problem,
                             const StepSchedule& schedule,
                             ConstraintSampler sampler,
                             const SolverOptions& options,
                             std::uint64_t seed) {
  schedule.ValidateStochastic();
  CheckOptions(options);
  const FeasibleSet& K = problem.set();
  const Mapping& F = problem.mapping();
  const Index components =
      K.product() != nullptr ? static_cast<Index>(K.product()->parts.size()) : 1;
  if (sampler.size() != components) {
    throw InvalidArgument("sampler has " + std::to_string(sampler.size()) +
                          " components but the feasible set has " +
                          std::to_string(components));
  }

  SolveResult result;
  result.algorithm = "incremental";
  result.tolerance = options.tol;
  result.seed = seed;

  Point x = StartingPoint(problem, options);
  double r = NaturalResidual(x, problem, options.residual_alpha);
  const double r0 = r;
  int k = 0;
  // Draw indices are salted by the seed so different seeds give different
  // noise streams from the same mapping.
  const std::uint64_t salt = seed << 32;
  while (r > options.tol && k < options.max_iter) {
    const Point g = F.EvaluateSample(x, salt ^ static_cast<std::uint64_t>(k));
    const Point z = x - schedule.alpha(k) * g;
    const Index component = sampler.Next();
    x = z - schedule.beta * (z - ProjectComponent(K, component, z));
    ++k;
    if (!x.allFinite()) {
      result.diverged = true;
      break;
    }
    if (options.record_history) result.history.push_back(x);
    if (k % options.check_interval == 0 || k == options.max_iter) {
      r = NaturalResidual(K.Project(x), problem, options.residual_alpha);
      if (r > kDivergenceFactor * r0) {
        result.diverged = true;
        break;
      }
    }
  }
  result.point = x.allFinite() ? K.Project(x) : x;
  result.residual = x.allFinite()
                        ? NaturalResidual(result.point, problem,
                                          options.residual_alpha)
                        : std::numeric_limits<double>::infinity();
  result.iterations = k;
  result.converged = !result.diverged && result.residual <= options.tol;
  return result;
}

std::vector<Point> IntegratePds(const Problem& problem, const Point& x0,
                                double delta, int steps) {
  RequireDimension("initial point", problem.dimension(), x0.size());
  RequireFinite("initial point", x0);
  if (!(delta > 0.0)) throw InvalidArgument("delta must be > 0");
  if (steps < 0) throw InvalidArgument("steps must be >= 0");
  const FeasibleSet& K = problem.set();
  const Mapping& F = problem.mapping();
  std::vector<Point> trajectory;
  trajectory.reserve(static_cast<std::size_t>(steps) + 1);
  trajectory.push_back(K.Project(x0));
  for (int t = 0; t < steps; ++t) {
    const Point& x = trajectory.back();
    trajectory.push_back(K.Project(x - delta * F.Evaluate(x)));
  }
  return trajectory;
}

}  // namespace cvi
