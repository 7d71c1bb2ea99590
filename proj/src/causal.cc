#include "cvi/causal.h"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace cvi {
namespace {

constexpr int kPropertySamples = 200;

// mu for the untreated field: exact for affine maps, sampled otherwise.
std::pair<double, bool> StrongMonotonicity(const Problem& problem,
                                           std::uint64_t seed) {
  const Mapping& F = problem.mapping();
  if (F.IsAffine()) {
    const Matrix J = F.Jacobian(Point::Zero(problem.dimension()));
    return {MinSymmetricEigenvalue(J), true};
  }
  const PropertyReport props =
      CheckProperties(F, problem.set(), kPropertySamples, seed);
  return {props.mu_estimate, false};
}

SolveResult SolveOrThrow(const Problem& problem, const SolverConfig& config,
                         const std::string& which) {
  SolveResult result = Solve(problem, config);
  if (!result.converged) {
    std::ostringstream msg;
    msg << which << " solve did not converge (residual " << result.residual
        << " after " << result.iterations << " iterations)";
    throw NonConvergence(msg.str(), result.point, result.residual);
  }
  return result;
}

}  // namespace

std::string ToString(Algorithm algorithm) {
  switch (algorithm) {
    case Algorithm::kProjection:
      return "projection";
    case Algorithm::kExtragradient:
      return "extragradient";
    case Algorithm::kIncremental:
      return "incremental";
  }
  return "unknown";
}

std::optional<Algorithm> ParseAlgorithm(const std::string& name) {
  if (name == "projection") return Algorithm::kProjection;
  if (name == "extragradient") return Algorithm::kExtragradient;
  if (name == "incremental") return Algorithm::kIncremental;
  return std::nullopt;
}

SolveResult Solve(const Problem& problem, const SolverConfig& config) {
  switch (config.algorithm) {
    case Algorithm::kProjection:
      return SolveProjection(problem,
                             config.schedule.value_or(DefaultStep(problem, false)),
                             config.options);
    case Algorithm::kExtragradient:
      return SolveExtragradient(
          problem, config.schedule.value_or(DefaultStep(problem, true)),
          config.options);
    case Algorithm::kIncremental: {
      StepSchedule schedule;
      if (config.schedule) {
        schedule = *config.schedule;
      } else {
        // a = 2 / mu makes the bias decay like k^-2; b puts alpha_0 at 1 / L.
        const PropertyReport props =
            CheckProperties(problem.mapping(), problem.set(), 50, config.seed);
        const double mu = props.mu_exact.value_or(props.mu_estimate);
        const double lipschitz =
            props.lipschitz_exact.value_or(props.lipschitz_estimate);
        if (!(mu > 0.0) || !(lipschitz > 0.0)) {
          throw InvalidArgument(
              "incremental solver needs an explicit schedule for mappings "
              "that are not strongly monotone");
        }
        const double a = 2.0 / mu;
        schedule = StepSchedule::Polynomial(a, std::max(1.0, a * lipschitz));
      }
      const Index components =
          problem.set().product() != nullptr
              ? static_cast<Index>(problem.set().product()->parts.size())
              : 1;
      ConstraintSampler sampler =
          config.prioritized_components.empty()
              ? ConstraintSampler::Uniform(components, config.seed)
              : ConstraintSampler::Prioritized(
                    components, config.prioritized_components, config.seed);
      return SolveIncremental(problem, schedule, std::move(sampler),
                              config.options, config.seed);
    }
  }
  throw InvalidArgument("unknown algorithm");
}

std::vector<double> ComponentContributions(const Mapping& untreated,
                                           const Mapping& treated,
                                           const Point& x0, const Point& x1) {
  const Point shift = treated.Evaluate(x1) - untreated.Evaluate(x1);
  const Point dx = x1 - x0;
  std::vector<double> out;
  for (Index i = 0; i < untreated.num_components(); ++i) {
    const auto [offset, length] = untreated.ComponentRange(i);
    out.push_back(shift.segment(offset, length).dot(dx.segment(offset, length)));
  }
  return out;
}

TreatmentEffectReport TreatmentEffect(
    const Problem& problem, const std::vector<Intervention>& interventions,
    const SolverConfig& config) {
  for (const auto& intervention : interventions) {
    if (IsClamp(intervention)) {
      throw UnsupportedAnalysis(
          "clamp interventions change the feasible set; solve the clamped "
          "submodel directly and compare solutions instead");
    }
  }
  const auto [mu, certified] = StrongMonotonicity(problem, config.seed);
  if (!(mu > 0.0)) {
    std::ostringstream msg;
    msg << "untreated mapping is not strongly monotone (mu = " << mu << ")";
    throw UnsupportedAnalysis(msg.str());
  }
  const Problem treated = Apply(problem, interventions).intervened_problem;
  const SolveResult s0 = SolveOrThrow(problem, config, "untreated");
  const SolveResult s1 = SolveOrThrow(treated, config, "treated");

  const Mapping& F0 = problem.mapping();
  const Mapping& F1 = treated.mapping();
  TreatmentEffectReport report;
  report.x0 = s0.point;
  report.x1 = s1.point;
  const Point dx = report.x1 - report.x0;
  const Point F1x1 = F1.Evaluate(report.x1);
  const Point F0x1 = F0.Evaluate(report.x1);
  const Point F0x0 = F0.Evaluate(report.x0);
  report.effect_norm = dx.norm();
  report.mu_used = mu;
  report.mu_certified = certified;
  report.bound = (F1x1 - F0x1).norm() / mu;
  report.bound_satisfied = report.effect_norm <= report.bound + kBoundSlack;
  report.directional.treated_shift = (F1x1 - F0x1).dot(dx);
  report.directional.cross_solution = (F1x1 - F0x0).dot(dx);
  if (report.effect_norm > kEffectThreshold) {
    report.directional_signs_hold =
        report.directional.treated_shift < kStrictnessTol &&
        report.directional.cross_solution <= kBoundSlack;
  } else {
    report.directional_signs_hold =
        report.directional.treated_shift <= kBoundSlack &&
        report.directional.cross_solution <= kBoundSlack;
  }
  report.per_component = ComponentContributions(F0, F1, report.x0, report.x1);
  if (!report.bound_satisfied && !certified) {
    report.warnings.push_back(
        "displacement exceeds the bound computed from an estimated mu; the "
        "sampled mu may overstate strong monotonicity");
  }
  return report;
}

TreatmentEffectReport TreatmentEffect(const Problem& problem,
                                      const Intervention& intervention,
                                      const SolverConfig& config) {
  return TreatmentEffect(problem, std::vector<Intervention>{intervention},
                         config);
}

LocalizationReport LocalizeEffects(
    const Problem& problem, const std::vector<Intervention>& interventions,
    const SolverConfig& config) {
  if (problem.mapping().partitioned() == nullptr) {
    throw InvalidArgument("effect localization needs a partitioned mapping");
  }
  LocalizationReport out;
  out.effect = TreatmentEffect(problem, interventions, config);
  for (std::size_t i = 0; i < out.effect.per_component.size(); ++i) {
    out.ranked.push_back(
        {static_cast<Index>(i), out.effect.per_component[i]});
    out.total += out.effect.per_component[i];
  }
  std::stable_sort(out.ranked.begin(), out.ranked.end(),
                   [](const ComponentEffect& a, const ComponentEffect& b) {
                     return a.contribution < b.contribution;
                   });
  return out;
}

ComplementarityResult ComplementarityGap(const Point& x, const Mapping& mapping,
                                         double tol) {
  const Point F = mapping.Evaluate(x);
  ComplementarityResult result;
  result.gap = F.dot(x);
  result.feasible_F = F.minCoeff() >= -tol;
  result.feasible_x = x.minCoeff() >= -tol;
  result.solves_ncp =
      std::abs(result.gap) <= tol && result.feasible_F && result.feasible_x;
  return result;
}

}  // namespace cvi
