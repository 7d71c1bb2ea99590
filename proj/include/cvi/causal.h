#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "cvi/interventions.h"
#include "cvi/solvers.h"

namespace cvi {

enum class Algorithm { kProjection, kExtragradient, kIncremental };

std::string ToString(Algorithm algorithm);
std::optional<Algorithm> ParseAlgorithm(const std::string& name);

/// How the untreated and treated problems are solved. An empty schedule means
/// DefaultStep for deterministic solvers.
struct SolverConfig {
  Algorithm algorithm = Algorithm::kProjection;
  std::optional<StepSchedule> schedule;
  SolverOptions options;
  std::uint64_t seed = 0;
  /// Incremental method only: components that get extra sampling mass.
  std::vector<Index> prioritized_components;
};

/// Dispatches to the configured solver.
SolveResult Solve(const Problem& problem, const SolverConfig& config);

struct DirectionalProducts {
  double treated_shift;   // <F1(x1) - F0(x1), x1 - x0>
  double cross_solution;  // <F1(x1) - F0(x0), x1 - x0>
};

struct TreatmentEffectReport {
  Point x0;  // untreated solution
  Point x1;  // treated solution
  double effect_norm = 0.0;
  double bound = 0.0;
  double mu_used = 0.0;
  bool mu_certified = false;  // exact eigenvalue rather than a sample estimate
  bool bound_satisfied = false;
  DirectionalProducts directional{0.0, 0.0};
  bool directional_signs_hold = false;
  std::vector<double> per_component;
  std::vector<std::string> warnings;
};

inline constexpr double kStrictnessTol = -1e-12;
/// Slack for the sensitivity bound: both sides come from iterative solves.
inline constexpr double kBoundSlack = 1e-9;
/// Effects smaller than this are treated as "no displacement".
inline constexpr double kEffectThreshold = 1e-6;

/// Untreated vs treated solutions of a mapping-type intervention, with the
/// (1/mu) ||F1(x1) - F0(x1)|| displacement bound and the directional
/// inner-product signs. Clamp interventions change K and are rejected with
/// UnsupportedAnalysis.
TreatmentEffectReport TreatmentEffect(const Problem& problem,
                                      const std::vector<Intervention>& interventions,
                                      const SolverConfig& config);
TreatmentEffectReport TreatmentEffect(const Problem& problem,
                                      const Intervention& intervention,
                                      const SolverConfig& config);

/// Per-component contributions <F1_i(x1) - F0_i(x1), x1_i - x0_i>, ranked
/// from most negative. They sum to the treated_shift product.
struct ComponentEffect {
  Index component;
  double contribution;
};

struct LocalizationReport {
  std::vector<ComponentEffect> ranked;
  double total = 0.0;
  TreatmentEffectReport effect;
};

LocalizationReport LocalizeEffects(const Problem& problem,
                                   const std::vector<Intervention>& interventions,
                                   const SolverConfig& config);

/// The per_component decomposition for a given pair of solutions.
std::vector<double> ComponentContributions(const Mapping& untreated,
                                           const Mapping& treated,
                                           const Point& x0, const Point& x1);

struct ComplementarityResult {
  double gap = 0.0;  // <F(x), x>
  bool feasible_F = false;
  bool feasible_x = false;
  bool solves_ncp = false;
};

inline constexpr double kComplementarityTol = 1e-6;

ComplementarityResult ComplementarityGap(const Point& x, const Mapping& mapping,
                                         double tol = kComplementarityTol);

}  // namespace cvi
