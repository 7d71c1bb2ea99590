#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <variant>
#include <vector>

#include "cvi/core.h"

namespace cvi {

struct ConstantStep {
  double alpha;
};

/// alpha_k = a / (k + b).
struct PolynomialStep {
  double a;
  double b;
};

/// Step sizes alpha_k for the field step and the constant relaxation beta used
/// by the incremental method.
struct StepSchedule {
  std::variant<ConstantStep, PolynomialStep> rule;
  double beta = 1.0;

  static StepSchedule Constant(double alpha, double beta = 1.0);
  static StepSchedule Polynomial(double a, double b, double beta = 1.0);

  double alpha(int k) const;
  bool is_constant() const {
    return std::holds_alternative<ConstantStep>(rule);
  }

  /// Deterministic solvers take any positive step.
  void ValidateDeterministic() const;
  /// Stochastic approximation needs sum alpha = inf, sum alpha^2 < inf and
  /// sum alpha^2 / gamma < inf with gamma = beta (2 - beta): a polynomial rule
  /// with a > 0, b >= 1 and beta in (0, 2).
  void ValidateStochastic() const;
};

/// Picks which component set K_i the incremental method projects onto.
/// Probabilities mix uniform mass with extra mass on intervened components,
/// and every component keeps at least rho / m.
class ConstraintSampler {
 public:
  static ConstraintSampler Uniform(Index components, std::uint64_t seed);
  static ConstraintSampler Prioritized(Index components,
                                       const std::vector<Index>& intervened,
                                       std::uint64_t seed,
                                       double priority_mass = 0.5,
                                       double rho = 0.5);

  Index Next();
  Index size() const { return static_cast<Index>(probabilities_.size()); }
  const std::vector<double>& probabilities() const { return probabilities_; }
  double floor() const { return floor_; }

 private:
  ConstraintSampler(std::vector<double> probabilities, double floor,
                    std::uint64_t seed);

  std::vector<double> probabilities_;
  double floor_;
  std::mt19937_64 rng_;
  std::discrete_distribution<Index> dist_;
};

struct SolverOptions {
  double tol = kDefaultTolerance;
  int max_iter = 10000;
  double residual_alpha = kDefaultResidualAlpha;
  /// Starting point; defaults to P_K(0).
  std::optional<Point> x0;
  bool record_history = false;
  /// Residual test period for the incremental method.
  int check_interval = 1;
};

struct SolveResult : Solution {
  std::vector<Point> history;  // iterates x_1, x_2, ... when recorded
};

inline constexpr double kDivergenceFactor = 1e6;

/// Step for a deterministic solver when none is given: mu / L^2 for the
/// projection method (0.9 / L when mu is not positive) and 0.9 / L for
/// extragradient, from CheckProperties estimates (exact for affine maps).
StepSchedule DefaultStep(const Problem& problem, bool extragradient);

/// x_{k+1} = P_K(x_k - alpha_k F(x_k)).
SolveResult SolveProjection(const Problem& problem,
                            const StepSchedule& schedule,
                            const SolverOptions& options = {});

/// y_k = P_K(x_k - alpha F(x_k)), x_{k+1} = P_K(x_k - alpha F(y_k)).
SolveResult SolveExtragradient(const Problem& problem,
                               const StepSchedule& schedule,
                               const SolverOptions& options = {});

/// Incremental two-step method:
///   z_k = x_k - alpha_k F(x_k, v_k),  x_{k+1} = z_k - beta (z_k - P_{w_k} z_k)
/// where v_k is a noise draw and w_k a sampled component of a product set.
/// Iterates may leave K; the reported point is P_K of the last iterate.
SolveResult SolveIncremental(const Problem& problem,
                             const StepSchedule& schedule,
                             ConstraintSampler sampler,
                             const SolverOptions& options,
                             std::uint64_t seed);

/// Explicit Euler scheme for the projected dynamical system
/// dX/dt = Pi_K(X, -F(X)): X_{t+1} = P_K(X_t - delta F(X_t)).
/// Returns steps + 1 points starting at P_K(x0).
std::vector<Point> IntegratePds(const Problem& problem, const Point& x0,
                                double delta, int steps);

}  // namespace cvi
