#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <utility>
#include <vector>

#include "cvi/sets.h"
#include "cvi/types.h"

namespace cvi {

/// Additive per-component Gaussian noise. A draw is a deterministic function
/// of (seed, draw_index), so sampled fields are reproducible.
struct NoiseModel {
  Point mean;
  Point stddev;
  std::uint64_t seed = 0;

  static NoiseModel Gaussian(Point stddev, std::uint64_t seed);
  static NoiseModel Gaussian(Index n, double stddev, std::uint64_t seed);

  Index dimension() const { return stddev.size(); }
  Point Draw(std::uint64_t draw_index) const;
};

/// A vector field F: R^n -> R^m. Square mappings (m = n) define problems;
/// non-square ones appear as the row blocks of a partitioned mapping, where
/// every block reads the full point and writes its own slice of the output.
class Mapping {
 public:
  using Evaluator = std::function<Point(const Point&)>;

  enum class Kind { kAffine, kPartitioned, kStochastic, kCallable };

  /// F(x) = Mx + c.
  static Mapping Affine(Matrix M, Point c);
  /// Row-block concatenation. Every component must have the same input
  /// dimension; output blocks are laid out in order.
  static Mapping Partitioned(std::vector<Mapping> components);
  /// F(x, eta) = base(x) + eta.
  static Mapping Stochastic(Mapping base, NoiseModel noise);
  static Mapping Callable(Index input_dim, Index output_dim, Evaluator f);

  Kind kind() const;
  Index input_dimension() const;
  Index output_dimension() const;

  /// Mean field E[F(x, eta)].
  Point Evaluate(const Point& x) const;
  /// One realization F(x, eta_k); deterministic mappings return Evaluate(x).
  Point EvaluateSample(const Point& x, std::uint64_t draw_index) const;
  /// Jacobian of the mean field: exact for affine pieces, central
  /// differences with step h elsewhere.
  Matrix Jacobian(const Point& x, double h = 1e-5) const;
  /// True when the mean field is affine (so Jacobian() is exact and constant).
  bool IsAffine() const;

  /// Partitioned mappings expose their blocks; any other mapping is a single
  /// component covering all outputs.
  Index num_components() const;
  /// Output range [offset, offset + length) of component i.
  std::pair<Index, Index> ComponentRange(Index i) const;
  Mapping Component(Index i) const;

  // Structural edits used by interventions. Each returns a new mapping.
  Mapping WithComponent(Index i, Mapping replacement) const;
  Mapping WithOutputShift(Index coordinate, double delta) const;
  Mapping WithComponentNoise(Index i, NoiseModel noise) const;

  struct AffineData {
    Matrix M;
    Point c;
  };
  struct PartitionedData {
    std::vector<Mapping> components;
    std::vector<Index> offsets;
  };
  struct StochasticData {
    std::shared_ptr<const Mapping> base;
    NoiseModel noise;
  };
  struct CallableData {
    Index input_dim;
    Index output_dim;
    Evaluator f;
  };

  const AffineData* affine() const;
  const PartitionedData* partitioned() const;
  const StochasticData* stochastic() const;
  const CallableData* callable() const;

 private:
  struct Rep;
  explicit Mapping(std::shared_ptr<const Rep> rep);
  std::shared_ptr<const Rep> rep_;
};

/// Sample-based certificate of the structural properties that decide which
/// solver and which analysis apply. For affine mappings the exact spectral
/// quantities are reported alongside.
struct PropertyReport {
  bool symmetric = false;
  bool positive_definite = false;
  bool monotone = false;
  double mu_estimate = 0.0;
  double lipschitz_estimate = 0.0;
  int samples = 0;
  std::uint64_t seed = 0;
  std::optional<double> mu_exact;         // lambda_min((J + J^T) / 2)
  std::optional<double> lipschitz_exact;  // ||J||_2
};

inline constexpr double kSymmetryTol = 1e-8;
inline constexpr double kMonotoneTol = 1e-10;
inline constexpr double kDefiniteTol = 1e-8;

/// Estimates symmetry/definiteness of the Jacobian at `samples` feasible
/// points and monotonicity, mu and L over all pairs of those points.
PropertyReport CheckProperties(const Mapping& mapping, const FeasibleSet& set,
                               int samples, std::uint64_t seed);

/// lambda_min of the symmetric part of M.
double MinSymmetricEigenvalue(const Matrix& M);
double SpectralNorm(const Matrix& M);

}  // namespace cvi
