#pragma once

#include <memory>
#include <random>
#include <utility>
#include <vector>

#include "cvi/types.h"

namespace cvi {

/// Euclidean projection onto {x : Bx = b} (intersected with x >= 0 when
/// `nonnegative`) by Dykstra's alternating projections. The affine step uses
/// the minimum-norm least-squares correction, so rank-deficient B (graph
/// incidence matrices) is fine. With s = tol (1 + ||x||), stops once
/// successive iterates move less than s and ||Bx - b||_inf <= 10 s; throws
/// NonConvergence after `max_iter` sweeps.
Point ProjectPolyhedronDykstra(const Matrix& B, const Point& b,
                               bool nonnegative, const Point& x,
                               double tol = 1e-10, int max_iter = 10000);

/// A closed convex set K in R^n together with its Euclidean projector.
///
/// Sets are immutable and cheap to copy (shared representation). All
/// validation happens in the factory functions, so Project() never has to
/// report an empty set.
class FeasibleSet {
 public:
  enum class Kind {
    kBox,
    kNonnegativeOrthant,
    kSimplex,
    kPolyhedron,
    kProduct,
    kFixedOverlay,
  };

  /// {x : lower <= x <= upper}. Infinite bounds are allowed.
  static FeasibleSet Box(Point lower, Point upper);
  static FeasibleSet NonnegativeOrthant(Index n);
  /// {x >= 0 : sum(x) = radius}.
  static FeasibleSet Simplex(double radius, Index n);
  /// {x : Bx = b} or {x >= 0 : Bx = b}. Throws InvalidArgument when empty.
  static FeasibleSet Polyhedron(Matrix B, Point b, bool nonnegative);
  /// Cartesian product; part i occupies the coordinates following part i-1.
  static FeasibleSet Product(std::vector<FeasibleSet> parts);
  /// The slice of `base` with the listed coordinates held at fixed values.
  /// Throws InvalidArgument if a value is out of the base bounds, the slice
  /// is empty, or two entries clamp the same index to different values.
  static FeasibleSet FixedOverlay(const FeasibleSet& base,
                                  std::vector<std::pair<Index, double>> fixed);

  Kind kind() const;
  Index dimension() const;

  Point Project(const Point& x) const;
  double Distance(const Point& x) const { return (x - Project(x)).norm(); }
  bool Contains(const Point& x, double tol) const { return Distance(x) <= tol; }

  /// Draws a feasible point. Unbounded directions are sampled within
  /// `scale` of the nearest bound.
  Point Sample(std::mt19937_64& rng, double scale = 10.0) const;

  // Variant accessors; exactly one is non-null.
  struct BoxData {
    Point lower, upper;
  };
  struct OrthantData {
    Index dim;
  };
  struct SimplexData {
    double radius;
    Index dim;
  };
  struct PolyhedronData {
    Matrix B;
    Point b;
    bool nonnegative;
    Matrix pinv;  // Moore-Penrose pseudo-inverse of B
  };
  struct ProductData {
    std::vector<FeasibleSet> parts;
    std::vector<Index> offsets;
  };
  struct OverlayData {
    std::shared_ptr<const FeasibleSet> base;
    std::vector<std::pair<Index, double>> fixed;  // sorted by index
    std::vector<Index> free;                      // sorted
    std::shared_ptr<const FeasibleSet> reduced;   // null when nothing is free
    Index dim;
  };

  const BoxData* box() const;
  const OrthantData* orthant() const;
  const SimplexData* simplex() const;
  const PolyhedronData* polyhedron() const;
  const ProductData* product() const;
  const OverlayData* overlay() const;

 private:
  struct Rep;
  explicit FeasibleSet(std::shared_ptr<const Rep> rep);
  static FeasibleSet MakeSimplex(double radius, Index n);
  static FeasibleSet Restrict(const FeasibleSet& base,
                              const std::vector<std::pair<Index, double>>& fixed);

  std::shared_ptr<const Rep> rep_;
};

}  // namespace cvi
