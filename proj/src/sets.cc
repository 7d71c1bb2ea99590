#include "cvi/sets.h"

#include <Eigen/QR>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>
#include <variant>

namespace cvi {
namespace {

constexpr double kMembershipTol = 1e-9;

// Tolerance for accepting a polyhedron as nonempty: the Dykstra run from the
// origin has to land this close to {Bx = b}.
constexpr double kNonemptyTol = 1e-7;

// Relative Dykstra stopping tolerance for Project() and Sample().
constexpr double kDykstraTol = 1e-13;

Point AffineProject(const Matrix& B, const Matrix& pinv, const Point& b,
                    const Point& y) {
  return y - pinv * (B * y - b);
}

Point Dykstra(const Matrix& B, const Matrix& pinv, const Point& b,
              bool nonnegative, const Point& x0, double tol, int max_iter) {
  if (!nonnegative) return AffineProject(B, pinv, b, x0);
  const Index n = x0.size();
  Point x = x0;
  Point p = Point::Zero(n);
  Point q = Point::Zero(n);
  double feas = std::numeric_limits<double>::infinity();
  for (int it = 0; it < max_iter; ++it) {
    const Point y = AffineProject(B, pinv, b, x + p);
    p = x + p - y;
    const Point shifted = y + q;
    const Point next = shifted.cwiseMax(0.0);
    q = shifted - next;
    const double move = (next - x).norm();
    x = next;
    feas = B.rows() > 0 ? (B * x - b).lpNorm<Eigen::Infinity>() : 0.0;
    const double scaled = tol * (1.0 + x.norm());
    if (move < scaled && feas <= 10.0 * scaled) return x;
  }
  throw NonConvergence("Dykstra polyhedron projection hit the iteration limit",
                       x, feas);
}

Matrix PseudoInverse(const Matrix& B) {
  if (B.rows() == 0) return Matrix::Zero(B.cols(), 0);
  Eigen::CompleteOrthogonalDecomposition<Matrix> cod(B);
  return cod.pseudoInverse();
}

Point ProjectSimplex(const Point& x, double radius) {
  // Sort-and-threshold: find theta with sum(max(x - theta, 0)) = radius.
  std::vector<double> u(x.data(), x.data() + x.size());
  std::sort(u.begin(), u.end(), std::greater<>());
  double cumsum = 0.0;
  double theta = 0.0;
  for (std::size_t j = 0; j < u.size(); ++j) {
    cumsum += u[j];
    const double t = (cumsum - radius) / static_cast<double>(j + 1);
    if (u[j] - t > 0.0) theta = t;
  }
  return (x.array() - theta).cwiseMax(0.0).matrix();
}

double SampleInterval(std::mt19937_64& rng, double lo, double hi,
                      double scale) {
  if (std::isinf(lo) && std::isinf(hi)) {
    lo = -scale;
    hi = scale;
  } else if (std::isinf(lo)) {
    lo = hi - scale;
  } else if (std::isinf(hi)) {
    hi = lo + scale;
  }
  if (lo == hi) return lo;
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

}  // namespace

struct FeasibleSet::Rep {
  std::variant<BoxData, OrthantData, SimplexData, PolyhedronData, ProductData,
               OverlayData>
      data;
};

FeasibleSet::FeasibleSet(std::shared_ptr<const Rep> rep)
    : rep_(std::move(rep)) {}

Point ProjectPolyhedronDykstra(const Matrix& B, const Point& b,
                               bool nonnegative, const Point& x, double tol,
                               int max_iter) {
  RequireDimension("polyhedron projection point", B.cols(), x.size());
  RequireDimension("polyhedron right-hand side", B.rows(), b.size());
  if (!(tol > 0.0)) throw InvalidArgument("Dykstra tolerance must be positive");
  return Dykstra(B, PseudoInverse(B), b, nonnegative, x, tol, max_iter);
}

FeasibleSet FeasibleSet::Box(Point lower, Point upper) {
  RequireDimension("box upper bound", lower.size(), upper.size());
  if (lower.size() == 0) throw InvalidArgument("box must have dimension >= 1");
  for (Index i = 0; i < lower.size(); ++i) {
    if (std::isnan(lower(i)) || std::isnan(upper(i)) || lower(i) > upper(i)) {
      throw InvalidArgument("box bounds violate lower <= upper at index " +
                            std::to_string(i));
    }
  }
  return FeasibleSet(std::make_shared<const Rep>(
      Rep{BoxData{std::move(lower), std::move(upper)}}));
}

FeasibleSet FeasibleSet::NonnegativeOrthant(Index n) {
  if (n <= 0) throw InvalidArgument("orthant must have dimension >= 1");
  return FeasibleSet(std::make_shared<const Rep>(Rep{OrthantData{n}}));
}

FeasibleSet FeasibleSet::Simplex(double radius, Index n) {
  if (!(radius > 0.0) || !std::isfinite(radius)) {
    throw InvalidArgument("simplex radius must be positive and finite");
  }
  return MakeSimplex(radius, n);
}

FeasibleSet FeasibleSet::MakeSimplex(double radius, Index n) {
  if (n <= 0) throw InvalidArgument("simplex must have dimension >= 1");
  return FeasibleSet(std::make_shared<const Rep>(Rep{SimplexData{radius, n}}));
}

FeasibleSet FeasibleSet::Polyhedron(Matrix B, Point b, bool nonnegative) {
  RequireDimension("polyhedron right-hand side", B.rows(), b.size());
  if (B.cols() == 0) throw InvalidArgument("polyhedron must have dimension >= 1");
  if (!B.allFinite() || !b.allFinite()) {
    throw InvalidArgument("polyhedron data must be finite");
  }
  Matrix pinv = PseudoInverse(B);
  const Point origin = Point::Zero(B.cols());
  const Point affine = AffineProject(B, pinv, b, origin);
  const double scale = std::max(1.0, b.lpNorm<Eigen::Infinity>());
  if (B.rows() > 0 &&
      (B * affine - b).lpNorm<Eigen::Infinity>() > kNonemptyTol * scale) {
    throw InvalidArgument("polyhedron is empty: Bx = b is inconsistent");
  }
  if (nonnegative) {
    try {
      const Point x = Dykstra(B, pinv, b, true, origin, 1e-10, 10000);
      if ((B * x - b).lpNorm<Eigen::Infinity>() > kNonemptyTol * scale) {
        throw InvalidArgument("polyhedron is empty");
      }
    } catch (const NonConvergence& e) {
      throw InvalidArgument(
          "polyhedron appears empty: projection from the origin stalls at "
          "distance " +
          std::to_string(e.distance()));
    }
  }
  return FeasibleSet(std::make_shared<const Rep>(Rep{PolyhedronData{
      std::move(B), std::move(b), nonnegative, std::move(pinv)}}));
}

FeasibleSet FeasibleSet::Product(std::vector<FeasibleSet> parts) {
  if (parts.empty()) throw InvalidArgument("product needs at least one part");
  std::vector<Index> offsets;
  Index offset = 0;
  for (const auto& part : parts) {
    offsets.push_back(offset);
    offset += part.dimension();
  }
  return FeasibleSet(std::make_shared<const Rep>(
      Rep{ProductData{std::move(parts), std::move(offsets)}}));
}

FeasibleSet FeasibleSet::FixedOverlay(
    const FeasibleSet& base, std::vector<std::pair<Index, double>> fixed) {
  const Index n = base.dimension();
  std::shared_ptr<const FeasibleSet> root;
  // Overlays flatten: clamps on an overlay merge with the existing ones.
  if (const auto* ov = base.overlay()) {
    root = ov->base;
    fixed.insert(fixed.end(), ov->fixed.begin(), ov->fixed.end());
  } else {
    root = std::make_shared<const FeasibleSet>(base);
  }
  std::sort(fixed.begin(), fixed.end());
  std::vector<std::pair<Index, double>> merged;
  for (const auto& [index, value] : fixed) {
    if (index < 0 || index >= n) {
      throw InvalidArgument("clamped index " + std::to_string(index) +
                            " out of range");
    }
    if (!std::isfinite(value)) {
      throw InvalidArgument("clamp value must be finite");
    }
    if (!merged.empty() && merged.back().first == index) {
      if (merged.back().second != value) {
        throw InvalidArgument("conflicting clamps on index " +
                              std::to_string(index));
      }
      continue;
    }
    merged.emplace_back(index, value);
  }
  std::vector<Index> free;
  std::size_t k = 0;
  for (Index i = 0; i < n; ++i) {
    if (k < merged.size() && merged[k].first == i) {
      ++k;
    } else {
      free.push_back(i);
    }
  }
  std::shared_ptr<const FeasibleSet> reduced;
  if (free.empty()) {
    Point x(n);
    for (const auto& [index, value] : merged) x(index) = value;
    if (!root->Contains(x, kMembershipTol)) {
      throw InvalidArgument("clamped point is infeasible for the base set");
    }
  } else {
    reduced = std::make_shared<const FeasibleSet>(Restrict(*root, merged));
  }
  return FeasibleSet(std::make_shared<const Rep>(Rep{OverlayData{
      std::move(root), std::move(merged), std::move(free), std::move(reduced),
      n}}));
}

FeasibleSet FeasibleSet::Restrict(
    const FeasibleSet& base, const std::vector<std::pair<Index, double>>& fixed) {
  const Index n = base.dimension();
  std::vector<bool> is_fixed(n, false);
  for (const auto& [index, value] : fixed) is_fixed[index] = true;
  std::vector<Index> free;
  for (Index i = 0; i < n; ++i) {
    if (!is_fixed[i]) free.push_back(i);
  }
  const Index nfree = static_cast<Index>(free.size());
  auto out_of_bounds = [](Index index) {
    return InvalidArgument("clamp value for index " + std::to_string(index) +
                           " violates the set bounds");
  };

  if (const auto* box = base.box()) {
    for (const auto& [index, value] : fixed) {
      if (value < box->lower(index) || value > box->upper(index)) {
        throw out_of_bounds(index);
      }
    }
    Point lo(nfree), hi(nfree);
    for (Index i = 0; i < nfree; ++i) {
      lo(i) = box->lower(free[i]);
      hi(i) = box->upper(free[i]);
    }
    return Box(std::move(lo), std::move(hi));
  }
  if (base.orthant() != nullptr) {
    for (const auto& [index, value] : fixed) {
      if (value < 0.0) throw out_of_bounds(index);
    }
    return NonnegativeOrthant(nfree);
  }
  if (const auto* simplex = base.simplex()) {
    double used = 0.0;
    for (const auto& [index, value] : fixed) {
      if (value < 0.0) throw out_of_bounds(index);
      used += value;
    }
    const double remaining = simplex->radius - used;
    if (remaining < -kMembershipTol) {
      throw InvalidArgument("clamped values exceed the simplex radius");
    }
    return MakeSimplex(std::max(remaining, 0.0), nfree);
  }
  if (const auto* poly = base.polyhedron()) {
    Matrix B(poly->B.rows(), nfree);
    Point b = poly->b;
    for (Index i = 0; i < nfree; ++i) B.col(i) = poly->B.col(free[i]);
    for (const auto& [index, value] : fixed) {
      if (poly->nonnegative && value < 0.0) throw out_of_bounds(index);
      b -= value * poly->B.col(index);
    }
    return Polyhedron(std::move(B), std::move(b), poly->nonnegative);
  }
  if (const auto* prod = base.product()) {
    std::vector<FeasibleSet> parts;
    for (std::size_t p = 0; p < prod->parts.size(); ++p) {
      const FeasibleSet& part = prod->parts[p];
      const Index lo = prod->offsets[p];
      const Index hi = lo + part.dimension();
      std::vector<std::pair<Index, double>> local;
      for (const auto& [index, value] : fixed) {
        if (index >= lo && index < hi) local.emplace_back(index - lo, value);
      }
      if (local.empty()) {
        parts.push_back(part);
      } else if (static_cast<Index>(local.size()) == part.dimension()) {
        Point x(part.dimension());
        for (const auto& [index, value] : local) x(index) = value;
        if (!part.Contains(x, kMembershipTol)) {
          throw InvalidArgument("clamped block is infeasible for its part");
        }
      } else {
        parts.push_back(Restrict(part, local));
      }
    }
    return Product(std::move(parts));
  }
  // Overlays are flattened in FixedOverlay, so the base is never one here.
  throw InvalidArgument("cannot restrict an overlay set");
}

FeasibleSet::Kind FeasibleSet::kind() const {
  return static_cast<Kind>(rep_->data.index());
}

Index FeasibleSet::dimension() const {
  return std::visit(
      [](const auto& d) -> Index {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, BoxData>) {
          return d.lower.size();
        } else if constexpr (std::is_same_v<T, OrthantData> ||
                             std::is_same_v<T, SimplexData> ||
                             std::is_same_v<T, OverlayData>) {
          return d.dim;
        } else if constexpr (std::is_same_v<T, PolyhedronData>) {
          return d.B.cols();
        } else {
          return d.offsets.back() + d.parts.back().dimension();
        }
      },
      rep_->data);
}

Point FeasibleSet::Project(const Point& x) const {
  RequireDimension("projection point", dimension(), x.size());
  return std::visit(
      [&x](const auto& d) -> Point {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, BoxData>) {
          return x.cwiseMax(d.lower).cwiseMin(d.upper);
        } else if constexpr (std::is_same_v<T, OrthantData>) {
          return x.cwiseMax(0.0);
        } else if constexpr (std::is_same_v<T, SimplexData>) {
          return ProjectSimplex(x, d.radius);
        } else if constexpr (std::is_same_v<T, PolyhedronData>) {
          return Dykstra(d.B, d.pinv, d.b, d.nonnegative, x, kDykstraTol, 10000);
        } else if constexpr (std::is_same_v<T, ProductData>) {
          Point out(x.size());
          for (std::size_t p = 0; p < d.parts.size(); ++p) {
            const Index len = d.parts[p].dimension();
            out.segment(d.offsets[p], len) =
                d.parts[p].Project(x.segment(d.offsets[p], len));
          }
          return out;
        } else {
          Point out(x.size());
          for (const auto& [index, value] : d.fixed) out(index) = value;
          if (d.reduced) {
            Point sub(static_cast<Index>(d.free.size()));
            for (std::size_t i = 0; i < d.free.size(); ++i) sub(i) = x(d.free[i]);
            const Point proj = d.reduced->Project(sub);
            for (std::size_t i = 0; i < d.free.size(); ++i) {
              out(d.free[i]) = proj(i);
            }
          }
          return out;
        }
      },
      rep_->data);
}

Point FeasibleSet::Sample(std::mt19937_64& rng, double scale) const {
  return std::visit(
      [&](const auto& d) -> Point {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, BoxData>) {
          Point x(d.lower.size());
          for (Index i = 0; i < x.size(); ++i) {
            x(i) = SampleInterval(rng, d.lower(i), d.upper(i), scale);
          }
          return x;
        } else if constexpr (std::is_same_v<T, OrthantData>) {
          std::uniform_real_distribution<double> u(0.0, scale);
          Point x(d.dim);
          for (Index i = 0; i < d.dim; ++i) x(i) = u(rng);
          return x;
        } else if constexpr (std::is_same_v<T, SimplexData>) {
          std::exponential_distribution<double> e(1.0);
          Point x(d.dim);
          for (Index i = 0; i < d.dim; ++i) x(i) = e(rng);
          return ProjectSimplex(x * (d.radius / x.sum()), d.radius);
        } else if constexpr (std::is_same_v<T, PolyhedronData>) {
          const double lo = d.nonnegative ? 0.0 : -scale;
          std::uniform_real_distribution<double> u(lo, scale);
          Point x(d.B.cols());
          for (Index i = 0; i < x.size(); ++i) x(i) = u(rng);
          return Dykstra(d.B, d.pinv, d.b, d.nonnegative, x, kDykstraTol, 10000);
        } else if constexpr (std::is_same_v<T, ProductData>) {
          Point x(dimension());
          for (std::size_t p = 0; p < d.parts.size(); ++p) {
            x.segment(d.offsets[p], d.parts[p].dimension()) =
                d.parts[p].Sample(rng, scale);
          }
          return x;
        } else {
          Point x(d.dim);
          for (const auto& [index, value] : d.fixed) x(index) = value;
          if (d.reduced) {
            const Point sub = d.reduced->Sample(rng, scale);
            for (std::size_t i = 0; i < d.free.size(); ++i) x(d.free[i]) = sub(i);
          }
          return x;
        }
      },
      rep_->data);
}

const FeasibleSet::BoxData* FeasibleSet::box() const {
  return std::get_if<BoxData>(&rep_->data);
}
const FeasibleSet::OrthantData* FeasibleSet::orthant() const {
  return std::get_if<OrthantData>(&rep_->data);
}
const FeasibleSet::SimplexData* FeasibleSet::simplex() const {
  return std::get_if<SimplexData>(&rep_->data);
}
const FeasibleSet::PolyhedronData* FeasibleSet::polyhedron() const {
  return std::get_if<PolyhedronData>(&rep_->data);
}
const FeasibleSet::ProductData* FeasibleSet::product() const {
  return std::get_if<ProductData>(&rep_->data);
}
const FeasibleSet::OverlayData* FeasibleSet::overlay() const {
  return std::get_if<OverlayData>(&rep_->data);
}

}  // namespace cvi
