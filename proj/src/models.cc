#include "cvi/models.h"

#include <cmath>
#include <string>

namespace cvi {
namespace {

std::vector<std::string> EconomyLabels(const EconomySpec& spec) {
  const bool wide = spec.m > 9 || spec.n > 9 || spec.o > 9;
  const std::string sep = wide ? "_" : "";
  std::vector<std::string> labels;
  for (const char* block : {"Q", "q", "pi"}) {
    for (Index i = 0; i < spec.m; ++i) {
      for (Index j = 0; j < spec.n; ++j) {
        for (Index k = 0; k < spec.o; ++k) {
          labels.push_back(std::string(block) + sep + std::to_string(i + 1) +
                           sep + std::to_string(j + 1) + sep +
                           std::to_string(k + 1));
        }
      }
    }
  }
  return labels;
}

void RequireTable(const char* name, Index expected, Index actual) {
  if (expected != actual) {
    throw InvalidArgument(std::string("economy table ") + name + " has " +
                          std::to_string(actual) + " entries, expected " +
                          std::to_string(expected));
  }
}

}  // namespace

Matrix BraessIncidence() {
  Matrix B(4, 5);
  // clang-format off
  B <<  1,  1,  0,  0,  0,
       -1,  0,  1,  1,  0,
        0, -1, -1,  0,  1,
        0,  0,  0, -1, -1;
  // clang-format on
  return B;
}

Problem BuildBraess(const BraessSpec& spec) {
  RequireDimension("Braess slopes", 5, spec.slopes.size());
  RequireDimension("Braess constants", 5, spec.constants.size());
  if ((spec.slopes.array() < 0.0).any()) {
    throw InvalidArgument("Braess slopes must be nonnegative");
  }
  if (!(spec.demand >= 0.0) || !std::isfinite(spec.demand)) {
    throw InvalidArgument("Braess demand must be nonnegative");
  }
  Point b(4);
  b << spec.demand, 0.0, 0.0, -spec.demand;
  return Problem(Mapping::Affine(spec.slopes.asDiagonal(), spec.constants),
                 FeasibleSet::Polyhedron(BraessIncidence(), b, true),
                 {"x12", "x13", "x23", "x24", "x34"});
}

std::array<double, 3> PathDelays(const Problem& problem, const Point& x) {
  RequireDimension("Braess flow", 5, problem.dimension());
  const Point F = problem.mapping().Evaluate(x);
  using namespace braess;
  return {F(kEdge12) + F(kEdge24), F(kEdge12) + F(kEdge23) + F(kEdge34),
          F(kEdge13) + F(kEdge34)};
}

EconomySpec PaperEconomySpec() {
  EconomySpec spec;
  spec.m = 2;
  spec.n = 1;
  spec.o = 1;
  spec.prod_quad = (Point(2) << 1.0, 2.0).finished();
  spec.prod_lin = (Point(2) << 1.0, 1.0).finished();
  spec.demand_const = (Point(2) << 100.0, 200.0).finished();
  spec.demand_Q = (Matrix(2, 2) << -1.0, -0.5, -0.5, -1.0).finished();
  spec.demand_q = (Matrix(2, 2) << 0.5, 0.0, 0.0, 0.5).finished();
  spec.transport_weight = (Point(2) << 1.0, 1.0).finished();
  spec.transport_target = (Point(2) << 20.0, 10.0).finished();
  spec.opportunity_weight = (Point(2) << 1.0, 1.0).finished();
  return spec;
}

Problem BuildEconomy(const EconomySpec& spec) {
  if (spec.m <= 0 || spec.n <= 0 || spec.o <= 0) {
    throw InvalidArgument("economy counts m, n, o must be positive");
  }
  const Index t = spec.triples();
  RequireTable("prod_quad", t, spec.prod_quad.size());
  RequireTable("prod_lin", t, spec.prod_lin.size());
  RequireTable("demand_const", t, spec.demand_const.size());
  RequireTable("demand_Q rows", t, spec.demand_Q.rows());
  RequireTable("demand_Q cols", t, spec.demand_Q.cols());
  RequireTable("demand_q rows", t, spec.demand_q.rows());
  RequireTable("demand_q cols", t, spec.demand_q.cols());
  RequireTable("transport_weight", t, spec.transport_weight.size());
  RequireTable("transport_target", t, spec.transport_target.size());
  RequireTable("opportunity_weight", t, spec.opportunity_weight.size());
  for (double s : spec.noise_stddev) {
    if (!(s >= 0.0)) throw InvalidArgument("noise stddev must be >= 0");
  }

  const Index nvars = 3 * t;
  const Index provider_stride = spec.n * spec.o;

  Matrix M1 = Matrix::Zero(t, nvars);
  Point c1 = spec.prod_lin - spec.demand_const;
  for (Index r = 0; r < t; ++r) {
    M1(r, r) += 2.0 * spec.prod_quad(r);
    for (Index s = 0; s < t; ++s) {
      M1(r, s) -= spec.demand_Q(r, s);
      M1(r, t + s) -= spec.demand_q(r, s);
      // Marginal revenue: provider i's own prices respond to its quantities.
      if (r / provider_stride == s / provider_stride) {
        M1(r, s) -= spec.demand_Q(s, r);
      }
    }
    M1(r, 2 * t + r) += 1.0;
  }

  Matrix M2 = Matrix::Zero(t, nvars);
  M2.block(0, t, t, t) = spec.transport_weight.asDiagonal();
  Point c2 = -spec.transport_weight.cwiseProduct(spec.transport_target);

  Matrix M3 = Matrix::Zero(t, nvars);
  M3.block(0, 0, t, t) = -Matrix::Identity(t, t);
  M3.block(0, 2 * t, t, t) = (2.0 * spec.opportunity_weight).asDiagonal();
  Point c3 = Point::Zero(t);

  std::vector<Mapping> blocks{Mapping::Affine(std::move(M1), std::move(c1)),
                              Mapping::Affine(std::move(M2), std::move(c2)),
                              Mapping::Affine(std::move(M3), std::move(c3))};
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    if (spec.noise_stddev[i] > 0.0) {
      blocks[i] = Mapping::Stochastic(
          blocks[i], NoiseModel::Gaussian(t, spec.noise_stddev[i],
                                          spec.noise_seed + i));
    }
  }
  return Problem(Mapping::Partitioned(std::move(blocks)),
                 FeasibleSet::Product({FeasibleSet::NonnegativeOrthant(t),
                                       FeasibleSet::NonnegativeOrthant(t),
                                       FeasibleSet::NonnegativeOrthant(t)}),
                 EconomyLabels(spec));
}

Problem BuildLcp(const Matrix& M, const Point& q) {
  if (M.rows() != M.cols()) throw InvalidArgument("LCP matrix must be square");
  RequireDimension("LCP vector", M.rows(), q.size());
  return Problem(Mapping::Affine(M, q),
                 FeasibleSet::NonnegativeOrthant(M.rows()));
}

Problem BuildSaddle(const Matrix& A, const Point& lower, const Point& upper) {
  const Index p = A.rows();
  const Index q = A.cols();
  RequireDimension("saddle bounds", p + q, lower.size());
  Matrix M = Matrix::Zero(p + q, p + q);
  M.topRightCorner(p, q) = A;
  M.bottomLeftCorner(q, p) = -A.transpose();
  return Problem(Mapping::Affine(std::move(M), Point::Zero(p + q)),
                 FeasibleSet::Box(lower, upper));
}

}  // namespace cvi
