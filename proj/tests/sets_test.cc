#include "cvi/sets.h"

#include <gtest/gtest.h>

#include <random>

#include "cvi/models.h"
#include "oracles.h"

namespace cvi {
namespace {

Point Vec(std::initializer_list<double> v) {
  Point p(static_cast<Index>(v.size()));
  Index i = 0;
  for (double x : v) p(i++) = x;
  return p;
}

Point BraessRhs() { return Vec({6, 0, 0, -6}); }

std::vector<FeasibleSet> AllVariants() {
  const FeasibleSet box = FeasibleSet::Box(Vec({-1, 0, 2}), Vec({1, 3, 2.5}));
  const FeasibleSet orthant = FeasibleSet::NonnegativeOrthant(4);
  const FeasibleSet simplex = FeasibleSet::Simplex(2.0, 4);
  const FeasibleSet braess =
      FeasibleSet::Polyhedron(BraessIncidence(), BraessRhs(), true);
  const FeasibleSet product = FeasibleSet::Product({box, simplex});
  const FeasibleSet overlay = FeasibleSet::FixedOverlay(braess, {{2, 0.0}});
  return {box, orthant, simplex, braess, product, overlay};
}

TEST(ProjectTest, OrthantClampsNegativeEntries) {
  const auto K = FeasibleSet::NonnegativeOrthant(2);
  EXPECT_TRUE(K.Project(Vec({-1, 2})).isApprox(Vec({0, 2})));
}

TEST(ProjectTest, SimplexCorner) {
  const auto K = FeasibleSet::Simplex(1.0, 2);
  const Point p = K.Project(Vec({2, 0}));
  EXPECT_NEAR(p(0), 1.0, 1e-15);
  EXPECT_NEAR(p(1), 0.0, 1e-15);
}

TEST(ProjectTest, SimplexMatchesBisectionOracle) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> normal(0.0, 3.0);
  for (int trial = 0; trial < 200; ++trial) {
    Point x(6);
    for (Index i = 0; i < 6; ++i) x(i) = normal(rng);
    // Ties exercise the tie-stable threshold.
    if (trial % 5 == 0) x(1) = x(0);
    const Point p = FeasibleSet::Simplex(1.5, 6).Project(x);
    EXPECT_LT((p - testing::SimplexBisectionOracle(x, 1.5)).norm(), 1e-9);
  }
}

TEST(ProjectTest, SegmentMidpoint) {
  Matrix B(1, 2);
  B << 1, 1;
  const auto K = FeasibleSet::Polyhedron(B, Vec({1}), true);
  EXPECT_TRUE(K.Project(Vec({0, 0})).isApprox(Vec({0.5, 0.5}), 1e-10));
}

TEST(ProjectTest, BoxClamps) {
  const auto K = FeasibleSet::Box(Vec({-1, -1}), Vec({1, 1}));
  EXPECT_TRUE(K.Project(Vec({3, -0.5})).isApprox(Vec({1, -0.5})));
}

TEST(ProjectTest, DimensionMismatchThrows) {
  EXPECT_THROW(FeasibleSet::NonnegativeOrthant(3).Project(Vec({1, 2})),
               DimensionMismatch);
}

TEST(DykstraTest, FeasibleBraessPointIsFixed) {
  const Point x = Vec({3, 3, 0, 3, 3});
  const Point p =
      ProjectPolyhedronDykstra(BraessIncidence(), BraessRhs(), true, x);
  EXPECT_LT((p - x).norm(), 1e-12);
}

TEST(DykstraTest, PointOnAffineSetAndNonnegativeIsUnchanged) {
  const Point x = Vec({4, 2, 2, 2, 4});
  EXPECT_LT((ProjectPolyhedronDykstra(BraessIncidence(), BraessRhs(), true, x) -
             x)
                .norm(),
            1e-12);
}

TEST(DykstraTest, MatchesActiveSetOracle) {
  const Point z = Vec({10, 0, 0, 0, 0});
  const Point p =
      ProjectPolyhedronDykstra(BraessIncidence(), BraessRhs(), true, z);
  const Point oracle =
      testing::PolyhedronQpOracle(BraessIncidence(), BraessRhs(), z);
  // Oracle value, frozen: (6, 0, 2, 4, 2).
  EXPECT_LT((oracle - Vec({6, 0, 2, 4, 2})).norm(), 1e-12);
  EXPECT_LT((p - oracle).norm(), 1e-8);
  EXPECT_LE((BraessIncidence() * p - BraessRhs()).lpNorm<Eigen::Infinity>(),
            1e-9);
  EXPECT_GE(p.minCoeff(), -1e-9);
}

TEST(DykstraTest, IterationLimitReportsLastIterate) {
  try {
    ProjectPolyhedronDykstra(BraessIncidence(), BraessRhs(), true,
                             Vec({10, -5, 3, -2, 7}), 1e-14, 1);
    FAIL() << "expected NonConvergence";
  } catch (const NonConvergence& e) {
    EXPECT_EQ(e.last_iterate().size(), 5);
    EXPECT_GE(e.distance(), 0.0);
  }
}

TEST(FeasibleSetTest, EmptyPolyhedronRejected) {
  Matrix B(1, 2);
  B << 1, 1;
  EXPECT_THROW(FeasibleSet::Polyhedron(B, Vec({-1}), true), InvalidArgument);
  Matrix C(2, 2);
  C << 1, 1, 1, 1;
  EXPECT_THROW(FeasibleSet::Polyhedron(C, Vec({1, 2}), false), InvalidArgument);
}

TEST(FeasibleSetTest, BoxOrderValidated) {
  EXPECT_THROW(FeasibleSet::Box(Vec({1}), Vec({0})), InvalidArgument);
}

TEST(FeasibleSetTest, OverlayRejectsOutOfBoundsAndConflicts) {
  const auto box = FeasibleSet::Box(Vec({0, 0}), Vec({1, 1}));
  EXPECT_THROW(FeasibleSet::FixedOverlay(box, {{0, 2.0}}), InvalidArgument);
  EXPECT_THROW(FeasibleSet::FixedOverlay(box, {{0, 0.5}, {0, 0.25}}),
               InvalidArgument);
  const auto once = FeasibleSet::FixedOverlay(box, {{0, 0.5}});
  EXPECT_THROW(FeasibleSet::FixedOverlay(once, {{0, 0.75}}), InvalidArgument);
}

TEST(FeasibleSetTest, OverlayFixesClampedCoordinates) {
  const auto braess =
      FeasibleSet::Polyhedron(BraessIncidence(), BraessRhs(), true);
  const auto K = FeasibleSet::FixedOverlay(braess, {{2, 0.0}});
  std::mt19937_64 rng(11);
  std::normal_distribution<double> normal(3.0, 4.0);
  for (int t = 0; t < 50; ++t) {
    Point x(5);
    for (Index i = 0; i < 5; ++i) x(i) = normal(rng);
    const Point p = K.Project(x);
    EXPECT_EQ(p(2), 0.0);
    EXPECT_LE((BraessIncidence() * p - BraessRhs()).lpNorm<Eigen::Infinity>(),
              1e-9);
    // Free coordinates solve the sliced problem: compare with the oracle on
    // the polyhedron with x23 forced to zero (its column dropped).
    Matrix Bs(4, 4);
    Bs << BraessIncidence().col(0), BraessIncidence().col(1),
        BraessIncidence().col(3), BraessIncidence().col(4);
    const Point zs = (Point(4) << x(0), x(1), x(3), x(4)).finished();
    const Point oracle = testing::PolyhedronQpOracle(Bs, BraessRhs(), zs);
    const Point got = (Point(4) << p(0), p(1), p(3), p(4)).finished();
    EXPECT_LT((got - oracle).norm(), 1e-7);
  }
}

TEST(FeasibleSetTest, ProductIsConcatenationOfParts) {
  const auto box = FeasibleSet::Box(Vec({-1, 0, 2}), Vec({1, 3, 2.5}));
  const auto simplex = FeasibleSet::Simplex(2.0, 4);
  const auto K = FeasibleSet::Product({box, simplex});
  std::mt19937_64 rng(5);
  std::normal_distribution<double> normal(0.0, 5.0);
  for (int t = 0; t < 100; ++t) {
    Point x(7);
    for (Index i = 0; i < 7; ++i) x(i) = normal(rng);
    const Point p = K.Project(x);
    const Point head = box.Project(x.head(3));
    const Point tail = simplex.Project(x.tail(4));
    for (Index i = 0; i < 3; ++i) EXPECT_EQ(p(i), head(i));
    for (Index i = 0; i < 4; ++i) EXPECT_EQ(p(3 + i), tail(i));
  }
}

TEST(FeasibleSetTest, OverlayOnProductAndSimplex) {
  const auto simplex = FeasibleSet::Simplex(2.0, 3);
  const auto K = FeasibleSet::FixedOverlay(simplex, {{1, 0.5}});
  const Point p = K.Project(Vec({3, 9, 0}));
  EXPECT_EQ(p(1), 0.5);
  EXPECT_NEAR(p.sum(), 2.0, 1e-12);
  EXPECT_NEAR(p(0), 1.5, 1e-12);
  EXPECT_THROW(FeasibleSet::FixedOverlay(simplex, {{0, 2.5}}), InvalidArgument);

  const auto prod = FeasibleSet::Product(
      {FeasibleSet::NonnegativeOrthant(2), FeasibleSet::Box(Vec({0}), Vec({1}))});
  const auto clamped = FeasibleSet::FixedOverlay(prod, {{2, 1.0}, {0, 3.0}});
  const Point q = clamped.Project(Vec({-4, -1, 0}));
  EXPECT_TRUE(q.isApprox(Vec({3, 0, 1})));
}

// Randomized projection properties, shared by every set variant.
class ProjectionPropertyTest : public ::testing::TestWithParam<int> {};

TEST_P(ProjectionPropertyTest, NonexpansiveIdempotentVariational) {
  const FeasibleSet K = AllVariants()[GetParam()];
  const Index n = K.dimension();
  std::mt19937_64 rng(100 + GetParam());
  std::normal_distribution<double> normal(1.0, 6.0);
  auto draw = [&] {
    Point x(n);
    for (Index i = 0; i < n; ++i) x(i) = normal(rng);
    return x;
  };
  for (int t = 0; t < 1000; ++t) {
    const Point x = draw();
    const Point y = draw();
    const Point px = K.Project(x);
    const Point py = K.Project(y);
    EXPECT_LE((px - py).norm(), (x - y).norm() + 1e-9);
    EXPECT_LE((K.Project(px) - px).norm(), 1e-9);
    const Point feasible = K.Sample(rng);
    EXPECT_LE((x - px).dot(feasible - px), 1e-9 * (1.0 + (x - px).norm()));
  }
}

INSTANTIATE_TEST_SUITE_P(AllVariants, ProjectionPropertyTest,
                         ::testing::Range(0, 6));

TEST(FeasibleSetTest, SamplesAreFeasible) {
  std::mt19937_64 rng(9);
  for (const auto& K : AllVariants()) {
    for (int t = 0; t < 20; ++t) {
      EXPECT_TRUE(K.Contains(K.Sample(rng), 1e-9));
    }
  }
}

}  // namespace
}  // namespace cvi
