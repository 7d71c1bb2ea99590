// Acceptance gate: one PASS/FAIL line per criterion, with wall time.
// Exit status is nonzero if any criterion fails.

#include <Eigen/Eigenvalues>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "cvi/causal.h"
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

// Collects failed checks for one criterion.
class Checker {
 public:
  void Expect(bool ok, const std::string& what) {
    if (!ok && failures_.size() < 5) failures_.push_back(what);
    if (!ok) ++count_;
  }
  void Note(const std::string& text) { notes_.push_back(text); }
  bool ok() const { return count_ == 0; }
  const std::vector<std::string>& failures() const { return failures_; }
  const std::vector<std::string>& notes() const { return notes_; }
  int count() const { return count_; }

 private:
  std::vector<std::string> failures_;
  std::vector<std::string> notes_;
  int count_ = 0;
};

std::string Str(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3e", v);
  return buf;
}

// Edge delays written out from the network: slope * flow + constant.
std::array<double, 3> BraessPathDelays(const Point& x) {
  const double e12 = 10 * x(0), e13 = x(1) + 50, e23 = x(2) + 10,
               e24 = x(3) + 50, e34 = 10 * x(4);
  return {e12 + e24, e12 + e23 + e34, e13 + e34};
}

SolverConfig Config(Algorithm a, double tol = 1e-10, int max_iter = 200000) {
  SolverConfig config;
  config.algorithm = a;
  config.options.tol = tol;
  config.options.max_iter = max_iter;
  return config;
}

constexpr Algorithm kAll[] = {Algorithm::kProjection, Algorithm::kExtragradient,
                              Algorithm::kIncremental};

void BraessUntreated(Checker& c) {
  const Problem braess = BuildBraess();
  const Point want = Vec({4, 2, 2, 2, 4});
  for (Algorithm a : kAll) {
    const SolveResult r = Solve(braess, Config(a));
    const double err = (r.point - want).lpNorm<Eigen::Infinity>();
    c.Expect(r.converged && err <= 1e-4,
             ToString(a) + ": distance " + Str(err));
    for (double d : BraessPathDelays(r.point)) {
      c.Expect(std::abs(d - 92) <= 1e-3, ToString(a) + ": delay " + Str(d));
    }
  }
}

void BraessIntervened(Checker& c) {
  const Problem braess = BuildBraess();
  const Problem closed =
      Apply(braess, ClampVariable{braess::kEdge23, 0.0}).intervened_problem;
  const Point want = Vec({3, 3, 0, 3, 3});
  double untreated = 0.0;
  for (Algorithm a : kAll) {
    const SolveResult r = Solve(closed, Config(a));
    const double err = (r.point - want).lpNorm<Eigen::Infinity>();
    c.Expect(r.converged && err <= 1e-4,
             ToString(a) + ": distance " + Str(err));
    const auto d = BraessPathDelays(r.point);
    c.Expect(std::abs(d[0] - 83) <= 1e-3 && std::abs(d[2] - 83) <= 1e-3,
             ToString(a) + ": used-path delay " + Str(d[0]));
  }
  untreated = BraessPathDelays(Solve(braess, Config(Algorithm::kProjection)).point)[0];
  c.Expect(83 < untreated, "paradox: 83 vs " + Str(untreated));
}

void EconomyInstance(Checker& c) {
  const Problem economy = BuildEconomy(PaperEconomySpec());
  const Matrix J = economy.mapping().Jacobian(Point::Zero(6));
  const Matrix printed = testing::PrintedEconomyJacobian();
  c.Expect(J == printed, "Jacobian differs from the printed matrix by " +
                             Str((J - printed).cwiseAbs().maxCoeff()));
  const PropertyReport props =
      CheckProperties(economy.mapping(), economy.set(), 100, 1);
  c.Expect(!props.symmetric, "reported symmetric");
  c.Expect(props.positive_definite, "not reported positive definite");

  const Point oracle = testing::EconomyLinearOracle(testing::PrintedEconomyConstant());
  c.Expect(oracle.minCoeff() > 0, "oracle point leaves the orthant");
  for (Algorithm a : {Algorithm::kProjection, Algorithm::kExtragradient}) {
    const SolveResult r = Solve(economy, Config(a));
    const double err = (r.point - oracle).norm();
    c.Expect(r.converged && err <= 1e-6, ToString(a) + ": distance " + Str(err));
  }
}

struct Trial {
  Matrix M;
  Point c;
  std::vector<ShiftConstant> shifts;
  Index split;  // partitioned trials split the rows here; 0 otherwise
};

Trial RandomTrial(std::mt19937_64& rng, bool partitioned) {
  std::normal_distribution<double> normal;
  const Index n = std::uniform_int_distribution<int>(2, 6)(rng);
  Matrix A(n, n), S(n, n);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < n; ++j) {
      A(i, j) = normal(rng);
      S(i, j) = normal(rng);
    }
  }
  Trial t;
  t.M = A * A.transpose() / static_cast<double>(n) +
        0.05 * Matrix::Identity(n, n) + (S - S.transpose());
  t.c = Point(n);
  for (Index i = 0; i < n; ++i) t.c(i) = 3.0 * normal(rng);
  std::uniform_int_distribution<Index> coord(0, n - 1);
  const int shifts = std::uniform_int_distribution<int>(1, 2)(rng);
  for (int s = 0; s < shifts; ++s) {
    t.shifts.push_back({coord(rng), 2.0 * normal(rng)});
  }
  t.split = partitioned ? std::max<Index>(1, n / 2) : 0;
  return t;
}

Problem TrialProblem(const Trial& t) {
  const Index n = t.c.size();
  if (t.split == 0) {
    return Problem(Mapping::Affine(t.M, t.c), FeasibleSet::NonnegativeOrthant(n));
  }
  const Index k = t.split;
  return Problem(
      Mapping::Partitioned({Mapping::Affine(t.M.topRows(k), t.c.head(k)),
                            Mapping::Affine(t.M.bottomRows(n - k), t.c.tail(n - k))}),
      FeasibleSet::Product({FeasibleSet::NonnegativeOrthant(k),
                            FeasibleSet::NonnegativeOrthant(n - k)}));
}

std::vector<Intervention> TrialInterventions(const Trial& t) {
  return {t.shifts.begin(), t.shifts.end()};
}

// Independent solve: the unique LCP solution of a strongly monotone map.
Point LcpOracle(const Matrix& M, const Point& c) {
  const auto all = testing::LcpSignPatternOracle(M, c);
  return all.size() == 1 ? all.front() : Point();
}

void SensitivityBound(Checker& c) {
  std::mt19937_64 rng(4242);
  int trials = 0;
  for (int t = 0; t < 250; ++t) {
    const Trial trial = RandomTrial(rng, t % 2 == 1);
    Point c1 = trial.c;
    for (const auto& s : trial.shifts) c1(s.coordinate_index) += s.delta;
    const Point x0 = LcpOracle(trial.M, trial.c);
    const Point x1 = LcpOracle(trial.M, c1);
    c.Expect(x0.size() > 0 && x1.size() > 0, "oracle found no unique solution");
    if (x0.size() == 0 || x1.size() == 0) continue;

    const double mu = Eigen::SelfAdjointEigenSolver<Matrix>(
                          0.5 * (trial.M + trial.M.transpose()))
                          .eigenvalues()
                          .minCoeff();
    const double effect = (x1 - x0).norm();
    const double bound = (c1 - trial.c).norm() / mu;
    c.Expect(effect <= bound + kBoundSlack,
             "trial " + std::to_string(t) + ": oracle " + Str(effect) + " > " +
                 Str(bound));

    const auto report = TreatmentEffect(TrialProblem(trial),
                                        TrialInterventions(trial),
                                        Config(Algorithm::kProjection, 1e-11));
    c.Expect(report.mu_certified && std::abs(report.mu_used - mu) <= 1e-9,
             "trial " + std::to_string(t) + ": mu " + Str(report.mu_used));
    c.Expect(report.bound_satisfied,
             "trial " + std::to_string(t) + ": report bound not satisfied");
    c.Expect((report.x0 - x0).norm() <= 1e-6 && (report.x1 - x1).norm() <= 1e-6,
             "trial " + std::to_string(t) + ": solver disagrees with oracle");
    ++trials;
  }
  c.Expect(trials >= 200, "only " + std::to_string(trials) + " trials");
  c.Note(std::to_string(trials) + " trials");
}

void DirectionalAndLocalization(Checker& c) {
  std::mt19937_64 rng(4242);
  int trials = 0;
  for (int t = 0; t < 250; ++t) {
    const Trial trial = RandomTrial(rng, t % 2 == 1);
    if (trial.split == 0) continue;
    const Problem problem = TrialProblem(trial);
    const auto loc = LocalizeEffects(problem, TrialInterventions(trial),
                                     Config(Algorithm::kProjection, 1e-11));
    const auto& r = loc.effect;
    const std::string id = "trial " + std::to_string(t);
    c.Expect(r.directional.cross_solution <= 1e-9,
             id + ": cross product " + Str(r.directional.cross_solution));
    c.Expect(r.directional.treated_shift <= 1e-9,
             id + ": shift product " + Str(r.directional.treated_shift));
    if (r.effect_norm > kEffectThreshold) {
      c.Expect(r.directional.treated_shift < 0, id + ": shift product not strict");
    }
    // Inner product recomputed from the shifts: F1 - F0 is the constant shift.
    Point shift = Point::Zero(trial.c.size());
    for (const auto& s : trial.shifts) shift(s.coordinate_index) += s.delta;
    const double global = shift.dot(r.x1 - r.x0);
    double sum = 0.0;
    for (const auto& e : loc.ranked) sum += e.contribution;
    c.Expect(std::abs(sum - global) <= 1e-10,
             id + ": decomposition off by " + Str(std::abs(sum - global)));
    bool touched[2] = {false, false};
    for (const auto& s : trial.shifts) touched[s.coordinate_index >= trial.split] = true;
    for (const auto& e : loc.ranked) {
      if (!touched[e.component]) {
        c.Expect(e.contribution == 0.0, id + ": untouched component nonzero");
      }
    }
    ++trials;
  }
  c.Note(std::to_string(trials) + " partitioned trials");
}

void IncrementalMethod(Checker& c) {
  EconomySpec spec = PaperEconomySpec();
  spec.noise_stddev = {0.1, 0.1, 0.1};
  spec.noise_seed = 7;
  const Problem noisy = BuildEconomy(spec);
  const Point oracle = testing::EconomyLinearOracle(testing::PrintedEconomyConstant());

  SolverOptions options;
  options.tol = 1e-300;  // run the full budget
  options.max_iter = 200000;
  options.check_interval = 1000;
  const auto run = [&](const StepSchedule& schedule) {
    schedule.ValidateStochastic();
    return SolveIncremental(noisy, schedule, ConstraintSampler::Uniform(3, 7),
                            options, 7);
  };
  const SolveResult r = run(StepSchedule::Polynomial(10.0, 100.0, 1.0));
  const double err = (r.point - oracle).norm();
  c.Expect(err <= 1e-2, "noisy economy distance " + Str(err));
  c.Note("Polynomial(a=10, b=100): distance " + Str(err));
  const SolveResult small = run(StepSchedule::Polynomial(0.5, 10.0, 1.0));
  c.Note("Polynomial(a=0.5, b=10), informational: distance " +
         Str((small.point - oracle).norm()));

  const Problem clean = BuildEconomy(PaperEconomySpec());
  SolverOptions tight;
  tight.tol = 1e-10;
  tight.max_iter = 200000;
  const SolveResult inc = SolveIncremental(
      clean, StepSchedule::Polynomial(10.0, 100.0), ConstraintSampler::Uniform(3, 7),
      tight, 7);
  const SolveResult proj =
      SolveProjection(clean, DefaultStep(clean, false), tight);
  const double gap = (inc.point - proj.point).norm();
  c.Expect(inc.converged && proj.converged && gap <= 1e-6,
           "zero-noise run vs projection " + Str(gap));
}

void SkewSaddle(Checker& c) {
  const Problem saddle = BuildSaddle(Matrix::Identity(1, 1), Vec({-1, -1}),
                                     Vec({1, 1}));
  SolverOptions options;
  options.x0 = Vec({0.5, 0.5});
  options.max_iter = 10000;
  options.tol = 1e-6;
  const auto step = StepSchedule::Constant(0.1);
  const SolveResult eg = SolveExtragradient(saddle, step, options);
  c.Expect(eg.converged && eg.residual <= 1e-6 && eg.point.norm() <= 1e-5,
           "extragradient residual " + Str(eg.residual) + " at |x| " +
               Str(eg.point.norm()));
  options.tol = 1e-8;
  const SolveResult pr = SolveProjection(saddle, step, options);
  c.Expect(!pr.converged && pr.residual > 1e-8,
           "projection reached residual " + Str(pr.residual));
  c.Note("extragradient " + std::to_string(eg.iterations) +
         " iterations; projection residual after 1e4: " + Str(pr.residual));
}

void LcpEquivalence(Checker& c) {
  const Matrix M = (Matrix(2, 2) << 2, 1, 1, 2).finished();
  const Point q = Vec({-1, -1});
  const Problem lcp = BuildLcp(M, q);
  const Point want = Vec({1.0 / 3, 1.0 / 3});
  const auto oracle = testing::LcpSignPatternOracle(M, q);
  c.Expect(oracle.size() == 1 && (oracle[0] - want).norm() <= 1e-8,
           "sign-pattern oracle");
  for (Algorithm a : {Algorithm::kProjection, Algorithm::kExtragradient}) {
    const SolveResult r = Solve(lcp, Config(a, 1e-12));
    c.Expect((r.point - want).norm() <= 1e-8,
             ToString(a) + ": distance " + Str((r.point - want).norm()));
    const auto gap = ComplementarityGap(r.point, lcp.mapping());
    c.Expect(std::abs(gap.gap) <= 1e-9 && gap.solves_ncp,
             ToString(a) + ": gap " + Str(gap.gap));
  }
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<Point> points = {want, Vec({0.5, 0}), Vec({0, 0.5}), Vec({0, 0}),
                               want + Vec({1e-3, 0}), want + Vec({1e-9, -1e-9})};
  for (int t = 0; t < 500; ++t) points.push_back(Vec({u(rng), u(rng)}));
  int disagreements = 0;
  for (const Point& x : points) {
    const bool ncp = ComplementarityGap(x, lcp.mapping()).solves_ncp;
    const bool vi = NaturalResidual(x, lcp) <= kComplementarityTol;
    disagreements += ncp != vi;
  }
  c.Expect(disagreements == 0,
           std::to_string(disagreements) + " NCP/residual disagreements");
}

Point BraessRhs() { return Vec({6, 0, 0, -6}); }

void ProjectionSuite(Checker& c) {
  const FeasibleSet box = FeasibleSet::Box(Vec({-1, 0, 2}), Vec({1, 3, 2.5}));
  const FeasibleSet simplex = FeasibleSet::Simplex(2.0, 4);
  const FeasibleSet braess =
      FeasibleSet::Polyhedron(BraessIncidence(), BraessRhs(), true);
  const std::vector<std::pair<std::string, FeasibleSet>> variants = {
      {"box", box},
      {"orthant", FeasibleSet::NonnegativeOrthant(4)},
      {"simplex", simplex},
      {"polyhedron", braess},
      {"product", FeasibleSet::Product({box, simplex})},
      {"overlay", FeasibleSet::FixedOverlay(braess, {{2, 0.0}})}};
  std::mt19937_64 rng(9001);
  std::normal_distribution<double> normal(1.0, 6.0);
  for (const auto& [name, K] : variants) {
    const Index n = K.dimension();
    const auto draw = [&] {
      Point x(n);
      for (Index i = 0; i < n; ++i) x(i) = normal(rng);
      return x;
    };
    double worst_expansion = 0.0, worst_variational = 0.0;
    for (int t = 0; t < 1000; ++t) {
      const Point x = draw(), y = draw();
      const Point px = K.Project(x), py = K.Project(y);
      worst_expansion =
          std::max(worst_expansion, (px - py).norm() - (x - y).norm());
      const Point z = K.Project(draw());
      worst_variational = std::max(worst_variational, (x - px).dot(z - px));
    }
    c.Expect(worst_expansion <= 1e-9, name + ": expansion " + Str(worst_expansion));
    c.Expect(worst_variational <= 1e-9,
             name + ": variational " + Str(worst_variational));
  }
  double worst = 0.0;
  for (int t = 0; t < 100; ++t) {
    Point z(5);
    for (Index i = 0; i < 5; ++i) z(i) = normal(rng);
    const Point got = braess.Project(z);
    const Point want = testing::PolyhedronQpOracle(BraessIncidence(), BraessRhs(), z);
    worst = std::max(worst, (got - want).norm());
  }
  c.Expect(worst <= 1e-7, "Dykstra vs QP oracle " + Str(worst));
  c.Note("Dykstra vs QP oracle, worst " + Str(worst));
}

void CausalIrrelevance(Checker& c) {
  struct Model {
    std::string name;
    Problem problem;
    Algorithm algorithm;
  };
  const std::vector<Model> models = {
      {"braess", BuildBraess(), Algorithm::kProjection},
      {"economy", BuildEconomy(PaperEconomySpec()), Algorithm::kProjection},
      {"lcp", BuildLcp((Matrix(2, 2) << 2, 1, 1, 2).finished(), Vec({-1, -1})),
       Algorithm::kProjection},
      {"saddle", BuildSaddle(Matrix::Identity(1, 1), Vec({-1, -1}), Vec({1, 1})),
       Algorithm::kExtragradient}};
  for (const auto& m : models) {
    const Index comps = m.problem.mapping().num_components();
    const Index width = m.problem.mapping().ComponentRange(comps - 1).second;
    // Pairs whose mean mappings agree: zero shift vs zero-mean noise, and
    // two noise models that differ only in their seed.
    const std::vector<std::pair<Intervention, Intervention>> pairs = {
        {ShiftConstant{0, 0.0},
         SetNoise{comps - 1, NoiseModel::Gaussian(width, 0.7, 3)}},
        {SetNoise{comps - 1, NoiseModel::Gaussian(width, 0.4, 11)},
         SetNoise{comps - 1, NoiseModel::Gaussian(width, 0.4, 12)}},
        {ShiftConstant{0, 1.5}, ShiftConstant{0, 1.5}}};
    for (const auto& [a, b] : pairs) {
      const auto check = IrrelevanceCheck(m.problem, a, b, 50, 5);
      c.Expect(check.mappings_equal, m.name + ": mean mappings differ");
      const SolverConfig config = Config(m.algorithm, 1e-10);
      const SolveResult ra = Solve(Apply(m.problem, a).intervened_problem, config);
      const SolveResult rb = Solve(Apply(m.problem, b).intervened_problem, config);
      const double gap = (ra.point - rb.point).norm();
      c.Expect(ra.converged && rb.converged && gap <= 1e-6,
               m.name + ": solutions differ by " + Str(gap));
    }
  }
}

struct Criterion {
  int id;
  std::string title;
  double limit_seconds;  // 0 means no runtime limit
  std::function<void(Checker&)> run;
};

}  // namespace
}  // namespace cvi

int main() {
  using namespace cvi;
  const std::vector<Criterion> criteria = {
      {1, "Braess untreated equilibrium", 1.0, BraessUntreated},
      {2, "Braess do(x23 = 0) equilibrium", 1.0, BraessIntervened},
      {3, "economy Jacobian, properties and oracle solution", 1.0, EconomyInstance},
      {4, "sensitivity bound on random affine trials", 30.0, SensitivityBound},
      {5, "directional signs and localization", 0.0, DirectionalAndLocalization},
      {6, "incremental method on the noisy economy", 60.0, IncrementalMethod},
      {7, "extragradient vs projection on the skew saddle", 5.0, SkewSaddle},
      {8, "NCP/LCP equivalence", 0.0, LcpEquivalence},
      {9, "projection suite", 0.0, ProjectionSuite},
      {10, "causal irrelevance across built-in models", 0.0, CausalIrrelevance},
  };
  int failed = 0;
  double total = 0.0;
  for (const auto& crit : criteria) {
    Checker checker;
    const auto start = std::chrono::steady_clock::now();
    try {
      crit.run(checker);
    } catch (const std::exception& e) {
      checker.Expect(false, std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(
                            std::chrono::steady_clock::now() - start)
                            .count();
    total += secs;
    if (crit.limit_seconds > 0 && secs > crit.limit_seconds) {
      checker.Expect(false, "runtime " + Str(secs) + " s over limit");
    }
    std::printf("%s criterion %2d: %s (%.3f s)\n", checker.ok() ? "PASS" : "FAIL",
                crit.id, crit.title.c_str(), secs);
    for (const auto& n : checker.notes()) std::printf("    %s\n", n.c_str());
    for (const auto& f : checker.failures()) std::printf("    failed: %s\n", f.c_str());
    if (checker.count() > static_cast<int>(checker.failures().size())) {
      std::printf("    ... %d failed checks in total\n", checker.count());
    }
    failed += !checker.ok();
  }
  std::printf("%d of %zu criteria passed (%.3f s)\n",
              static_cast<int>(criteria.size()) - failed, criteria.size(), total);
  return failed == 0 ? 0 : 1;
}
