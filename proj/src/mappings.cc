#include "cvi/mappings.h"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>
#include <variant>

namespace cvi {

NoiseModel NoiseModel::Gaussian(Point stddev, std::uint64_t seed) {
  if ((stddev.array() < 0.0).any() || !stddev.allFinite()) {
    throw InvalidArgument("noise stddev must be finite and nonnegative");
  }
  NoiseModel noise;
  noise.mean = Point::Zero(stddev.size());
  noise.stddev = std::move(stddev);
  noise.seed = seed;
  return noise;
}

NoiseModel NoiseModel::Gaussian(Index n, double stddev, std::uint64_t seed) {
  return Gaussian(Point::Constant(n, stddev), seed);
}

namespace {

// SplitMix64 stream. Seeding a Mersenne twister per draw dominated the
// incremental solver's runtime; this keeps draws keyed by (seed, index).
struct SplitMix64 {
  using result_type = std::uint64_t;
  std::uint64_t state;
  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return ~result_type{0}; }
  result_type operator()() {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }
};

}  // namespace

Point NoiseModel::Draw(std::uint64_t draw_index) const {
  SplitMix64 mixer{seed};
  SplitMix64 rng{mixer() ^ draw_index};
  rng.state = rng();
  std::normal_distribution<double> normal(0.0, 1.0);
  Point eta(stddev.size());
  for (Index i = 0; i < eta.size(); ++i) {
    eta(i) = mean(i) + stddev(i) * normal(rng);
  }
  return eta;
}

struct Mapping::Rep {
  std::variant<AffineData, PartitionedData, StochasticData, CallableData> data;
};

Mapping::Mapping(std::shared_ptr<const Rep> rep) : rep_(std::move(rep)) {}

Mapping Mapping::Affine(Matrix M, Point c) {
  RequireDimension("affine constant", M.rows(), c.size());
  if (M.rows() == 0 || M.cols() == 0) {
    throw InvalidArgument("affine mapping must be non-empty");
  }
  if (!M.allFinite() || !c.allFinite()) {
    throw InvalidArgument("affine mapping data must be finite");
  }
  return Mapping(std::make_shared<const Rep>(
      Rep{AffineData{std::move(M), std::move(c)}}));
}

Mapping Mapping::Partitioned(std::vector<Mapping> components) {
  if (components.empty()) {
    throw InvalidArgument("partitioned mapping needs at least one component");
  }
  const Index n = components.front().input_dimension();
  std::vector<Index> offsets;
  Index offset = 0;
  for (const auto& component : components) {
    RequireDimension("component input", n, component.input_dimension());
    offsets.push_back(offset);
    offset += component.output_dimension();
  }
  return Mapping(std::make_shared<const Rep>(
      Rep{PartitionedData{std::move(components), std::move(offsets)}}));
}

Mapping Mapping::Stochastic(Mapping base, NoiseModel noise) {
  RequireDimension("noise model", base.output_dimension(), noise.dimension());
  RequireDimension("noise mean", noise.stddev.size(), noise.mean.size());
  return Mapping(std::make_shared<const Rep>(Rep{StochasticData{
      std::make_shared<const Mapping>(std::move(base)), std::move(noise)}}));
}

Mapping Mapping::Callable(Index input_dim, Index output_dim, Evaluator f) {
  if (input_dim <= 0 || output_dim <= 0) {
    throw InvalidArgument("callable mapping dimensions must be positive");
  }
  if (!f) throw InvalidArgument("callable mapping needs an evaluator");
  return Mapping(std::make_shared<const Rep>(
      Rep{CallableData{input_dim, output_dim, std::move(f)}}));
}

Mapping::Kind Mapping::kind() const {
  return static_cast<Kind>(rep_->data.index());
}

Index Mapping::input_dimension() const {
  return std::visit(
      [](const auto& d) -> Index {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, AffineData>) {
          return d.M.cols();
        } else if constexpr (std::is_same_v<T, PartitionedData>) {
          return d.components.front().input_dimension();
        } else if constexpr (std::is_same_v<T, StochasticData>) {
          return d.base->input_dimension();
        } else {
          return d.input_dim;
        }
      },
      rep_->data);
}

Index Mapping::output_dimension() const {
  return std::visit(
      [](const auto& d) -> Index {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, AffineData>) {
          return d.M.rows();
        } else if constexpr (std::is_same_v<T, PartitionedData>) {
          return d.offsets.back() + d.components.back().output_dimension();
        } else if constexpr (std::is_same_v<T, StochasticData>) {
          return d.base->output_dimension();
        } else {
          return d.output_dim;
        }
      },
      rep_->data);
}

Point Mapping::Evaluate(const Point& x) const {
  RequireDimension("mapping argument", input_dimension(), x.size());
  return std::visit(
      [&x, this](const auto& d) -> Point {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, AffineData>) {
          return d.M * x + d.c;
        } else if constexpr (std::is_same_v<T, PartitionedData>) {
          Point out(output_dimension());
          for (std::size_t i = 0; i < d.components.size(); ++i) {
            const auto& component = d.components[i];
            out.segment(d.offsets[i], component.output_dimension()) =
                component.Evaluate(x);
          }
          return out;
        } else if constexpr (std::is_same_v<T, StochasticData>) {
          return d.base->Evaluate(x) + d.noise.mean;
        } else {
          Point out = d.f(x);
          RequireDimension("callable mapping output", d.output_dim, out.size());
          return out;
        }
      },
      rep_->data);
}

Point Mapping::EvaluateSample(const Point& x, std::uint64_t draw_index) const {
  if (const auto* s = stochastic()) {
    return s->base->EvaluateSample(x, draw_index) + s->noise.Draw(draw_index);
  }
  if (const auto* p = partitioned()) {
    RequireDimension("mapping argument", input_dimension(), x.size());
    Point out(output_dimension());
    for (std::size_t i = 0; i < p->components.size(); ++i) {
      const auto& component = p->components[i];
      out.segment(p->offsets[i], component.output_dimension()) =
          component.EvaluateSample(x, draw_index);
    }
    return out;
  }
  return Evaluate(x);
}

Matrix Mapping::Jacobian(const Point& x, double h) const {
  RequireDimension("jacobian point", input_dimension(), x.size());
  if (!(h > 0.0)) throw InvalidArgument("finite-difference step must be > 0");
  if (const auto* a = affine()) return a->M;
  if (const auto* s = stochastic()) return s->base->Jacobian(x, h);
  if (const auto* p = partitioned()) {
    Matrix J(output_dimension(), input_dimension());
    for (std::size_t i = 0; i < p->components.size(); ++i) {
      const auto& component = p->components[i];
      J.middleRows(p->offsets[i], component.output_dimension()) =
          component.Jacobian(x, h);
    }
    return J;
  }
  Matrix J(output_dimension(), input_dimension());
  Point xp = x;
  Point xm = x;
  for (Index j = 0; j < x.size(); ++j) {
    xp(j) = x(j) + h;
    xm(j) = x(j) - h;
    J.col(j) = (Evaluate(xp) - Evaluate(xm)) / (2.0 * h);
    xp(j) = x(j);
    xm(j) = x(j);
  }
  return J;
}

bool Mapping::IsAffine() const {
  if (affine() != nullptr) return true;
  if (const auto* s = stochastic()) return s->base->IsAffine();
  if (const auto* p = partitioned()) {
    return std::all_of(p->components.begin(), p->components.end(),
                       [](const Mapping& m) { return m.IsAffine(); });
  }
  return false;
}

Index Mapping::num_components() const {
  if (const auto* p = partitioned()) {
    return static_cast<Index>(p->components.size());
  }
  return 1;
}

std::pair<Index, Index> Mapping::ComponentRange(Index i) const {
  if (i < 0 || i >= num_components()) {
    throw InvalidArgument("component index " + std::to_string(i) +
                          " out of range");
  }
  if (const auto* p = partitioned()) {
    return {p->offsets[i], p->components[i].output_dimension()};
  }
  return {0, output_dimension()};
}

Mapping Mapping::Component(Index i) const {
  ComponentRange(i);
  if (const auto* p = partitioned()) return p->components[i];
  return *this;
}

Mapping Mapping::WithComponent(Index i, Mapping replacement) const {
  const auto [offset, length] = ComponentRange(i);
  RequireDimension("replacement component output", length,
                   replacement.output_dimension());
  RequireDimension("replacement component input", input_dimension(),
                   replacement.input_dimension());
  if (const auto* p = partitioned()) {
    std::vector<Mapping> components = p->components;
    components[i] = std::move(replacement);
    return Partitioned(std::move(components));
  }
  return replacement;
}

Mapping Mapping::WithOutputShift(Index coordinate, double delta) const {
  if (coordinate < 0 || coordinate >= output_dimension()) {
    throw InvalidArgument("shifted coordinate " + std::to_string(coordinate) +
                          " out of range");
  }
  if (!std::isfinite(delta)) throw InvalidArgument("shift must be finite");
  if (const auto* a = affine()) {
    Point c = a->c;
    c(coordinate) += delta;
    return Affine(a->M, std::move(c));
  }
  if (const auto* s = stochastic()) {
    return Stochastic(s->base->WithOutputShift(coordinate, delta), s->noise);
  }
  if (const auto* p = partitioned()) {
    std::vector<Mapping> components = p->components;
    for (std::size_t i = 0; i < components.size(); ++i) {
      const Index len = components[i].output_dimension();
      if (coordinate >= p->offsets[i] && coordinate < p->offsets[i] + len) {
        components[i] =
            components[i].WithOutputShift(coordinate - p->offsets[i], delta);
        break;
      }
    }
    return Partitioned(std::move(components));
  }
  const auto& c = *callable();
  Evaluator f = [inner = c.f, coordinate, delta](const Point& x) {
    Point out = inner(x);
    out(coordinate) += delta;
    return out;
  };
  return Callable(c.input_dim, c.output_dim, std::move(f));
}

Mapping Mapping::WithComponentNoise(Index i, NoiseModel noise) const {
  Mapping component = Component(i);
  if (const auto* s = component.stochastic()) {
    component = *s->base;
  }
  return WithComponent(i, Stochastic(std::move(component), std::move(noise)));
}

const Mapping::AffineData* Mapping::affine() const {
  return std::get_if<AffineData>(&rep_->data);
}
const Mapping::PartitionedData* Mapping::partitioned() const {
  return std::get_if<PartitionedData>(&rep_->data);
}
const Mapping::StochasticData* Mapping::stochastic() const {
  return std::get_if<StochasticData>(&rep_->data);
}
const Mapping::CallableData* Mapping::callable() const {
  return std::get_if<CallableData>(&rep_->data);
}

double MinSymmetricEigenvalue(const Matrix& M) {
  const Matrix sym = 0.5 * (M + M.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> eig(sym, Eigen::EigenvaluesOnly);
  return eig.eigenvalues().minCoeff();
}

double SpectralNorm(const Matrix& M) {
  Eigen::JacobiSVD<Matrix> svd(M);
  return svd.singularValues()(0);
}

PropertyReport CheckProperties(const Mapping& mapping, const FeasibleSet& set,
                               int samples, std::uint64_t seed) {
  if (samples < 2) throw InvalidArgument("property check needs >= 2 samples");
  RequireDimension("mapping vs feasible set", set.dimension(),
                   mapping.input_dimension());
  RequireDimension("mapping output", mapping.input_dimension(),
                   mapping.output_dimension());

  std::mt19937_64 rng(seed);
  std::vector<Point> points;
  std::vector<Point> values;
  points.reserve(samples);
  values.reserve(samples);
  for (int s = 0; s < samples; ++s) {
    try {
      points.push_back(set.Sample(rng));
    } catch (const Error& e) {
      throw InvalidArgument(std::string("cannot sample feasible points: ") +
                            e.what());
    }
    values.push_back(mapping.Evaluate(points.back()));
  }

  PropertyReport report;
  report.samples = samples;
  report.seed = seed;
  report.symmetric = true;
  report.positive_definite = true;
  const bool affine = mapping.IsAffine();
  // An affine field has one Jacobian; evaluate it once.
  const int jacobian_points = affine ? 1 : samples;
  for (int s = 0; s < jacobian_points; ++s) {
    const Matrix J = mapping.Jacobian(points[s]);
    const Matrix skew = J - J.transpose();
    if (skew.cwiseAbs().rowwise().sum().maxCoeff() > kSymmetryTol) {
      report.symmetric = false;
    }
    if (!(MinSymmetricEigenvalue(J) > kDefiniteTol)) {
      report.positive_definite = false;
    }
    if (affine) {
      report.mu_exact = MinSymmetricEigenvalue(J);
      report.lipschitz_exact = SpectralNorm(J);
    }
  }

  report.monotone = true;
  double mu = std::numeric_limits<double>::infinity();
  double lipschitz = 0.0;
  for (int i = 0; i < samples; ++i) {
    for (int j = i + 1; j < samples; ++j) {
      const Point dx = points[i] - points[j];
      const double dist2 = dx.squaredNorm();
      if (dist2 <= 1e-24) continue;
      const Point dF = values[i] - values[j];
      const double inner = dF.dot(dx);
      if (inner < -kMonotoneTol) report.monotone = false;
      mu = std::min(mu, inner / dist2);
      lipschitz = std::max(lipschitz, std::sqrt(dF.squaredNorm() / dist2));
    }
  }
  if (!std::isfinite(mu)) {
    throw InvalidArgument(
        "cannot sample feasible points: all samples coincide");
  }
  report.mu_estimate = mu;
  report.lipschitz_estimate = lipschitz;
  return report;
}

}  // namespace cvi
