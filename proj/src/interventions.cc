#include "cvi/interventions.h"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

namespace cvi {
namespace {

// Bounds a single coordinate can take in K, used to reject clamps that no
// feasible point could satisfy before building the overlay.
void CheckClampBounds(const FeasibleSet& set, Index index, double value) {
  auto fail = [&] {
    std::ostringstream msg;
    msg << "clamp value " << value << " violates the bounds of coordinate "
        << index;
    return InvalidArgument(msg.str());
  };
  if (const auto* box = set.box()) {
    if (value < box->lower(index) || value > box->upper(index)) throw fail();
  } else if (set.orthant() != nullptr) {
    if (value < 0.0) throw fail();
  } else if (const auto* simplex = set.simplex()) {
    if (value < 0.0 || value > simplex->radius) throw fail();
  } else if (const auto* poly = set.polyhedron()) {
    if (poly->nonnegative && value < 0.0) throw fail();
  } else if (const auto* prod = set.product()) {
    for (std::size_t p = prod->parts.size(); p-- > 0;) {
      if (index >= prod->offsets[p]) {
        CheckClampBounds(prod->parts[p], index - prod->offsets[p], value);
        return;
      }
    }
  } else if (const auto* ov = set.overlay()) {
    CheckClampBounds(*ov->base, index, value);
  }
}

Problem ApplyOne(const Problem& problem, const Intervention& intervention) {
  return std::visit(
      [&problem](const auto& iv) -> Problem {
        using T = std::decay_t<decltype(iv)>;
        const Mapping& F = problem.mapping();
        if constexpr (std::is_same_v<T, ClampVariable>) {
          if (iv.index < 0 || iv.index >= problem.dimension()) {
            throw InvalidArgument("clamp index " + std::to_string(iv.index) +
                                  " out of range");
          }
          if (const auto* ov = problem.set().overlay()) {
            for (const auto& [index, value] : ov->fixed) {
              if (index == iv.index) {
                throw InvalidArgument("conflicting clamps on coordinate " +
                                      std::to_string(iv.index));
              }
            }
          }
          CheckClampBounds(problem.set(), iv.index, iv.value);
          FeasibleSet set =
              FeasibleSet::FixedOverlay(problem.set(), {{iv.index, iv.value}});
          return problem.WithSet(std::move(set)).WithExogenous(iv.index);
        } else if constexpr (std::is_same_v<T, ReplaceComponent>) {
          if (iv.component_index < 0 ||
              iv.component_index >= F.num_components()) {
            throw InvalidArgument("component index " +
                                  std::to_string(iv.component_index) +
                                  " out of range");
          }
          return problem.WithMapping(
              F.WithComponent(iv.component_index, iv.new_mapping));
        } else if constexpr (std::is_same_v<T, ShiftConstant>) {
          return problem.WithMapping(
              F.WithOutputShift(iv.coordinate_index, iv.delta));
        } else {
          if (iv.component_index < 0 ||
              iv.component_index >= F.num_components()) {
            throw InvalidArgument("component index " +
                                  std::to_string(iv.component_index) +
                                  " out of range");
          }
          return problem.WithMapping(
              F.WithComponentNoise(iv.component_index, iv.new_noise));
        }
      },
      intervention);
}

}  // namespace

bool IsClamp(const Intervention& intervention) {
  return std::holds_alternative<ClampVariable>(intervention);
}

std::string Describe(const Intervention& intervention, const Problem& problem) {
  std::ostringstream out;
  std::visit(
      [&](const auto& iv) {
        using T = std::decay_t<decltype(iv)>;
        if constexpr (std::is_same_v<T, ClampVariable>) {
          out << "do(" << problem.label(iv.index) << " = " << iv.value << ")";
        } else if constexpr (std::is_same_v<T, ReplaceComponent>) {
          out << "replace component " << iv.component_index;
        } else if constexpr (std::is_same_v<T, ShiftConstant>) {
          out << "shift F[" << problem.label(iv.coordinate_index) << "] by "
              << iv.delta;
        } else {
          out << "set noise of component " << iv.component_index;
        }
      },
      intervention);
  return out.str();
}

Submodel Apply(const Problem& problem, const Intervention& intervention) {
  return Submodel{problem, {intervention}, ApplyOne(problem, intervention)};
}

Submodel Apply(const Problem& problem,
               const std::vector<Intervention>& interventions) {
  Problem current = problem;
  for (const auto& intervention : interventions) {
    current = ApplyOne(current, intervention);
  }
  return Submodel{problem, interventions, std::move(current)};
}

IrrelevanceResult IrrelevanceCheck(const Problem& problem,
                                   const Intervention& first,
                                   const Intervention& second,
                                   int sample_points, std::uint64_t seed) {
  if (sample_points < 1) {
    throw InvalidArgument("irrelevance check needs at least one sample point");
  }
  const Problem a = Apply(problem, first).intervened_problem;
  const Problem b = Apply(problem, second).intervened_problem;
  std::mt19937_64 rng(seed);
  IrrelevanceResult result;
  for (int s = 0; s < sample_points; ++s) {
    const Point x = problem.set().Sample(rng);
    const double gap = (a.mapping().Evaluate(x) - b.mapping().Evaluate(x))
                           .lpNorm<Eigen::Infinity>();
    result.max_gap = std::max(result.max_gap, gap);
  }
  result.mappings_equal = result.max_gap <= kIrrelevanceTol;
  return result;
}

}  // namespace cvi
