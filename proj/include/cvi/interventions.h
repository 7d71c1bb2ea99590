#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "cvi/core.h"

namespace cvi {

/// do(x_index = value): the coordinate becomes exogenous and the set is
/// sliced at the clamp value.
struct ClampVariable {
  Index index;
  double value;
};

/// Swap the mean field of one component of a (partitioned) mapping.
struct ReplaceComponent {
  Index component_index;
  Mapping new_mapping;
};

/// F_w(x) = F(x) + delta e_coordinate, e.g. a change in a demand constant.
struct ShiftConstant {
  Index coordinate_index;
  double delta;
};

/// Replace the noise law of one component. The mean field moves only if the
/// new noise has a nonzero mean.
struct SetNoise {
  Index component_index;
  NoiseModel new_noise;
};

using Intervention =
    std::variant<ClampVariable, ReplaceComponent, ShiftConstant, SetNoise>;

bool IsClamp(const Intervention& intervention);
std::string Describe(const Intervention& intervention, const Problem& problem);

/// The intervened model CVI(F_w, K_w) derived from `base`.
struct Submodel {
  Problem base;
  std::vector<Intervention> interventions;
  Problem intervened_problem;
};

Submodel Apply(const Problem& problem, const Intervention& intervention);
/// Applies interventions left to right. Two clamps on the same coordinate
/// with different values are rejected.
Submodel Apply(const Problem& problem,
               const std::vector<Intervention>& interventions);

struct IrrelevanceResult {
  bool mappings_equal = false;
  double max_gap = 0.0;
};

inline constexpr double kIrrelevanceTol = 1e-10;

/// Compares the mean fields of the two submodels at `sample_points` feasible
/// points of the base set. Equal mean fields imply equal solutions.
IrrelevanceResult IrrelevanceCheck(const Problem& problem,
                                   const Intervention& first,
                                   const Intervention& second,
                                   int sample_points, std::uint64_t seed);

}  // namespace cvi
