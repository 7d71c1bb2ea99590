#pragma once

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "cvi/causal.h"
#include "cvi/interventions.h"

namespace cvi::cli {

/// Bad user input: spec file, flag or --do string. Maps to exit code 1.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SpecFile {
  std::string source;
  std::string model;  // canonical builtin name or "affine"
  Problem base;       // before the spec's own interventions
  std::vector<Intervention> interventions;
  Problem problem;    // base with interventions applied
  SolverConfig solver;
  bool seed_given = false;
};

/// Parses and validates a spec document. Errors carry
/// "<source>:<line>: <json pointer>: <message>".
SpecFile ParseSpec(const std::string& text, const std::string& source);
SpecFile LoadSpec(const std::string& path);

/// --do syntax: "clamp:index=2,value=0", "shift:index=q211,delta=49",
/// "noise:component=1,stddev=0.5[,seed=3]". Index values may be labels.
Intervention ParseDo(const std::string& text, const Problem& problem);

}  // namespace cvi::cli
