#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "spec_file.h"

namespace cvi::cli {

enum ExitCode : int { kOk = 0, kInputError = 1, kNotConverged = 2 };

/// Solver overrides from the command line. Unset fields fall back to the
/// spec file, then to library defaults.
struct RunFlags {
  std::optional<std::string> algorithm;
  std::optional<double> tol;
  std::optional<int> max_iter;
  std::optional<std::uint64_t> seed;
  bool json = false;
};

struct PdsFlags {
  std::optional<std::string> x0;  // comma-separated
  double delta = 0.01;
  int steps = 1000;
  std::optional<std::string> out;  // stdout when unset
};

struct CheckFlags {
  int samples = 100;
  std::optional<std::uint64_t> seed;
  bool json = false;
};

/// Flag, then spec file, then CVI_SEED, then 0.
std::uint64_t ResolveSeed(const std::optional<std::uint64_t>& flag,
                          const SpecFile& spec);

int RunSolve(const SpecFile& spec, const RunFlags& flags, std::ostream& out);
int RunIntervene(const SpecFile& spec, const std::vector<std::string>& dos,
                 const RunFlags& flags, std::ostream& out);
int RunCompare(const SpecFile& spec, const std::vector<std::string>& dos,
               const RunFlags& flags, std::ostream& out);
int RunPds(const SpecFile& spec, const PdsFlags& flags, std::ostream& out);
int RunCheck(const SpecFile& spec, const CheckFlags& flags, std::ostream& out);

}  // namespace cvi::cli
