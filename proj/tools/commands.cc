#include "commands.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "cvi/models.h"

namespace cvi::cli {
namespace {

using nlohmann::json;
using nlohmann::ordered_json;

std::string Fixed(double v) {
  if (std::fabs(v) < 5e-7) v = 0.0;  // no "-0.000000"
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

std::string Sci(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6e", v);
  return buf;
}

std::string Exact(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

const char* YesNo(bool b) { return b ? "yes" : "no"; }

std::vector<double> ToVector(const Point& x) {
  return std::vector<double>(x.data(), x.data() + x.size());
}

SolverConfig Configure(const SpecFile& spec, const RunFlags& flags) {
  SolverConfig config = spec.solver;
  if (flags.algorithm) {
    const auto algorithm = ParseAlgorithm(*flags.algorithm);
    if (!algorithm) {
      throw InputError("unknown algorithm \"" + *flags.algorithm +
                       "\" (projection, extragradient or incremental)");
    }
    if (*algorithm != config.algorithm) {
      // A schedule written for another algorithm may not validate here.
      config.schedule.reset();
      config.algorithm = *algorithm;
    }
  }
  if (flags.tol) {
    if (!(*flags.tol > 0.0)) throw InputError("--tol must be > 0");
    config.options.tol = *flags.tol;
  }
  if (flags.max_iter) {
    if (*flags.max_iter < 1) throw InputError("--max-iter must be >= 1");
    config.options.max_iter = *flags.max_iter;
  }
  config.seed = ResolveSeed(flags.seed, spec);
  return config;
}

std::vector<Intervention> Treatment(const SpecFile& spec,
                                    const std::vector<std::string>& dos) {
  std::vector<Intervention> all = spec.interventions;
  for (const auto& d : dos) all.push_back(ParseDo(d, spec.base));
  return all;
}

std::vector<std::string> Describe(const std::vector<Intervention>& list,
                                  const Problem& problem) {
  std::vector<std::string> out;
  for (const auto& iv : list) out.push_back(cvi::Describe(iv, problem));
  return out;
}

std::vector<std::string> Labels(const Problem& problem) {
  std::vector<std::string> out;
  for (Index i = 0; i < problem.dimension(); ++i) out.push_back(problem.label(i));
  return out;
}

ordered_json PathDelayJson(const Problem& problem, const Point& x) {
  const auto d = PathDelays(problem, x);
  ordered_json j;
  j["1-2-4"] = d[0];
  j["1-2-3-4"] = d[1];
  j["1-3-4"] = d[2];
  return j;
}

void PrintPathDelays(std::ostream& out, const Problem& problem, const Point& x) {
  const auto d = PathDelays(problem, x);
  out << "path delays: 1-2-4 " << Fixed(d[0]) << ", 1-2-3-4 " << Fixed(d[1])
      << ", 1-3-4 " << Fixed(d[2]) << "\n";
}

int EmitSolution(const char* command, const SpecFile& spec,
                 const std::vector<Intervention>& interventions,
                 const Problem& problem, const SolverConfig& config,
                 const RunFlags& flags, std::ostream& out) {
  const SolveResult r = Solve(problem, config);
  if (flags.json) {
    ordered_json j;
    j["command"] = command;
    j["model"] = spec.model;
    j["algorithm"] = ToString(config.algorithm);
    j["seed"] = config.seed;
    j["interventions"] = Describe(interventions, spec.base);
    j["labels"] = Labels(problem);
    j["point"] = ToVector(r.point);
    j["residual"] = r.residual;
    j["tolerance"] = r.tolerance;
    j["iterations"] = r.iterations;
    j["converged"] = r.converged;
    j["diverged"] = r.diverged;
    if (spec.model == "braess") j["path_delays"] = PathDelayJson(problem, r.point);
    out << j.dump(2) << "\n";
  } else {
    for (const auto& d : Describe(interventions, spec.base)) {
      out << "intervention: " << d << "\n";
    }
    out << "model: " << spec.model << "\n"
        << "algorithm: " << ToString(config.algorithm) << "\n";
    for (Index i = 0; i < problem.dimension(); ++i) {
      out << "  " << problem.label(i) << " = " << Fixed(r.point(i)) << "\n";
    }
    out << "residual: " << Sci(r.residual) << " (tol " << Sci(r.tolerance)
        << ")\n"
        << "iterations: " << r.iterations << "\n"
        << "converged: " << YesNo(r.converged)
        << (r.diverged ? " (diverged)" : "") << "\n";
    if (spec.model == "braess") PrintPathDelays(out, problem, r.point);
  }
  return r.converged ? kOk : kNotConverged;
}

}  // namespace

std::uint64_t ResolveSeed(const std::optional<std::uint64_t>& flag,
                          const SpecFile& spec) {
  if (flag) return *flag;
  if (spec.seed_given) return spec.solver.seed;
  if (const char* env = std::getenv("CVI_SEED"); env != nullptr && *env) {
    char* end = nullptr;
    const unsigned long long v = std::strtoull(env, &end, 10);
    if (*end != '\0' || env[0] == '-') {
      throw InputError(std::string("CVI_SEED is not a nonnegative integer: ") +
                       env);
    }
    return v;
  }
  return 0;
}

int RunSolve(const SpecFile& spec, const RunFlags& flags, std::ostream& out) {
  return EmitSolution("solve", spec, spec.interventions, spec.problem,
                      Configure(spec, flags), flags, out);
}

int RunIntervene(const SpecFile& spec, const std::vector<std::string>& dos,
                 const RunFlags& flags, std::ostream& out) {
  const std::vector<Intervention> all = Treatment(spec, dos);
  Problem treated = spec.base;
  try {
    treated = Apply(spec.base, all).intervened_problem;
  } catch (const cvi::InvalidArgument& e) {
    throw InputError(std::string("cannot apply intervention: ") + e.what());
  }
  return EmitSolution("intervene", spec, all, treated, Configure(spec, flags),
                      flags, out);
}

int RunCompare(const SpecFile& spec, const std::vector<std::string>& dos,
               const RunFlags& flags, std::ostream& out) {
  const std::vector<Intervention> all = Treatment(spec, dos);
  const SolverConfig config = Configure(spec, flags);
  bool set_change = false;
  for (const auto& iv : all) set_change = set_change || IsClamp(iv);

  ordered_json j;
  j["command"] = "compare";
  j["model"] = spec.model;
  j["algorithm"] = ToString(config.algorithm);
  j["seed"] = config.seed;
  j["interventions"] = Describe(all, spec.base);
  j["labels"] = Labels(spec.base);

  if (set_change) {
    Problem treated = spec.base;
    try {
      treated = Apply(spec.base, all).intervened_problem;
    } catch (const cvi::InvalidArgument& e) {
      throw InputError(std::string("cannot apply intervention: ") + e.what());
    }
    const SolveResult r0 = Solve(spec.base, config);
    const SolveResult r1 = Solve(treated, config);
    const std::string note =
        "the intervention changes the feasible set, so the sensitivity bound "
        "does not apply; solutions are compared side by side";
    const double effect = (r1.point - r0.point).norm();
    if (flags.json) {
      j["analysis"] = "side_by_side";
      j["x0"] = ToVector(r0.point);
      j["x1"] = ToVector(r1.point);
      j["effect_norm"] = effect;
      j["converged"] = {{"untreated", r0.converged}, {"treated", r1.converged}};
      if (spec.model == "braess") {
        j["path_delays"] = {{"untreated", PathDelayJson(spec.base, r0.point)},
                            {"treated", PathDelayJson(spec.base, r1.point)}};
      }
      j["note"] = note;
      out << j.dump(2) << "\n";
    } else {
      for (const auto& d : Describe(all, spec.base)) {
        out << "intervention: " << d << "\n";
      }
      out << "note: " << note << "\n";
      out << "  label        untreated      treated\n";
      for (Index i = 0; i < spec.base.dimension(); ++i) {
        char row[160];
        std::snprintf(row, sizeof row, "  %-8s %12.6f %12.6f\n",
                      spec.base.label(i).c_str(), r0.point(i), r1.point(i));
        out << row;
      }
      out << "effect norm: " << Fixed(effect) << "\n";
      if (spec.model == "braess") {
        out << "untreated ";
        PrintPathDelays(out, spec.base, r0.point);
        out << "treated ";
        PrintPathDelays(out, spec.base, r1.point);
      }
    }
    return r0.converged && r1.converged ? kOk : kNotConverged;
  }

  const TreatmentEffectReport report = TreatmentEffect(spec.base, all, config);
  std::vector<ComponentEffect> ranked;
  for (std::size_t i = 0; i < report.per_component.size(); ++i) {
    ranked.push_back({static_cast<Index>(i), report.per_component[i]});
  }
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const ComponentEffect& a, const ComponentEffect& b) {
                     return a.contribution < b.contribution;
                   });
  if (flags.json) {
    j["analysis"] = "treatment_effect";
    j["x0"] = ToVector(report.x0);
    j["x1"] = ToVector(report.x1);
    j["effect_norm"] = report.effect_norm;
    j["bound"] = report.bound;
    j["mu_used"] = report.mu_used;
    j["mu_certified"] = report.mu_certified;
    j["bound_satisfied"] = report.bound_satisfied;
    j["directional"] = {{"treated_shift", report.directional.treated_shift},
                        {"cross_solution", report.directional.cross_solution}};
    j["directional_signs_hold"] = report.directional_signs_hold;
    j["per_component"] = report.per_component;
    ordered_json loc = ordered_json::array();
    for (const auto& e : ranked) {
      loc.push_back({{"component", e.component},
                     {"contribution", e.contribution}});
    }
    j["localization"] = loc;
    j["warnings"] = report.warnings;
    out << j.dump(2) << "\n";
    return kOk;
  }
  for (const auto& d : Describe(all, spec.base)) {
    out << "intervention: " << d << "\n";
  }
  out << "  label        untreated      treated\n";
  for (Index i = 0; i < spec.base.dimension(); ++i) {
    char row[160];
    std::snprintf(row, sizeof row, "  %-8s %12.6f %12.6f\n",
                  spec.base.label(i).c_str(), report.x0(i), report.x1(i));
    out << row;
  }
  out << "effect norm ||x1 - x0||: " << Fixed(report.effect_norm) << "\n"
      << "bound (1/mu) ||F1(x1) - F0(x1)||: " << Fixed(report.bound) << "\n"
      << "mu: " << Fixed(report.mu_used)
      << (report.mu_certified ? " (exact)" : " (estimated)") << "\n"
      << "bound satisfied: " << YesNo(report.bound_satisfied) << "\n"
      << "<F1(x1) - F0(x1), x1 - x0> = "
      << Fixed(report.directional.treated_shift) << "\n"
      << "<F1(x1) - F0(x0), x1 - x0> = "
      << Fixed(report.directional.cross_solution) << "\n"
      << "directional signs hold: " << YesNo(report.directional_signs_hold)
      << "\n"
      << "per-component contributions (most negative first):\n";
  for (const auto& e : ranked) {
    out << "  component " << e.component << ": " << Fixed(e.contribution) << "\n";
  }
  for (const auto& w : report.warnings) out << "warning: " << w << "\n";
  return kOk;
}

int RunPds(const SpecFile& spec, const PdsFlags& flags, std::ostream& out) {
  const Problem& problem = spec.problem;
  const Index n = problem.dimension();
  Point x0 = spec.solver.options.x0.value_or(Point::Zero(n));
  if (flags.x0) {
    std::vector<double> values;
    std::stringstream ss(*flags.x0);
    std::string item;
    while (std::getline(ss, item, ',')) {
      std::size_t used = 0;
      double v = 0.0;
      try {
        v = std::stod(item, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used == 0 || used != item.size()) {
        throw InputError("--x0 entry \"" + item + "\" is not a number");
      }
      values.push_back(v);
    }
    if (static_cast<Index>(values.size()) != n) {
      throw InputError("--x0 has " + std::to_string(values.size()) +
                       " entries, expected " + std::to_string(n));
    }
    x0 = Point::Map(values.data(), n);
  }
  if (!(flags.delta > 0.0)) throw InputError("--delta must be > 0");
  if (flags.steps < 0) throw InputError("--steps must be >= 0");

  std::ofstream file;
  std::ostream* sink = &out;
  if (flags.out) {
    file.open(*flags.out);
    if (!file) throw InputError(*flags.out + ": cannot open for writing");
    sink = &file;
  }
  const auto trajectory = IntegratePds(problem, x0, flags.delta, flags.steps);
  *sink << "step";
  for (Index i = 0; i < n; ++i) *sink << ",x_" << (i + 1);
  *sink << ",residual\n";
  for (std::size_t t = 0; t < trajectory.size(); ++t) {
    const Point& x = trajectory[t];
    *sink << t;
    for (Index i = 0; i < n; ++i) *sink << "," << Exact(x(i));
    *sink << "," << Exact(NaturalResidual(x, problem)) << "\n";
  }
  if (flags.out) {
    file.flush();
    if (!file) throw InputError(*flags.out + ": write failed");
  }
  return kOk;
}

int RunCheck(const SpecFile& spec, const CheckFlags& flags, std::ostream& out) {
  if (flags.samples < 2) throw InputError("--samples must be >= 2");
  const std::uint64_t seed = ResolveSeed(flags.seed, spec);
  const Problem& problem = spec.problem;
  const PropertyReport r =
      CheckProperties(problem.mapping(), problem.set(), flags.samples, seed);
  const double mu = r.mu_exact.value_or(r.mu_estimate);
  const bool strongly = r.positive_definite && mu > 0.0;
  const bool optimization = r.symmetric && r.monotone;
  if (flags.json) {
    ordered_json j;
    j["command"] = "check";
    j["model"] = spec.model;
    j["samples"] = r.samples;
    j["seed"] = r.seed;
    j["symmetric"] = r.symmetric;
    j["positive_definite"] = r.positive_definite;
    j["monotone"] = r.monotone;
    j["strongly_monotone"] = strongly;
    j["mu_estimate"] = r.mu_estimate;
    j["lipschitz_estimate"] = r.lipschitz_estimate;
    j["mu_exact"] = r.mu_exact ? ordered_json(*r.mu_exact) : ordered_json(nullptr);
    j["lipschitz_exact"] =
        r.lipschitz_exact ? ordered_json(*r.lipschitz_exact) : ordered_json(nullptr);
    j["optimization_equivalence"] = optimization;
    out << j.dump(2) << "\n";
    return kOk;
  }
  out << "model: " << spec.model << "\n"
      << "samples: " << r.samples << " (seed " << r.seed << ")\n"
      << "summary: " << (r.symmetric ? "symmetric" : "non-symmetric") << ", "
      << (r.positive_definite ? "positive definite" : "not positive definite")
      << ", " << (r.monotone ? "monotone" : "not monotone") << "\n"
      << "mu estimate: " << Fixed(r.mu_estimate) << "\n"
      << "L estimate: " << Fixed(r.lipschitz_estimate) << "\n";
  if (r.mu_exact) out << "mu exact: " << Fixed(*r.mu_exact) << "\n";
  if (r.lipschitz_exact) out << "L exact: " << Fixed(*r.lipschitz_exact) << "\n";
  out << "strong monotonicity: " << (strongly ? "YES" : "NO") << "\n"
      << "optimization equivalence: " << (optimization ? "YES" : "NO") << "\n";
  return kOk;
}

}  // namespace cvi::cli
