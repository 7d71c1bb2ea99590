// cvi: solve, intervene on and analyse causal variational inequalities
// described by a JSON spec file.

#include <iostream>

#include <CLI11.hpp>

#include "commands.h"

namespace {

using namespace cvi::cli;

void AddRunFlags(CLI::App* cmd, RunFlags* flags) {
  cmd->add_option("--algorithm", flags->algorithm,
                  "projection, extragradient or incremental");
  cmd->add_option("--tol", flags->tol, "natural-residual tolerance");
  cmd->add_option("--max-iter", flags->max_iter, "iteration limit");
  cmd->add_option("--seed", flags->seed, "random seed (overrides CVI_SEED)");
  cmd->add_flag("--json", flags->json, "machine-readable output");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Causal variational inequality solver"};
  app.require_subcommand(1);

  std::string spec_path;
  RunFlags run;
  std::vector<std::string> dos;
  PdsFlags pds;
  CheckFlags check;

  auto* solve = app.add_subcommand("solve", "solve the spec's problem");
  solve->add_option("spec", spec_path, "spec file")->required();
  AddRunFlags(solve, &run);

  auto* intervene =
      app.add_subcommand("intervene", "solve the submodel after --do interventions");
  intervene->add_option("spec", spec_path, "spec file")->required();
  intervene->add_option("--do", dos,
                        "clamp:index=I,value=V | shift:index=I,delta=D | "
                        "noise:component=C,stddev=S[,seed=K]");
  AddRunFlags(intervene, &run);

  auto* compare =
      app.add_subcommand("compare", "treatment effect of --do interventions");
  compare->add_option("spec", spec_path, "spec file")->required();
  compare->add_option("--do", dos, "intervention, as for intervene");
  AddRunFlags(compare, &run);

  auto* pds_cmd =
      app.add_subcommand("pds", "integrate the projected dynamical system");
  pds_cmd->add_option("spec", spec_path, "spec file")->required();
  pds_cmd->add_option("--x0", pds.x0, "start point, comma-separated");
  pds_cmd->add_option("--delta", pds.delta, "Euler step")->capture_default_str();
  pds_cmd->add_option("--steps", pds.steps, "number of steps")->capture_default_str();
  pds_cmd->add_option("--out", pds.out, "CSV output path (default stdout)");

  auto* check_cmd = app.add_subcommand("check", "report mapping properties");
  check_cmd->add_option("spec", spec_path, "spec file")->required();
  check_cmd->add_option("--samples", check.samples, "sample points")
      ->capture_default_str();
  check_cmd->add_option("--seed", check.seed, "sampling seed");
  check_cmd->add_flag("--json", check.json, "machine-readable output");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kInputError;
  }

  try {
    const SpecFile spec = LoadSpec(spec_path);
    if (solve->parsed()) return RunSolve(spec, run, std::cout);
    if (intervene->parsed()) return RunIntervene(spec, dos, run, std::cout);
    if (compare->parsed()) return RunCompare(spec, dos, run, std::cout);
    if (pds_cmd->parsed()) return RunPds(spec, pds, std::cout);
    return RunCheck(spec, check, std::cout);
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInputError;
  } catch (const cvi::NonConvergence& e) {
    std::cerr << "not converged: " << e.what() << "\n";
    return kNotConverged;
  } catch (const cvi::UnsupportedAnalysis& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInputError;
  } catch (const cvi::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInputError;
  }
}
