#pragma once

#include <string>
#include <utility>
#include <vector>

#include "qoc/ism.hpp"
#include "qoc/models.hpp"
#include "qoc/optimizers.hpp"

namespace qoc {

// Benchmark problem families selectable by name.
enum class ProblemPreset { spins, rotor, condensate };

std::string to_string(ProblemPreset p);
std::string to_string(SolverSpec::Kind k);
std::string to_string(IsmConfig::Variant v);
std::string to_string(IsmConfig::BoundaryPlan b);

struct SpinsParams {
  int count = 5;
  std::vector<std::pair<int, int>> couplings;  // 1-based pairs; empty = preset default
  double coupling = 140.0;
  double duration = 14.0;
  int steps = 1 << 15;
  double penalty = 0.0;
};

struct RotorParams {
  int j_max = 10;
  double rotational_constant = 6.6376e-6;
  double dipole = 1.1413;
  double polarizability_parallel = 20.055;
  double polarizability_perpendicular = 8.638;
  double duration = 1e5;
  int steps = 1 << 9;
  double penalty_peak = 1e5;
  double penalty_floor = 1e4;
};

struct CondensateParams {
  int points = 50;
  double x_min = -10.0;
  double x_max = 10.0;
  double trap_distance = 10.0;
  double kappa = 1.0;
  double duration = 8.0;
  int steps = 1 << 9;
};

struct InitialControlSpec {
  enum class Kind { zero, constant, random, ramp, file };
  Kind kind = Kind::zero;
  double value = 0.0;      // constant
  double amplitude = 1.0;  // random
  unsigned seed = 7;       // random
  double from = 1.0;       // ramp
  double to = 0.0;         // ramp
  std::string path;        // file (control CSV on the run grid)
};

struct RunConfig {
  ProblemPreset preset = ProblemPreset::spins;
  SpinsParams spins;
  RotorParams rotor;
  CondensateParams condensate;
  InitialControlSpec initial_control;
  IsmConfig ism;
  SolverSpec solver;
};

// Benchmark defaults per preset; `quick` swaps in a scaled-down problem that
// keeps the same structure but runs in seconds.
RunConfig preset_config(ProblemPreset preset, bool quick = false);
RunConfig preset_config(const std::string& name, bool quick = false);

// Strict JSON parsing: unknown or ill-typed keys fail with the offending
// dotted path in the message. Missing keys keep the preset defaults (the
// "preset" key itself defaults to "spins").
RunConfig parse_config_text(const std::string& text);
RunConfig load_config(const std::string& path);

// Canonical echo of every effective setting, suitable for re-running.
std::string config_to_json(const RunConfig& cfg);

ControlProblem build_problem(const RunConfig& cfg);
ControlField build_initial_control(const RunConfig& cfg, const ControlProblem& p);

}  // namespace qoc
