#include "qoc/config.hpp"

#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace qoc {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw std::invalid_argument("config: " + path + ": " + what);
}

void expect_object(const json& j, const std::string& path) {
  if (!j.is_object()) {
    fail(path, "expected an object");
  }
}

void reject_unknown(const json& obj, const std::string& path, const std::set<std::string>& known) {
  for (const auto& item : obj.items()) {
    if (known.find(item.key()) == known.end()) {
      fail(path.empty() ? item.key() : path + "." + item.key(), "unknown key");
    }
  }
}

double get_number(const json& obj, const std::string& path, const char* key, double fallback) {
  if (!obj.contains(key)) {
    return fallback;
  }
  const json& v = obj.at(key);
  if (!v.is_number()) {
    fail(path + "." + key, "expected a number");
  }
  return v.get<double>();
}

int get_int(const json& obj, const std::string& path, const char* key, int fallback) {
  if (!obj.contains(key)) {
    return fallback;
  }
  const json& v = obj.at(key);
  if (!v.is_number_integer()) {
    fail(path + "." + key, "expected an integer");
  }
  return v.get<int>();
}

bool get_bool(const json& obj, const std::string& path, const char* key, bool fallback) {
  if (!obj.contains(key)) {
    return fallback;
  }
  const json& v = obj.at(key);
  if (!v.is_boolean()) {
    fail(path + "." + key, "expected a boolean");
  }
  return v.get<bool>();
}

std::string get_string(const json& obj, const std::string& path, const char* key,
                       const std::string& fallback) {
  if (!obj.contains(key)) {
    return fallback;
  }
  const json& v = obj.at(key);
  if (!v.is_string()) {
    fail(path + "." + key, "expected a string");
  }
  return v.get<std::string>();
}

std::vector<std::pair<int, int>> default_couplings(int count) {
  if (count == 5) {
    return {{1, 2}, {1, 3}, {2, 3}, {2, 5}, {3, 4}};
  }
  if (count == 3) {
    return {{1, 2}, {1, 3}, {2, 3}};
  }
  // Nearest-neighbour chain for other sizes.
  std::vector<std::pair<int, int>> pairs;
  for (int a = 1; a < count; ++a) {
    pairs.emplace_back(a, a + 1);
  }
  return pairs;
}

}  // namespace

std::string to_string(ProblemPreset p) {
  switch (p) {
    case ProblemPreset::spins:
      return "spins";
    case ProblemPreset::rotor:
      return "rotor";
    case ProblemPreset::condensate:
      return "condensate";
  }
  return "unknown";
}

std::string to_string(SolverSpec::Kind k) {
  switch (k) {
    case SolverSpec::Kind::gradient:
      return "gradient";
    case SolverSpec::Kind::monotonic:
      return "monotonic";
    case SolverSpec::Kind::newton:
      return "newton";
  }
  return "unknown";
}

std::string to_string(IsmConfig::Variant v) {
  return v == IsmConfig::Variant::split ? "split" : "interpolated";
}

std::string to_string(IsmConfig::BoundaryPlan b) {
  return b == IsmConfig::BoundaryPlan::direct ? "direct" : "assembled";
}

RunConfig preset_config(ProblemPreset preset, bool quick) {
  RunConfig cfg;
  cfg.preset = preset;
  switch (preset) {
    case ProblemPreset::spins:
      cfg.initial_control.kind = InitialControlSpec::Kind::random;
      cfg.initial_control.seed = 7;
      cfg.initial_control.amplitude = 1.0;
      cfg.solver.kind = SolverSpec::Kind::gradient;
      cfg.solver.step_size = 1e4;
      cfg.ism.variant = IsmConfig::Variant::interpolated;
      cfg.ism.max_outer = 50;
      if (quick) {
        cfg.spins.count = 3;
        cfg.spins.duration = 0.14;
        cfg.spins.steps = 1 << 10;
        cfg.ism.max_outer = 25;
      }
      break;
    case ProblemPreset::rotor:
      cfg.initial_control.kind = InitialControlSpec::Kind::zero;
      cfg.solver.kind = SolverSpec::Kind::monotonic;
      cfg.ism.variant = IsmConfig::Variant::interpolated;
      cfg.ism.max_outer = 100;
      if (quick) {
        cfg.rotor.steps = 1 << 9;
        cfg.ism.max_outer = 30;
      }
      break;
    case ProblemPreset::condensate:
      cfg.initial_control.kind = InitialControlSpec::Kind::ramp;
      cfg.initial_control.from = 1.0;
      cfg.initial_control.to = 0.0;
      cfg.solver.kind = SolverSpec::Kind::gradient;
      cfg.solver.step_size = 0.1;
      cfg.ism.variant = IsmConfig::Variant::split;
      cfg.ism.log_exact_objective = true;
      cfg.ism.max_outer = 100;
      if (quick) {
        cfg.ism.max_outer = 25;
      }
      break;
  }
  return cfg;
}

RunConfig preset_config(const std::string& name, bool quick) {
  if (name == "spins") {
    return preset_config(ProblemPreset::spins, quick);
  }
  if (name == "rotor") {
    return preset_config(ProblemPreset::rotor, quick);
  }
  if (name == "condensate") {
    return preset_config(ProblemPreset::condensate, quick);
  }
  throw std::invalid_argument("unknown preset \"" + name +
                              "\" (expected spins, rotor, or condensate)");
}

namespace {

void parse_spins(const json& j, const std::string& path, SpinsParams& out) {
  expect_object(j, path);
  reject_unknown(j, path, {"count", "couplings", "coupling", "duration", "steps", "penalty"});
  out.count = get_int(j, path, "count", out.count);
  out.coupling = get_number(j, path, "coupling", out.coupling);
  out.duration = get_number(j, path, "duration", out.duration);
  out.steps = get_int(j, path, "steps", out.steps);
  out.penalty = get_number(j, path, "penalty", out.penalty);
  if (j.contains("couplings")) {
    const json& c = j.at("couplings");
    if (!c.is_array()) {
      fail(path + ".couplings", "expected an array of [a, b] pairs");
    }
    out.couplings.clear();
    for (size_t i = 0; i < c.size(); ++i) {
      const json& pair = c.at(i);
      if (!pair.is_array() || pair.size() != 2 || !pair.at(0).is_number_integer() ||
          !pair.at(1).is_number_integer()) {
        fail(path + ".couplings[" + std::to_string(i) + "]", "expected an [a, b] integer pair");
      }
      out.couplings.emplace_back(pair.at(0).get<int>(), pair.at(1).get<int>());
    }
  }
}

void parse_rotor(const json& j, const std::string& path, RotorParams& out) {
  expect_object(j, path);
  reject_unknown(j, path,
                 {"j_max", "rotational_constant", "dipole", "polarizability_parallel",
                  "polarizability_perpendicular", "duration", "steps", "penalty_peak",
                  "penalty_floor"});
  out.j_max = get_int(j, path, "j_max", out.j_max);
  out.rotational_constant = get_number(j, path, "rotational_constant", out.rotational_constant);
  out.dipole = get_number(j, path, "dipole", out.dipole);
  out.polarizability_parallel =
      get_number(j, path, "polarizability_parallel", out.polarizability_parallel);
  out.polarizability_perpendicular =
      get_number(j, path, "polarizability_perpendicular", out.polarizability_perpendicular);
  out.duration = get_number(j, path, "duration", out.duration);
  out.steps = get_int(j, path, "steps", out.steps);
  out.penalty_peak = get_number(j, path, "penalty_peak", out.penalty_peak);
  out.penalty_floor = get_number(j, path, "penalty_floor", out.penalty_floor);
}

void parse_condensate(const json& j, const std::string& path, CondensateParams& out) {
  expect_object(j, path);
  reject_unknown(j, path,
                 {"points", "x_min", "x_max", "trap_distance", "kappa", "duration", "steps"});
  out.points = get_int(j, path, "points", out.points);
  out.x_min = get_number(j, path, "x_min", out.x_min);
  out.x_max = get_number(j, path, "x_max", out.x_max);
  out.trap_distance = get_number(j, path, "trap_distance", out.trap_distance);
  out.kappa = get_number(j, path, "kappa", out.kappa);
  out.duration = get_number(j, path, "duration", out.duration);
  out.steps = get_int(j, path, "steps", out.steps);
}

void parse_initial_control(const json& j, const std::string& path, InitialControlSpec& out) {
  expect_object(j, path);
  reject_unknown(j, path, {"kind", "value", "amplitude", "seed", "from", "to", "path"});
  const std::string kind = get_string(j, path, "kind", "");
  if (!kind.empty()) {
    if (kind == "zero") {
      out.kind = InitialControlSpec::Kind::zero;
    } else if (kind == "constant") {
      out.kind = InitialControlSpec::Kind::constant;
    } else if (kind == "random") {
      out.kind = InitialControlSpec::Kind::random;
    } else if (kind == "ramp") {
      out.kind = InitialControlSpec::Kind::ramp;
    } else if (kind == "file") {
      out.kind = InitialControlSpec::Kind::file;
    } else {
      fail(path + ".kind", "expected zero, constant, random, ramp, or file");
    }
  }
  out.value = get_number(j, path, "value", out.value);
  out.amplitude = get_number(j, path, "amplitude", out.amplitude);
  out.seed = static_cast<unsigned>(get_int(j, path, "seed", static_cast<int>(out.seed)));
  out.from = get_number(j, path, "from", out.from);
  out.to = get_number(j, path, "to", out.to);
  out.path = get_string(j, path, "path", out.path);
}

void parse_ism(const json& j, const std::string& path, IsmConfig& out) {
  expect_object(j, path);
  reject_unknown(j, path,
                 {"subintervals", "workers", "eta", "max_outer", "variant", "plan",
                  "compute_error", "log_exact_objective", "checkpoint_stride"});
  out.subintervals = get_int(j, path, "subintervals", out.subintervals);
  out.workers = get_int(j, path, "workers", out.workers);
  out.eta = get_number(j, path, "eta", out.eta);
  out.max_outer = get_int(j, path, "max_outer", out.max_outer);
  const std::string variant = get_string(j, path, "variant", "");
  if (!variant.empty()) {
    if (variant == "interpolated") {
      out.variant = IsmConfig::Variant::interpolated;
    } else if (variant == "split") {
      out.variant = IsmConfig::Variant::split;
    } else {
      fail(path + ".variant", "expected interpolated or split");
    }
  }
  const std::string plan = get_string(j, path, "plan", "");
  if (!plan.empty()) {
    if (plan == "assembled") {
      out.plan = IsmConfig::BoundaryPlan::assembled;
    } else if (plan == "direct") {
      out.plan = IsmConfig::BoundaryPlan::direct;
    } else {
      fail(path + ".plan", "expected assembled or direct");
    }
  }
  out.compute_error = get_bool(j, path, "compute_error", out.compute_error);
  out.log_exact_objective = get_bool(j, path, "log_exact_objective", out.log_exact_objective);
  out.checkpoint_stride = get_int(j, path, "checkpoint_stride", out.checkpoint_stride);
}

void parse_solver(const json& j, const std::string& path, SolverSpec& out) {
  expect_object(j, path);
  reject_unknown(j, path,
                 {"kind", "step_size", "inner_iterations", "fixed_point_tol",
                  "fixed_point_max_iter", "gmres_restart", "gmres_max_iter", "gmres_tol",
                  "hvp_scale", "naive_nonlinear_adjoint", "checkpoint_stride"});
  const std::string kind = get_string(j, path, "kind", "");
  if (!kind.empty()) {
    if (kind == "gradient") {
      out.kind = SolverSpec::Kind::gradient;
    } else if (kind == "monotonic") {
      out.kind = SolverSpec::Kind::monotonic;
    } else if (kind == "newton") {
      out.kind = SolverSpec::Kind::newton;
    } else {
      fail(path + ".kind", "expected gradient, monotonic, or newton");
    }
  }
  out.step_size = get_number(j, path, "step_size", out.step_size);
  out.inner_iterations = get_int(j, path, "inner_iterations", out.inner_iterations);
  out.fixed_point_tol = get_number(j, path, "fixed_point_tol", out.fixed_point_tol);
  out.fixed_point_max_iter = get_int(j, path, "fixed_point_max_iter", out.fixed_point_max_iter);
  out.gmres_restart = get_int(j, path, "gmres_restart", out.gmres_restart);
  out.gmres_max_iter = get_int(j, path, "gmres_max_iter", out.gmres_max_iter);
  out.gmres_tol = get_number(j, path, "gmres_tol", out.gmres_tol);
  out.hvp_scale = get_number(j, path, "hvp_scale", out.hvp_scale);
  out.gradient.naive_nonlinear_adjoint =
      get_bool(j, path, "naive_nonlinear_adjoint", out.gradient.naive_nonlinear_adjoint);
  out.gradient.checkpoint_stride =
      get_int(j, path, "checkpoint_stride", out.gradient.checkpoint_stride);
}

}  // namespace

RunConfig parse_config_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("config: not valid JSON: ") + e.what());
  }
  expect_object(j, "<root>");
  reject_unknown(j, "",
                 {"preset", "quick", "spins", "rotor", "condensate", "initial_control", "ism",
                  "solver"});

  const std::string preset = get_string(j, "<root>", "preset", "spins");
  const bool quick = get_bool(j, "<root>", "quick", false);
  RunConfig cfg = preset_config(preset, quick);

  if (j.contains("spins")) {
    parse_spins(j.at("spins"), "spins", cfg.spins);
  }
  if (j.contains("rotor")) {
    parse_rotor(j.at("rotor"), "rotor", cfg.rotor);
  }
  if (j.contains("condensate")) {
    parse_condensate(j.at("condensate"), "condensate", cfg.condensate);
  }
  if (j.contains("initial_control")) {
    parse_initial_control(j.at("initial_control"), "initial_control", cfg.initial_control);
  }
  if (j.contains("ism")) {
    parse_ism(j.at("ism"), "ism", cfg.ism);
  }
  if (j.contains("solver")) {
    parse_solver(j.at("solver"), "solver", cfg.solver);
  }
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open config file: " + path);
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str());
}

std::string config_to_json(const RunConfig& cfg) {
  json j;
  j["preset"] = to_string(cfg.preset);
  json& s = j["spins"];
  s["count"] = cfg.spins.count;
  json pairs = json::array();
  const auto couplings =
      cfg.spins.couplings.empty() ? default_couplings(cfg.spins.count) : cfg.spins.couplings;
  for (const auto& [a, b] : couplings) {
    pairs.push_back(json::array({a, b}));
  }
  s["couplings"] = pairs;
  s["coupling"] = cfg.spins.coupling;
  s["duration"] = cfg.spins.duration;
  s["steps"] = cfg.spins.steps;
  s["penalty"] = cfg.spins.penalty;
  json& r = j["rotor"];
  r["j_max"] = cfg.rotor.j_max;
  r["rotational_constant"] = cfg.rotor.rotational_constant;
  r["dipole"] = cfg.rotor.dipole;
  r["polarizability_parallel"] = cfg.rotor.polarizability_parallel;
  r["polarizability_perpendicular"] = cfg.rotor.polarizability_perpendicular;
  r["duration"] = cfg.rotor.duration;
  r["steps"] = cfg.rotor.steps;
  r["penalty_peak"] = cfg.rotor.penalty_peak;
  r["penalty_floor"] = cfg.rotor.penalty_floor;
  json& c = j["condensate"];
  c["points"] = cfg.condensate.points;
  c["x_min"] = cfg.condensate.x_min;
  c["x_max"] = cfg.condensate.x_max;
  c["trap_distance"] = cfg.condensate.trap_distance;
  c["kappa"] = cfg.condensate.kappa;
  c["duration"] = cfg.condensate.duration;
  c["steps"] = cfg.condensate.steps;
  json& ic = j["initial_control"];
  switch (cfg.initial_control.kind) {
    case InitialControlSpec::Kind::zero:
      ic["kind"] = "zero";
      break;
    case InitialControlSpec::Kind::constant:
      ic["kind"] = "constant";
      break;
    case InitialControlSpec::Kind::random:
      ic["kind"] = "random";
      break;
    case InitialControlSpec::Kind::ramp:
      ic["kind"] = "ramp";
      break;
    case InitialControlSpec::Kind::file:
      ic["kind"] = "file";
      break;
  }
  ic["value"] = cfg.initial_control.value;
  ic["amplitude"] = cfg.initial_control.amplitude;
  ic["seed"] = cfg.initial_control.seed;
  ic["from"] = cfg.initial_control.from;
  ic["to"] = cfg.initial_control.to;
  ic["path"] = cfg.initial_control.path;
  json& i = j["ism"];
  i["subintervals"] = cfg.ism.subintervals;
  i["workers"] = cfg.ism.workers;
  i["eta"] = cfg.ism.eta;
  i["max_outer"] = cfg.ism.max_outer;
  i["variant"] = to_string(cfg.ism.variant);
  i["plan"] = to_string(cfg.ism.plan);
  i["compute_error"] = cfg.ism.compute_error;
  i["log_exact_objective"] = cfg.ism.log_exact_objective;
  i["checkpoint_stride"] = cfg.ism.checkpoint_stride;
  json& so = j["solver"];
  so["kind"] = to_string(cfg.solver.kind);
  so["step_size"] = cfg.solver.step_size;
  so["inner_iterations"] = cfg.solver.inner_iterations;
  so["fixed_point_tol"] = cfg.solver.fixed_point_tol;
  so["fixed_point_max_iter"] = cfg.solver.fixed_point_max_iter;
  so["gmres_restart"] = cfg.solver.gmres_restart;
  so["gmres_max_iter"] = cfg.solver.gmres_max_iter;
  so["gmres_tol"] = cfg.solver.gmres_tol;
  so["hvp_scale"] = cfg.solver.hvp_scale;
  so["naive_nonlinear_adjoint"] = cfg.solver.gradient.naive_nonlinear_adjoint;
  so["checkpoint_stride"] = cfg.solver.gradient.checkpoint_stride;
  return j.dump(2);
}

ControlProblem build_problem(const RunConfig& cfg) {
  switch (cfg.preset) {
    case ProblemPreset::spins: {
      const auto couplings =
          cfg.spins.couplings.empty() ? default_couplings(cfg.spins.count) : cfg.spins.couplings;
      return spin_chain_problem(cfg.spins.count, couplings, cfg.spins.coupling,
                                cfg.spins.duration, cfg.spins.steps, cfg.spins.penalty);
    }
    case ProblemPreset::rotor:
      return rotor_problem(cfg.rotor.j_max, cfg.rotor.rotational_constant, cfg.rotor.dipole,
                           cfg.rotor.polarizability_parallel,
                           cfg.rotor.polarizability_perpendicular, cfg.rotor.duration,
                           cfg.rotor.steps, cfg.rotor.penalty_peak, cfg.rotor.penalty_floor);
    case ProblemPreset::condensate:
      return condensate_problem(cfg.condensate.points, cfg.condensate.x_min, cfg.condensate.x_max,
                                cfg.condensate.trap_distance, cfg.condensate.kappa,
                                cfg.condensate.duration, cfg.condensate.steps);
  }
  throw std::logic_error("unknown preset");
}

ControlField build_initial_control(const RunConfig& cfg, const ControlProblem& p) {
  const int channels = p.model->channels();
  switch (cfg.initial_control.kind) {
    case InitialControlSpec::Kind::zero:
      return ControlField::zeros(p.grid, channels);
    case InitialControlSpec::Kind::constant:
      return ControlField::constant(p.grid, channels, cfg.initial_control.value);
    case InitialControlSpec::Kind::random:
      return random_control(p.grid, channels, cfg.initial_control.seed,
                            cfg.initial_control.amplitude);
    case InitialControlSpec::Kind::ramp: {
      if (channels != 1) {
        throw std::invalid_argument("ramp first guesses need a single control channel");
      }
      return ramp_control(p.grid, cfg.initial_control.from, cfg.initial_control.to);
    }
    case InitialControlSpec::Kind::file:
      return read_control_csv(cfg.initial_control.path, p.grid);
  }
  throw std::logic_error("unknown first-guess kind");
}

}  // namespace qoc
