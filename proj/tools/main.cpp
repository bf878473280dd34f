// Command line front end: run a configured optimization, verify the
// discretization invariants of a configuration, or sweep the subinterval
// count and report parallel efficiency.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "qoc/config.hpp"
#include "qoc/ism.hpp"
#include "qoc/models.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct CommonOpts {
  std::string config_path;
  std::string preset = "spins";
  bool quick = false;
  std::string out_dir = "qoc-out";
  int subintervals = 0;
  int workers = 0;
  int max_outer = -1;
  double eta = -1.0;
  std::string solver;
  double step_size = std::numeric_limits<double>::quiet_NaN();
  std::string variant;
  std::string plan;
  int seed = -1;
};

void add_common(CLI::App* cmd, CommonOpts& c) {
  cmd->add_option("--config", c.config_path, "JSON run configuration file")
      ->check(CLI::ExistingFile);
  cmd->add_option("--preset", c.preset, "Benchmark preset (ignored with --config)")
      ->check(CLI::IsMember({"spins", "rotor", "condensate"}));
  cmd->add_flag("--quick", c.quick, "Scaled-down preset that runs in seconds");
  cmd->add_option("--out-dir", c.out_dir, "Directory for run artifacts");
  cmd->add_option("--subintervals", c.subintervals, "Override: number of subinterval tasks");
  cmd->add_option("--workers", c.workers, "Override: worker threads");
  cmd->add_option("--max-outer", c.max_outer, "Override: outer iteration cap");
  cmd->add_option("--eta", c.eta, "Override: stopping residual");
  cmd->add_option("--solver", c.solver, "Override: gradient, monotonic, or newton")
      ->check(CLI::IsMember({"gradient", "monotonic", "newton"}));
  cmd->add_option("--step-size", c.step_size, "Override: gradient step size");
  cmd->add_option("--variant", c.variant, "Override: interpolated or split")
      ->check(CLI::IsMember({"interpolated", "split"}));
  cmd->add_option("--plan", c.plan, "Override: assembled or direct boundary refresh")
      ->check(CLI::IsMember({"assembled", "direct"}));
  cmd->add_option("--seed", c.seed, "Override: first-guess RNG seed");
}

qoc::RunConfig resolve_config(const CommonOpts& c) {
  qoc::RunConfig cfg = c.config_path.empty() ? qoc::preset_config(c.preset, c.quick)
                                             : qoc::load_config(c.config_path);
  if (c.subintervals > 0) cfg.ism.subintervals = c.subintervals;
  if (c.workers > 0) cfg.ism.workers = c.workers;
  if (c.max_outer >= 0) cfg.ism.max_outer = c.max_outer;
  if (c.eta >= 0.0) cfg.ism.eta = c.eta;
  if (!c.solver.empty()) {
    if (c.solver == "gradient") cfg.solver.kind = qoc::SolverSpec::Kind::gradient;
    if (c.solver == "monotonic") cfg.solver.kind = qoc::SolverSpec::Kind::monotonic;
    if (c.solver == "newton") cfg.solver.kind = qoc::SolverSpec::Kind::newton;
  }
  if (!std::isnan(c.step_size)) cfg.solver.step_size = c.step_size;
  if (!c.variant.empty()) {
    cfg.ism.variant = c.variant == "split" ? qoc::IsmConfig::Variant::split
                                           : qoc::IsmConfig::Variant::interpolated;
  }
  if (!c.plan.empty()) {
    cfg.ism.plan = c.plan == "direct" ? qoc::IsmConfig::BoundaryPlan::direct
                                      : qoc::IsmConfig::BoundaryPlan::assembled;
  }
  if (c.seed >= 0) cfg.initial_control.seed = static_cast<unsigned>(c.seed);
  return cfg;
}

void write_text(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << content;
}

json task_stat_json(const qoc::TaskStat& t) {
  return json{{"compute_seconds", t.compute_seconds},
              {"serialize_seconds", t.serialize_seconds},
              {"bytes_sent", t.bytes_sent}};
}

json iteration_json(const qoc::IterationStat& it) {
  json j;
  j["iteration"] = it.iteration;
  j["objective"] = it.objective;
  if (it.exact_objective) j["exact_objective"] = *it.exact_objective;
  if (it.error) j["error"] = *it.error;
  j["task_values"] = it.task_values;
  json tasks = json::array();
  for (const auto& t : it.tasks) tasks.push_back(task_stat_json(t));
  j["tasks"] = tasks;
  j["coordinator_seconds"] = it.coordinator_seconds;
  j["critical_path_seconds"] = it.critical_path_seconds;
  j["instrumentation_seconds"] = it.instrumentation_seconds;
  j["wall_seconds"] = it.wall_seconds;
  j["events"] = it.events;
  return j;
}

json problem_json(const qoc::ControlProblem& p) {
  return json{{"state_dim", p.model->state_dim()},
              {"channels", p.model->channels()},
              {"steps", p.grid.steps},
              {"t_start", p.grid.t_start},
              {"dt", p.grid.dt},
              {"duration", p.grid.span()}};
}

json record_summary_json(const qoc::RunRecord& rec) {
  json r;
  r["subintervals"] = rec.subintervals;
  r["workers"] = rec.workers;
  r["solver"] = rec.solver;
  r["variant"] = rec.variant;
  r["plan"] = rec.plan;
  r["iterations"] = rec.iterations.empty() ? 0 : rec.iterations.back().iteration;
  r["aborted"] = rec.aborted;
  r["abort_reason"] = rec.abort_reason;
  r["total_wall_seconds"] = rec.total_wall_seconds();
  r["total_critical_path_seconds"] = rec.total_critical_path_seconds();
  if (!rec.iterations.empty()) {
    const auto& last = rec.iterations.back();
    r["final_objective"] = last.objective;
    if (last.exact_objective) r["final_exact_objective"] = *last.exact_objective;
    if (last.error) r["final_error"] = *last.error;
  }
  return r;
}

json profiling_json(const qoc::RunRecord& rec) {
  json p;
  double coord = 0.0, crit = 0.0, instr = 0.0, wall = 0.0;
  double max_task = 0.0;
  uint64_t bytes = 0;
  int count = 0;
  for (const auto& it : rec.iterations) {
    coord += it.coordinator_seconds;
    crit += it.critical_path_seconds;
    instr += it.instrumentation_seconds;
    wall += it.wall_seconds;
    for (const auto& t : it.tasks) {
      max_task = std::max(max_task, t.compute_seconds + t.serialize_seconds);
      bytes += t.bytes_sent;
    }
    ++count;
  }
  p["entries"] = count;
  p["coordinator_seconds_total"] = coord;
  p["critical_path_seconds_total"] = crit;
  p["instrumentation_seconds_total"] = instr;
  p["wall_seconds_total"] = wall;
  p["max_task_seconds"] = max_task;
  p["bytes_sent_total"] = bytes;
  if (!rec.iterations.empty()) {
    p["bootstrap_seconds"] = rec.iterations.front().critical_path_seconds;
  }
  return p;
}

void write_run_artifacts(const fs::path& dir, const qoc::RunConfig& cfg,
                         const qoc::ControlProblem& problem, const qoc::IsmRun& run) {
  fs::create_directories(dir);
  write_text(dir / "config.json", qoc::config_to_json(cfg) + "\n");

  std::string lines;
  for (const auto& it : run.record.iterations) {
    lines += iteration_json(it).dump();
    lines += "\n";
  }
  write_text(dir / "iterations.jsonl", lines);

  qoc::write_control_csv((dir / "control.csv").string(), run.control);

  json summary;
  summary["format_version"] = 1;
  summary["config"] = json::parse(qoc::config_to_json(cfg));
  summary["problem"] = problem_json(problem);
  summary["result"] = record_summary_json(run.record);
  write_text(dir / "summary.json", summary.dump(2) + "\n");

  write_text(dir / "profiling.json", profiling_json(run.record).dump(2) + "\n");
}

void print_record(const qoc::RunRecord& rec) {
  for (const auto& it : rec.iterations) {
    std::printf("  it %3d  objective % .12e", it.iteration, it.objective);
    if (it.exact_objective) std::printf("  exact % .12e", *it.exact_objective);
    if (it.error) std::printf("  residual %.6e", *it.error);
    std::printf("  t_crit %.3es\n", it.critical_path_seconds);
    for (const auto& e : it.events) std::printf("         event: %s\n", e.c_str());
  }
}

int cmd_run(const CommonOpts& opts) {
  const qoc::RunConfig cfg = resolve_config(opts);
  const qoc::ControlProblem problem = qoc::build_problem(cfg);
  const qoc::ControlField u0 = qoc::build_initial_control(cfg, problem);
  std::printf("preset=%s variant=%s plan=%s solver=%s N=%d workers=%d steps=%d dim=%d\n",
              qoc::to_string(cfg.preset).c_str(), qoc::to_string(cfg.ism.variant).c_str(),
              qoc::to_string(cfg.ism.plan).c_str(), qoc::to_string(cfg.solver.kind).c_str(),
              cfg.ism.subintervals, cfg.ism.workers, problem.grid.steps,
              problem.model->state_dim());

  const qoc::IsmRun run = qoc::run_ism(problem, u0, cfg.ism, cfg.solver);
  print_record(run.record);
  write_run_artifacts(opts.out_dir, cfg, problem, run);
  std::printf("wrote %s\n", opts.out_dir.c_str());
  if (run.record.aborted) {
    std::fprintf(stderr, "run aborted: %s\n", run.record.abort_reason.c_str());
    return 3;
  }
  return 0;
}

bool report(const char* name, double value, double tolerance) {
  const bool ok = value <= tolerance;
  std::printf("[%s] %-42s %.3e (tolerance %.1e)\n", ok ? "PASS" : "FAIL", name, value, tolerance);
  return ok;
}

int cmd_verify(const CommonOpts& opts) {
  const qoc::RunConfig cfg = resolve_config(opts);
  const qoc::ControlProblem problem = qoc::build_problem(cfg);
  const qoc::ControlField u0 = qoc::build_initial_control(cfg, problem);
  bool ok = true;

  // Norm conservation of the one-step scheme over the whole horizon.
  const qoc::CMat final_state = qoc::propagate_final(*problem.model, u0, problem.initial);
  const double n0 = qoc::state_norm(*problem.model, problem.initial);
  const double drift = std::abs(qoc::state_norm(*problem.model, final_state) - n0) / n0;
  ok &= report("norm conservation drift", drift, 1e-10);

  // Decomposition consistency (linear one-step flows).
  if (problem.model->kind() != qoc::PropagatorKind::strang) {
    const int parts = std::max(2, cfg.ism.subintervals);
    const qoc::TheoremReport rep = qoc::verify_decomposition(problem, u0, parts);
    const double j_scale = 1.0 + std::abs(qoc::evaluate_objective(
                                     problem, u0, qoc::ObjectiveForm::tracking));
    ok &= report("split objective consistency", rep.functional_mismatch / j_scale, 1e-9);
    ok &= report("split gradient consistency", rep.gradient_mismatch, 1e-9);
  }

  // Directional derivative against the assembled gradient.
  {
    const qoc::RMat g =
        qoc::objective_gradient(problem, u0, qoc::ObjectiveForm::overlap, cfg.solver.gradient);
    std::mt19937 rng(1234);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    qoc::RMat v(g.rows(), g.cols());
    for (Eigen::Index i = 0; i < v.rows(); ++i) {
      for (Eigen::Index j = 0; j < v.cols(); ++j) v(i, j) = dist(rng);
    }
    const double scale = std::max(1.0, u0.samples().cwiseAbs().maxCoeff());
    const double h = 1e-6 * scale;
    qoc::ControlField up = u0, um = u0;
    up.samples() += h * v;
    um.samples() -= h * v;
    const double jp = qoc::evaluate_objective(problem, up, qoc::ObjectiveForm::overlap);
    const double jm = qoc::evaluate_objective(problem, um, qoc::ObjectiveForm::overlap);
    const double fd = (jp - jm) / (2.0 * h);
    const double analytic = (g.array() * v.array()).sum();
    const double rel = std::abs(fd - analytic) / std::max(1e-12, std::abs(analytic));
    ok &= report("gradient directional derivative", rel, 1e-4);
  }

  // Self-consistent endpoint states of the trapped-condensate problem.
  if (const auto* condensate =
          dynamic_cast<const qoc::TrappedCondensateModel*>(problem.model.get())) {
    qoc::RVec held(1);
    held << 1.0;
    const qoc::StationaryState a = qoc::ground_state(*condensate, held);
    held << 0.0;
    const qoc::StationaryState b = qoc::ground_state(*condensate, held);
    ok &= report("initial stationary-state residual", a.residual, 1e-8);
    ok &= report("target stationary-state residual", b.residual, 1e-8);
  }

  return ok ? 0 : 1;
}

struct BenchOpts {
  std::vector<int> subintervals{1, 2, 4, 8};
  std::vector<double> eps{0.32, 0.89, 1.74};
};

int cmd_bench(const CommonOpts& opts, const BenchOpts& bench) {
  qoc::RunConfig cfg = resolve_config(opts);
  const qoc::ControlProblem problem = qoc::build_problem(cfg);
  const qoc::ControlField u0 = qoc::build_initial_control(cfg, problem);
  fs::create_directories(opts.out_dir);

  std::vector<qoc::RunRecord> records;
  records.reserve(bench.subintervals.size());
  for (int n : bench.subintervals) {
    qoc::RunConfig cfg_n = cfg;
    cfg_n.ism.subintervals = n;
    std::printf("running N=%d ...\n", n);
    qoc::IsmRun run = qoc::run_ism(problem, u0, cfg_n.ism, cfg_n.solver);
    write_run_artifacts(fs::path(opts.out_dir) / ("N" + std::to_string(n)), cfg_n, problem, run);
    // Efficiency is judged on the true payoff when the run logs one.
    for (auto& it : run.record.iterations) {
      if (it.exact_objective) it.objective = *it.exact_objective;
    }
    records.push_back(std::move(run.record));
    if (records.back().aborted) {
      std::fprintf(stderr, "N=%d aborted: %s\n", n, records.back().abort_reason.c_str());
      return 3;
    }
  }

  std::vector<std::pair<int, const qoc::RunRecord*>> runs;
  for (size_t i = 0; i < records.size(); ++i) {
    runs.emplace_back(bench.subintervals[i], &records[i]);
  }

  double limit = -std::numeric_limits<double>::infinity();
  for (const auto& [n, rec] : runs) {
    if (n != 1) continue;
    for (const auto& it : rec->iterations) {
      if (std::isfinite(it.objective)) limit = std::max(limit, it.objective);
    }
  }
  if (!std::isfinite(limit)) {
    std::fprintf(stderr, "bench needs an N=1 run with a finite objective\n");
    return 1;
  }
  std::printf("reference payoff limit (N=1): %.12e\n", limit);

  std::string csv = "eps,N,t_seconds,speedup,efficiency\n";
  for (double eps : bench.eps) {
    std::printf("eps = %g\n", eps);
    std::vector<qoc::EfficiencyRow> rows;
    try {
      rows = qoc::efficiency_table(runs, limit, eps);
    } catch (const std::exception& e) {
      std::printf("  skipped: %s\n", e.what());
      continue;
    }
    for (const auto& row : rows) {
      char buf[160];
      if (row.reached) {
        std::snprintf(buf, sizeof(buf), "%g,%d,%.6e,%.3f,%s\n", eps, row.subintervals,
                      row.t_seconds, row.speedup, qoc::format_percent(row.efficiency_percent).c_str());
        std::printf("  N=%-3d t=%.3es  speedup=%.2f  efficiency=%s\n", row.subintervals,
                    row.t_seconds, row.speedup,
                    qoc::format_percent(row.efficiency_percent).c_str());
      } else {
        std::snprintf(buf, sizeof(buf), "%g,%d,,,unreached\n", eps, row.subintervals);
        std::printf("  N=%-3d unreached\n", row.subintervals);
      }
      csv += buf;
    }
  }
  write_text(fs::path(opts.out_dir) / "efficiency.csv", csv);
  std::printf("wrote %s\n", (fs::path(opts.out_dir) / "efficiency.csv").string().c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Parallel-in-time quantum optimal control"};
  app.require_subcommand(1);

  CommonOpts run_opts, verify_opts, bench_opts_common;
  BenchOpts bench_opts;

  CLI::App* run = app.add_subcommand("run", "Optimize a configured problem and write artifacts");
  add_common(run, run_opts);

  CLI::App* verify =
      app.add_subcommand("verify", "Check discretization invariants of a configuration");
  add_common(verify, verify_opts);

  CLI::App* bench = app.add_subcommand(
      "bench", "Sweep the subinterval count and report time-to-target efficiency");
  add_common(bench, bench_opts_common);
  bench->add_option("--subintervals-list", bench_opts.subintervals,
                    "Subinterval counts to sweep (the reference 1 must be included)");
  bench->add_option("--eps-list", bench_opts.eps, "Payoff distances from the reference limit");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) return cmd_run(run_opts);
    if (verify->parsed()) return cmd_verify(verify_opts);
    if (bench->parsed()) return cmd_bench(bench_opts_common, bench_opts);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
