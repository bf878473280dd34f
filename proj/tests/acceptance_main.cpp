// Acceptance suite: one printed line per criterion, checked against pinned
// tolerances. Exit code 0 only if every criterion passes.

#include <cmath>
#include <complex>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/LU>

#include "fixtures.hpp"
#include "qoc/config.hpp"
#include "qoc/ism.hpp"
#include "qoc/linalg.hpp"
#include "qoc/models.hpp"
#include "qoc/objective.hpp"
#include "qoc/propagation.hpp"

#ifdef QOC_CLI_PATH
#include <sys/wait.h>
#endif

namespace {

using qoc::CMat;
using qoc::ControlField;
using qoc::ControlProblem;
using qoc::ObjectiveForm;
using qoc::RMat;

int failures = 0;

void report(int index, const char* name, bool pass, const std::string& detail) {
  std::printf("[%s] %2d. %s — %s\n", pass ? "PASS" : "FAIL", index, name, detail.c_str());
  std::fflush(stdout);
  if (!pass) {
    ++failures;
  }
}

void run_criterion(int index, const char* name,
                   const std::function<std::pair<bool, std::string>()>& body) {
  try {
    const auto [pass, detail] = body();
    report(index, name, pass, detail);
  } catch (const std::exception& e) {
    report(index, name, false, std::string("exception: ") + e.what());
  }
}

std::string fmt(const char* pattern, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof(buf), pattern, a, b, c);
  return buf;
}

fixtures::DenseFixture identity_fixture(int index) {
  fixtures::DenseFixtureOptions opt;
  opt.dim = 2 + index % 7;          // state dimensions 2..8
  opt.steps = 64;                   // shared step count of the identity fixtures
  opt.channels = 1 + index % 2;
  opt.conjugation = index % 3 == 0; // mix density-matrix and vector flows
  opt.quadratic = index % 5 == 0;   // mix affine and quadratic control coupling
  opt.random_penalty = true;
  return fixtures::dense_fixture(9000u + static_cast<unsigned>(index), opt);
}

constexpr int kIdentityFixtures = 50;
const int kIdentityParts[4] = {1, 2, 4, 8};

// --- 1: summed weighted subtask values reproduce the global objective ------
std::pair<bool, std::string> criterion_objective_identity() {
  constexpr double tol_scale = 1e-11;
  double worst = 0.0;
  for (int i = 0; i < kIdentityFixtures; ++i) {
    const fixtures::DenseFixture f = identity_fixture(i);
    const int parts = kIdentityParts[i % 4];
    const double j_global =
        qoc::evaluate_objective(f.problem, f.control, ObjectiveForm::tracking);
    const qoc::TheoremReport rep = qoc::verify_decomposition(f.problem, f.control, parts);
    const double allowed = tol_scale * (1.0 + std::abs(j_global));
    worst = std::max(worst, rep.functional_mismatch / allowed);
  }
  return {worst <= 1.0,
          fmt("worst mismatch at %.3e of the 1e-11*(1+|J|) allowance over 50 fixtures", worst)};
}

// --- 2: concatenated weighted subtask gradients reproduce the global one ---
std::pair<bool, std::string> criterion_gradient_identity() {
  constexpr double tol = 1e-10;
  double worst = 0.0;
  for (int i = 0; i < kIdentityFixtures; ++i) {
    const fixtures::DenseFixture f = identity_fixture(i);
    const int parts = kIdentityParts[i % 4];
    const qoc::TheoremReport rep = qoc::verify_decomposition(f.problem, f.control, parts);
    worst = std::max(worst, rep.gradient_mismatch);
  }
  return {worst <= tol, fmt("worst per-entry gradient mismatch %.3e (tolerance %.0e)", worst, tol)};
}

// --- 3: spin-benchmark iterates are independent of the subinterval count ---
std::pair<bool, std::string> criterion_subinterval_invariance() {
  constexpr double tol = 1e-10;
  constexpr int outer = 10;
  const qoc::RunConfig cfg = qoc::preset_config("spins", /*quick=*/true);
  const ControlProblem problem = qoc::build_problem(cfg);
  const ControlField u0 = qoc::build_initial_control(cfg, problem);

  qoc::IsmConfig ism;
  ism.eta = 0.0;
  ism.workers = 1;
  qoc::SolverSpec solver = cfg.solver;  // constant-step ascent, step 1e4

  double worst = 0.0;
  for (int k = 1; k <= outer; ++k) {
    ism.max_outer = k;
    ism.subintervals = 1;
    const qoc::IsmRun base = qoc::run_ism(problem, u0, ism, solver);
    if (base.record.aborted) {
      return {false, "single-interval run aborted: " + base.record.abort_reason};
    }
    for (int parts : {2, 4, 8}) {
      ism.subintervals = parts;
      const qoc::IsmRun run = qoc::run_ism(problem, u0, ism, solver);
      if (run.record.aborted) {
        return {false, "decomposed run aborted: " + run.record.abort_reason};
      }
      worst = std::max(
          worst, (run.control.samples() - base.control.samples()).cwiseAbs().maxCoeff());
    }
  }
  if (worst > tol) {
    return {false, fmt("controls drift apart by %.3e per entry (tolerance %.0e)", worst, tol)};
  }

  // Sequential and pooled execution must agree bit for bit.
  ism.max_outer = outer;
  ism.subintervals = 4;
  ism.workers = 1;
  const qoc::IsmRun serial = qoc::run_ism(problem, u0, ism, solver);
  ism.workers = 4;
  const qoc::IsmRun pooled = qoc::run_ism(problem, u0, ism, solver);
  bool bitwise = serial.control.samples() == pooled.control.samples();
  for (size_t k = 0; bitwise && k < serial.record.iterations.size(); ++k) {
    bitwise = serial.record.iterations[k].objective == pooled.record.iterations[k].objective &&
              serial.record.iterations[k].task_values == pooled.record.iterations[k].task_values;
  }
  if (!bitwise) {
    return {false, "pooled execution changed the iterates"};
  }
  return {true, fmt("per-entry control drift %.3e across N in {1,2,4,8} over 10 iterations; "
                    "1 vs 4 workers bit-identical",
                    worst)};
}

// --- 4: analytic gradients match central finite differences ----------------
// A perturbed control sample enters exactly one time step, so the difference
// of the two perturbed trajectories can be seeded in closed form at that step
// and carried through the shared suffix, where the flow acts on it linearly
// (exactly for the rational one-step maps, and by exact pair differences for
// the nonlinear split-step map). This evaluates the same central-difference
// quotient (J(u+h e_cj) - J(u-h e_cj))/(2h) while avoiding the O(eps/h)
// cancellation of subtracting two nearly equal payoffs, which would otherwise
// swamp the absolute comparison floor below.

// exp(-i phi) - 1 without cancellation for small phi.
qoc::Complex phase_minus_one(double phi) {
  const double s = std::sin(0.5 * phi);
  return {-2.0 * s * s, -std::sin(phi)};
}

// Central difference for the rational (dense vector / density conjugation)
// one-step schemes. With B(v) = I + i(dt/2)H(v), P = B^{-1} and the one-step
// map M = 2P - I, the perturbed maps satisfy
//   M(+h) - M(-h) = -2ih dt P(+h) (dH/du) P(-h)
// exactly, so the seeded difference never subtracts O(1) quantities.
double rational_central_difference(const ControlProblem& p, const ControlField& u,
                                   const qoc::Trajectory& traj, ObjectiveForm form, int c, int j,
                                   double h) {
  const qoc::HamiltonianModel& m = *p.model;
  const double dt = p.grid.dt;
  qoc::RVec up = u.step_values(j), um = up;
  up[c] += h;
  um[c] -= h;
  const CMat id = CMat::Identity(m.state_dim(), m.state_dim());
  const qoc::Complex half(0.0, 0.5 * dt);
  const Eigen::PartialPivLU<CMat> lu_plus(id + half * m.hamiltonian(up));
  const Eigen::PartialPivLU<CMat> lu_minus(id + half * m.hamiltonian(um));
  const CMat hc = m.control_derivative(c, u.step_values(j));

  CMat mid, delta_hat;  // midpoint state and (psi+ - psi-)/2h after step j
  if (m.kind() == qoc::PropagatorKind::cn_dense) {
    const CMat& psi = traj[j];
    const CMat p_minus = lu_minus.solve(psi);
    mid = lu_plus.solve(psi) + p_minus - psi;
    delta_hat = qoc::Complex(0.0, -dt) * lu_plus.solve(CMat(hc * p_minus));
  } else {
    const CMat& rho = traj[j];
    const CMat p_plus = lu_plus.solve(id);
    const CMat p_minus = lu_minus.solve(id);
    const CMat sigma = p_plus + p_minus - id;
    const CMat dhat = qoc::Complex(0.0, -dt) * (p_plus * hc * p_minus);
    delta_hat = sigma * rho * dhat.adjoint() + dhat * rho * sigma.adjoint();
    mid = sigma * rho * sigma.adjoint() + (h * h) * (dhat * rho * dhat.adjoint());
  }
  for (int s = j + 1; s < u.steps(); ++s) {
    const qoc::RVec us = u.step_values(s);
    mid = qoc::propagate_step(m, us, dt, mid);
    delta_hat = qoc::propagate_step(m, us, dt, delta_hat);
  }
  const double payoff = form == ObjectiveForm::overlap
                            ? qoc::state_dot(m, p.target, delta_hat).real()
                            : -qoc::state_dot(m, CMat(mid - p.target), delta_hat).real();
  return payoff - p.penalty[j] * dt * u(c, j);
}

// Central difference for the nonlinear split-step scheme: the minus-branch
// state and the (unscaled) branch difference are co-propagated, with the
// density-dependent phase gap evaluated through |psi+|^2 - |psi-|^2 =
// 2 Re(conj(psi-) delta) + |delta|^2 so that no O(1) subtraction occurs.
double split_step_central_difference(const ControlProblem& p, const ControlField& u,
                                     const qoc::Trajectory& traj, ObjectiveForm form, int c,
                                     int j, double h) {
  const qoc::HamiltonianModel& m = *p.model;
  const double dt = p.grid.dt;
  const int n = m.state_dim();
  const double kappa = m.nonlinearity();
  const qoc::RVec& kin = m.kinetic_spectrum();
  qoc::CVec khalf(n);
  for (int i = 0; i < n; ++i) khalf[i] = std::polar(1.0, -0.5 * dt * kin[i]);
  const auto kinetic_half = [&](qoc::CVec& v) {
    qoc::CVec hat = qoc::dft(v);
    hat.array() *= khalf.array();
    v = qoc::idft(hat);
  };

  qoc::CVec psi = traj[j].col(0);  // minus branch
  qoc::CVec delta(n);              // psi+ - psi-, O(h) throughout
  {
    qoc::RVec up = u.step_values(j), um = up;
    up[c] += h;
    um[c] -= h;
    kinetic_half(psi);
    const qoc::RVec v_minus = m.potential(um);
    const qoc::RVec v_gap = m.potential(up) - v_minus;
    for (int i = 0; i < n; ++i) {
      const qoc::Complex flow =
          std::polar(1.0, -dt * (v_minus[i] + kappa * std::norm(psi[i])));
      delta[i] = flow * phase_minus_one(dt * v_gap[i]) * psi[i];
      psi[i] *= flow;
    }
    kinetic_half(psi);
    kinetic_half(delta);
  }
  for (int s = j + 1; s < u.steps(); ++s) {
    const qoc::RVec v = m.potential(u.step_values(s));
    kinetic_half(psi);
    kinetic_half(delta);
    for (int i = 0; i < n; ++i) {
      const double density_gap =
          2.0 * (std::conj(psi[i]) * delta[i]).real() + std::norm(delta[i]);
      const qoc::Complex flow = std::polar(1.0, -dt * (v[i] + kappa * std::norm(psi[i])));
      delta[i] = flow * (phase_minus_one(dt * kappa * density_gap) * (psi[i] + delta[i]) +
                         delta[i]);
      psi[i] *= flow;
    }
    kinetic_half(psi);
    kinetic_half(delta);
  }
  const CMat delta_m = delta;
  const CMat mid_m = psi + 0.5 * delta;
  const double payoff = (form == ObjectiveForm::overlap
                             ? qoc::state_dot(m, p.target, delta_m).real()
                             : -qoc::state_dot(m, CMat(mid_m - p.target), delta_m).real()) /
                        (2.0 * h);
  return payoff - p.penalty[j] * dt * u(c, j);
}

double fd_worst_ratio(const ControlProblem& p, const ControlField& u, ObjectiveForm form) {
  constexpr double h = 1e-6;
  constexpr double rel_tol = 1e-6;
  constexpr double abs_floor = 1e-10;
  const RMat g = qoc::objective_gradient(p, u, form);
  const qoc::Trajectory traj = qoc::propagate(*p.model, u, p.initial);
  const bool split = p.model->kind() == qoc::PropagatorKind::strang;
  double worst = 0.0;
  for (int c = 0; c < u.channels(); ++c) {
    for (int j = 0; j < u.grid().steps; ++j) {
      const double fd = split ? split_step_central_difference(p, u, traj, form, c, j, h)
                              : rational_central_difference(p, u, traj, form, c, j, h);
      const double diff = std::abs(fd - g(c, j));
      const double allowed = std::max(abs_floor, rel_tol * std::max(std::abs(fd),
                                                                    std::abs(g(c, j))));
      worst = std::max(worst, diff / allowed);
    }
  }
  return worst;
}

std::pair<bool, std::string> criterion_gradient_exactness() {
  const qoc::RunConfig spins_cfg = qoc::preset_config("spins", /*quick=*/true);
  const ControlProblem spins = qoc::build_problem(spins_cfg);
  const ControlField spins_u = qoc::build_initial_control(spins_cfg, spins);
  const double spins_worst = fd_worst_ratio(spins, spins_u, ObjectiveForm::tracking);

  qoc::RunConfig rotor_cfg = qoc::preset_config("rotor", /*quick=*/true);
  const ControlProblem rotor = qoc::build_problem(rotor_cfg);
  const ControlField rotor_u = qoc::random_control(rotor.grid, 1, 11u, 0.05);
  const double rotor_worst = fd_worst_ratio(rotor, rotor_u, ObjectiveForm::tracking);

  const qoc::RunConfig bec_cfg = qoc::preset_config("condensate", /*quick=*/true);
  const ControlProblem bec = qoc::build_problem(bec_cfg);
  const ControlField bec_u = qoc::build_initial_control(bec_cfg, bec);
  const double bec_worst = fd_worst_ratio(bec, bec_u, ObjectiveForm::overlap);

  const double worst = std::max({spins_worst, rotor_worst, bec_worst});
  char detail[256];
  std::snprintf(detail, sizeof(detail),
                "worst entry at %.3e of the rel 1e-6 / abs 1e-10 allowance "
                "(spins %.2e, rotor %.2e, condensate %.2e)",
                worst, spins_worst, rotor_worst, bec_worst);
  return {worst <= 1.0, std::string(detail)};
}

// --- 5: one-step schemes preserve state norms -------------------------------
std::pair<bool, std::string> criterion_norm_conservation() {
  constexpr double cn_step_tol = 1e-13;
  constexpr double gpe_total_tol = 1e-10;

  qoc::RunConfig rotor_cfg = qoc::preset_config("rotor", /*quick=*/true);
  const ControlProblem rotor = qoc::build_problem(rotor_cfg);
  const ControlField rotor_u = qoc::random_control(rotor.grid, 1, 3u, 0.2);
  const qoc::Trajectory traj = qoc::propagate(*rotor.model, rotor_u, rotor.initial);
  const double n0 = qoc::state_norm(*rotor.model, rotor.initial);
  double worst_step = 0.0;
  for (int j = 0; j < rotor.grid.steps; ++j) {
    const double a = qoc::state_norm(*rotor.model, traj[j]);
    const double b = qoc::state_norm(*rotor.model, traj[j + 1]);
    worst_step = std::max(worst_step, std::abs(b - a) / n0);
  }

  const qoc::RunConfig bec_cfg = qoc::preset_config("condensate");
  const ControlProblem bec = qoc::build_problem(bec_cfg);
  const ControlField bec_u = qoc::build_initial_control(bec_cfg, bec);
  const qoc::CMat bec_final = qoc::propagate_final(*bec.model, bec_u, bec.initial);
  const double bec_drift =
      std::abs(qoc::state_norm(*bec.model, bec_final) - qoc::state_norm(*bec.model, bec.initial));

  const bool pass = worst_step <= cn_step_tol && bec_drift <= gpe_total_tol;
  return {pass, fmt("per-step drift %.3e (tol 1e-13); split-step drift over 512 steps %.3e "
                    "(tol 1e-10)",
                    worst_step, bec_drift)};
}

// --- 6: assembled propagators reproduce propagation and compose ------------
std::pair<bool, std::string> criterion_propagator_assembly() {
  constexpr double apply_tol = 1e-11;
  constexpr double compose_tol = 1e-10;
  double worst_apply = 0.0;
  double worst_compose = 0.0;
  for (int i = 0; i < 10; ++i) {
    fixtures::DenseFixtureOptions opt;
    opt.dim = 4;
    opt.steps = 64;
    opt.conjugation = i % 2 == 1;
    const fixtures::DenseFixture f = fixtures::dense_fixture(9500u + static_cast<unsigned>(i), opt);
    const qoc::CMat whole = qoc::assemble_propagator(*f.problem.model, f.control);
    const qoc::CMat direct = qoc::propagate_final(*f.problem.model, f.control, f.problem.initial);
    const qoc::CMat applied = qoc::apply_propagator(*f.problem.model, whole, f.problem.initial);
    worst_apply = std::max(worst_apply, (applied - direct).norm());

    const qoc::Decomposition d = qoc::Decomposition::uniform(64, 4);
    qoc::CMat chained = qoc::CMat::Identity(whole.rows(), whole.cols());
    for (int n = 0; n < 4; ++n) {
      const qoc::CMat block =
          qoc::assemble_propagator(*f.problem.model, qoc::restrict_field(f.control, d, n));
      chained = block * chained;
    }
    worst_compose = std::max(worst_compose, (chained - whole).cwiseAbs().maxCoeff());
  }
  const bool pass = worst_apply <= apply_tol && worst_compose <= compose_tol;
  return {pass, fmt("application mismatch %.3e (tol 1e-11); block composition mismatch %.3e "
                    "(tol 1e-10)",
                    worst_apply, worst_compose)};
}

// --- 7: the monotonic solver never decreases its objective -----------------
std::pair<bool, std::string> criterion_monotonic_solver() {
  constexpr double tol = -1e-12;
  constexpr int iterations = 50;
  qoc::SolverSpec spec;
  spec.kind = qoc::SolverSpec::Kind::monotonic;

  auto run = [&](const ControlProblem& p, const ControlField& u0) {
    const qoc::Decomposition d = qoc::Decomposition::uniform(p.grid.steps, 1);
    const std::vector<qoc::Subproblem> tasks = qoc::make_subproblems(
        p, d, {p.initial}, {p.target}, /*weighted=*/true, ObjectiveForm::tracking);
    ControlField u = u0;
    double value = qoc::sub_functional(tasks[0], u);
    double worst_drop = 0.0;
    for (int k = 0; k < iterations; ++k) {
      u = qoc::monotonic_step(tasks[0], u, spec).control;
      const double next = qoc::sub_functional(tasks[0], u);
      worst_drop = std::min(worst_drop, next - value);
      value = next;
    }
    return worst_drop;
  };

  qoc::RunConfig rotor_cfg = qoc::preset_config("rotor", /*quick=*/true);
  const ControlProblem rotor = qoc::build_problem(rotor_cfg);
  const double rotor_drop = run(rotor, ControlField::zeros(rotor.grid, 1));

  fixtures::DenseFixtureOptions opt;
  opt.dim = 2;
  opt.channels = 1;
  opt.steps = 32;
  opt.alpha = 0.2;
  const fixtures::DenseFixture two = fixtures::dense_fixture(9700, opt);
  const double two_drop = run(two.problem, two.control);

  const double worst = std::min(rotor_drop, two_drop);
  return {worst >= tol,
          fmt("worst per-iteration objective change %+.3e over 50 iterations on each problem "
              "(allowed >= -1e-12)",
              worst)};
}

// --- 8: split-variant optimization raises the condensate transfer payoff ---
// Baseline payoff after ten split-variant iterations (N=4, constant step 0.1)
// pinned from a reference run of this implementation.
constexpr double kCondensateTenIterationPayoff = -0.742728295;  // ten-iteration baseline
constexpr bool kCondensateBaselinePinned = true;

std::pair<bool, std::string> criterion_condensate_progress() {
  constexpr double baseline_tol = 1e-6;
  qoc::RunConfig cfg = qoc::preset_config("condensate");
  cfg.ism.subintervals = 4;
  cfg.ism.workers = 1;
  cfg.ism.max_outer = 10;
  cfg.ism.eta = 0.0;
  const ControlProblem problem = qoc::build_problem(cfg);
  const ControlField u0 = qoc::build_initial_control(cfg, problem);
  const double initial_payoff = qoc::evaluate_objective(problem, u0, ObjectiveForm::overlap);

  const qoc::IsmRun run = qoc::run_ism(problem, u0, cfg.ism, cfg.solver);
  if (run.record.aborted) {
    return {false, "run aborted: " + run.record.abort_reason};
  }
  std::vector<double> payoffs;
  for (const auto& it : run.record.iterations) {
    if (it.exact_objective) {
      payoffs.push_back(*it.exact_objective);
    }
  }
  if (payoffs.size() != 10) {
    return {false, fmt("expected 10 instrumented payoffs, found %g", double(payoffs.size()))};
  }
  double prev = initial_payoff;
  for (double v : payoffs) {
    if (!(v > prev)) {
      return {false, fmt("payoff stalled: %.9f after %.9f", v, prev)};
    }
    prev = v;
  }
  const double final_payoff = payoffs.back();
  if (!kCondensateBaselinePinned) {
    return {false, fmt("baseline not pinned yet; measured initial %.9f, final %.9f",
                       initial_payoff, final_payoff)};
  }
  if (final_payoff < kCondensateTenIterationPayoff - baseline_tol) {
    return {false, fmt("final payoff %.9f fell below the pinned baseline %.9f - 1e-6",
                       final_payoff, kCondensateTenIterationPayoff)};
  }
  return {true, fmt("payoff rose strictly from %.6f to %.6f over 10 iterations "
                    "(pinned baseline %.6f, tol 1e-6)",
                    initial_payoff, final_payoff, kCondensateTenIterationPayoff)};
}

// --- 9: the bench command reports speedup/efficiency tables ----------------
std::pair<bool, std::string> criterion_bench_report() {
#ifndef QOC_CLI_PATH
  return {false, "command line tool not built"};
#else
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "qoc_acceptance_bench";
  fs::remove_all(dir);
  fs::create_directories(dir);
  const fs::path cfg = dir / "bench.json";
  {
    std::ofstream out(cfg);
    out << R"({
      "preset": "condensate",
      "condensate": {"points": 24, "x_min": -8.0, "x_max": 8.0, "steps": 32, "duration": 2.0},
      "ism": {"max_outer": 4},
      "solver": {"step_size": 0.05}
    })";
  }
  const fs::path out_dir = dir / "artifacts";
  const std::string cmd = std::string(QOC_CLI_PATH) + " bench --config " + cfg.string() +
                          " --out-dir " + out_dir.string() +
                          " --subintervals-list 1 2 4 --eps-list 0.3 > " +
                          (dir / "bench.log").string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  const int rc = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  if (rc != 0) {
    return {false, fmt("bench exited with code %g", double(rc))};
  }
  std::ifstream table(out_dir / "efficiency.csv");
  std::string header;
  std::getline(table, header);
  if (header != "eps,N,t_seconds,speedup,efficiency") {
    return {false, "efficiency table header malformed: " + header};
  }
  int rows = 0;
  bool serial_full = false;
  std::string line;
  while (std::getline(table, line)) {
    ++rows;
    if (line.rfind("0.3,1,", 0) == 0 && line.find("100.0%") != std::string::npos) {
      serial_full = true;
    }
  }
  if (rows != 3 || !serial_full) {
    return {false, fmt("expected 3 sweep rows with a 100.0%% serial reference, found %g rows",
                       double(rows))};
  }
  return {true, "sweep over N in {1,2,4} written with speedup/efficiency columns "
                "(percentages reported, not gated)"};
#endif
}

// --- 10: speedup/efficiency formulas on synthetic timings ------------------
std::pair<bool, std::string> criterion_metric_formulas() {
  auto record_with = [](std::vector<double> objectives, std::vector<double> times) {
    qoc::RunRecord rec;
    for (size_t k = 0; k < objectives.size(); ++k) {
      qoc::IterationStat it;
      it.iteration = static_cast<int>(k);
      it.objective = objectives[k];
      it.critical_path_seconds = times[k];
      rec.iterations.push_back(it);
    }
    return rec;
  };
  const qoc::RunRecord serial = record_with({0.0, 0.2, 0.5, 1.0}, {249.25, 249.25, 249.25, 249.25});
  const qoc::RunRecord eight = record_with({0.4, 1.0}, {62.5, 62.5});
  const qoc::RunRecord stuck = record_with({0.1, 0.2}, {10.0, 10.0});
  const std::vector<std::pair<int, const qoc::RunRecord*>> runs = {
      {1, &serial}, {8, &eight}, {16, &stuck}};

  const auto rows = qoc::efficiency_table(runs, 1.0, 0.25);
  bool ok = rows.size() == 3;
  ok = ok && rows[0].reached && rows[0].t_seconds == 997.0 && rows[0].speedup == 1.0 &&
       rows[0].efficiency_percent == 100.0;
  ok = ok && rows[1].reached && rows[1].t_seconds == 125.0 && rows[1].speedup == 997.0 / 125.0 &&
       rows[1].efficiency_percent == 100.0 * (997.0 / 125.0) / 8.0;
  ok = ok && !rows[2].reached;
  ok = ok && qoc::format_percent(rows[1].efficiency_percent) == "99.7%";
  ok = ok && qoc::format_percent(rows[0].efficiency_percent) == "100.0%";

  const std::string csv = qoc::efficiency_csv(rows);
  ok = ok && csv == "N,t_seconds,speedup,efficiency\n"
                    "1,997.000000,1.000000,100.0%\n"
                    "8,125.000000,7.976000,99.7%\n"
                    "16,,,unreached\n";
  return {ok, ok ? "t(eps,1)/t(eps,N) and 100*S/N reproduced exactly, including the "
                   "percentage rendering"
                 : "formula or formatting mismatch"};
}

}  // namespace

int main() {
  std::printf("acceptance checks\n");
  run_criterion(1, "summed weighted subtask values reproduce the global objective",
                criterion_objective_identity);
  run_criterion(2, "concatenated weighted subtask gradients reproduce the global gradient",
                criterion_gradient_identity);
  run_criterion(3, "spin-benchmark iterates are independent of the subinterval count",
                criterion_subinterval_invariance);
  run_criterion(4, "analytic gradients match central finite differences on all three benchmarks",
                criterion_gradient_exactness);
  run_criterion(5, "one-step schemes preserve state norms", criterion_norm_conservation);
  run_criterion(6, "assembled propagators reproduce propagation and compose across blocks",
                criterion_propagator_assembly);
  run_criterion(7, "the monotonic solver never decreases its objective",
                criterion_monotonic_solver);
  run_criterion(8, "split-variant optimization raises the condensate transfer payoff",
                criterion_condensate_progress);
  run_criterion(9, "the bench command reports speedup and efficiency tables",
                criterion_bench_report);
  run_criterion(10, "speedup and efficiency formulas match their definitions",
                criterion_metric_formulas);
  std::printf("acceptance: %d of 10 criteria passed\n", 10 - failures);
  return failures == 0 ? 0 : 1;
}
