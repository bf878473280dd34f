#include "qoc/ism.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>

namespace qoc {

namespace {

// One backward step of the exact discrete adjoint for any state kind.
CMat adjoint_step_any(const HamiltonianModel& m, const RVec& u, double dt, const CMat& chi_next,
                      const CMat* psi_j, bool naive) {
  switch (m.kind()) {
    case PropagatorKind::cn_dense:
      return cn_adjoint_step(m.hamiltonian(u), dt, chi_next);
    case PropagatorKind::cn_conjugation:
      return cn_conjugation_adjoint_step(m.hamiltonian(u), dt, chi_next);
    case PropagatorKind::strang:
      return strang_adjoint_step(m, u, dt, *psi_j, chi_next, naive);
  }
  throw std::logic_error("unknown propagation kind");
}

// Forward/adjoint node states at the decomposition boundaries, swept over the
// whole grid in a single pass each. The adjoint of a split-step state needs
// the forward state at every node; those are recomputed from snapshots when
// the grid is long.
std::pair<std::vector<CMat>, std::vector<CMat>> node_sweeps(const ControlProblem& p,
                                                            const ControlField& u,
                                                            const Decomposition& d, bool naive) {
  const HamiltonianModel& m = *p.model;
  const int parts = d.parts();
  const int total = p.grid.steps;
  std::vector<CMat> psi_nodes(static_cast<size_t>(parts) + 1);
  std::vector<CMat> chi_nodes(static_cast<size_t>(parts) + 1);

  CMat state = p.initial;
  psi_nodes[0] = state;
  int next = 1;
  for (int j = 0; j < total; ++j) {
    state = propagate_step(m, u.step_values(j), p.grid.dt, state);
    if (next <= parts && d.begin(next) == j + 1) {
      psi_nodes[static_cast<size_t>(next)] = state;
      ++next;
    }
  }

  const bool needs_forward = m.kind() == PropagatorKind::strang;
  // Full storage is cheaper until the trajectory outgrows a few thousand
  // states; beyond that, recompute windows from sqrt-spaced snapshots.
  const int stride = (needs_forward && total > 4096)
                         ? static_cast<int>(std::lround(std::sqrt(static_cast<double>(total))))
                         : 0;
  Trajectory full;
  std::optional<CheckpointedTrajectory> windowed;
  if (needs_forward) {
    if (stride > 0) {
      windowed.emplace(m, u, p.initial, stride);
    } else {
      full = propagate(m, u, p.initial);
    }
  }
  auto forward_at = [&](int j) -> const CMat& { return windowed ? windowed->state(j) : full[j]; };

  CMat chi = p.target;
  chi_nodes[static_cast<size_t>(parts)] = chi;
  int prev = parts - 1;
  for (int j = total - 1; j >= 0; --j) {
    const CMat* psi = needs_forward ? &forward_at(j) : nullptr;
    chi = adjoint_step_any(m, u.step_values(j), p.grid.dt, chi, psi, naive);
    if (prev >= 0 && d.begin(prev) == j) {
      chi_nodes[static_cast<size_t>(prev)] = chi;
      --prev;
    }
  }
  return {std::move(psi_nodes), std::move(chi_nodes)};
}

std::string solver_name(SolverSpec::Kind k) {
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

}  // namespace

std::vector<CMat> interpolated_waypoints(const std::vector<CMat>& psi_nodes,
                                         const std::vector<CMat>& chi_nodes,
                                         const Decomposition& d) {
  const int parts = d.parts();
  if (psi_nodes.size() != static_cast<size_t>(parts) + 1 ||
      chi_nodes.size() != static_cast<size_t>(parts) + 1) {
    throw std::invalid_argument("waypoints need one forward and one adjoint state per node");
  }
  const int total = d.node_index.back();
  std::vector<CMat> phi(static_cast<size_t>(parts) + 1);
  for (int n = 0; n <= parts; ++n) {
    const int j = d.node_index[static_cast<size_t>(n)];
    // Index-ratio weights: exactly (1, 0) at the left end and (0, 1) at the
    // right, so the sequence is pinned to the problem endpoints.
    const double a = static_cast<double>(total - j) / static_cast<double>(total);
    const double b = static_cast<double>(j) / static_cast<double>(total);
    phi[static_cast<size_t>(n)] =
        a * psi_nodes[static_cast<size_t>(n)] + b * chi_nodes[static_cast<size_t>(n)];
  }
  return phi;
}

std::pair<std::vector<CMat>, std::vector<CMat>> boundary_sweep(const ControlProblem& p,
                                                               const ControlField& u,
                                                               const Decomposition& d) {
  if (!same_grid(u.grid(), p.grid)) {
    throw std::invalid_argument("control grid does not match the problem grid");
  }
  return node_sweeps(p, u, d, /*naive=*/false);
}

std::vector<Subproblem> make_subproblems(const ControlProblem& p, const Decomposition& d,
                                         const std::vector<CMat>& initials,
                                         const std::vector<CMat>& targets, bool weighted,
                                         ObjectiveForm form) {
  const int parts = d.parts();
  if (initials.size() != static_cast<size_t>(parts) ||
      targets.size() != static_cast<size_t>(parts)) {
    throw std::invalid_argument("one initial and one target state per subinterval is required");
  }
  const double total = static_cast<double>(p.grid.steps);
  std::vector<Subproblem> tasks(static_cast<size_t>(parts));
  for (int n = 0; n < parts; ++n) {
    Subproblem& s = tasks[static_cast<size_t>(n)];
    const int b = d.begin(n);
    const int len = d.length(n);
    s.model = p.model;
    s.grid = TimeGrid{p.grid.node(b), p.grid.dt, len};
    s.initial = initials[static_cast<size_t>(n)];
    s.target = targets[static_cast<size_t>(n)];
    s.penalty = p.penalty.slice(b, d.end(n));
    const double scale = static_cast<double>(len) / total;
    for (double& a : s.penalty.values) {
      a *= scale;
    }
    s.weight = weighted ? total / static_cast<double>(len) : 1.0;
    s.form = form;
  }
  return tasks;
}

TheoremReport verify_decomposition(const ControlProblem& p, const ControlField& u, int parts) {
  Decomposition d = Decomposition::uniform(p.grid.steps, parts);
  auto [psi_nodes, chi_nodes] = boundary_sweep(p, u, d);
  std::vector<CMat> phi = interpolated_waypoints(psi_nodes, chi_nodes, d);

  std::vector<CMat> initials(phi.begin(), phi.end() - 1);
  std::vector<CMat> targets(phi.begin() + 1, phi.end());
  std::vector<Subproblem> tasks =
      make_subproblems(p, d, initials, targets, /*weighted=*/true, ObjectiveForm::tracking);

  std::vector<ControlField> u_parts;
  u_parts.reserve(static_cast<size_t>(parts));
  for (int n = 0; n < parts; ++n) {
    u_parts.push_back(restrict_field(u, d, n));
  }

  TheoremReport report;
  const double summed = parallel_functional(tasks, u_parts);
  const double global = evaluate_objective(p, u, ObjectiveForm::tracking);
  report.functional_mismatch = std::abs(summed - global);

  const RMat global_grad = objective_gradient(p, u, ObjectiveForm::tracking);
  double worst = 0.0;
  for (int n = 0; n < parts; ++n) {
    const RMat local = sub_gradient(tasks[static_cast<size_t>(n)], u_parts[static_cast<size_t>(n)]);
    const RMat slice = global_grad.middleCols(d.begin(n), d.length(n));
    worst = std::max(worst, (local - slice).cwiseAbs().maxCoeff());
  }
  report.gradient_mismatch = worst;
  return report;
}

namespace {

struct TaskSlot {
  double entry_value = 0.0;
  double error = 0.0;
  ControlField control;  // kept in memory when nothing is serialized
  CMat propagator;
  CMat psi_end;
  CMat chi_start;
  std::string wire;
  TaskStat stat;
  int guard_rejections = 0;
  int newton_fallbacks = 0;
  int gmres_iterations = 0;
};

}  // namespace

IsmRun run_ism(const ControlProblem& p, const ControlField& u0, const IsmConfig& cfg,
               const SolverSpec& solver) {
  if (!p.model) {
    throw std::invalid_argument("problem has no model");
  }
  if (!same_grid(u0.grid(), p.grid)) {
    throw std::invalid_argument("initial control grid does not match the problem grid");
  }
  if (u0.channels() != p.model->channels()) {
    throw std::invalid_argument("initial control has the wrong channel count");
  }
  if (cfg.subintervals < 1 || cfg.workers < 1 || cfg.max_outer < 0 || cfg.eta < 0.0) {
    throw std::invalid_argument("subintervals and workers must be >= 1, max_outer and eta >= 0");
  }
  const PropagatorKind kind = p.model->kind();
  const bool linear_steps = kind != PropagatorKind::strang;
  if (cfg.variant == IsmConfig::Variant::interpolated && !linear_steps) {
    throw std::invalid_argument(
        "interpolated waypoints require linear one-step flows; use the split variant for "
        "split-step states");
  }

  const int parts = cfg.subintervals;
  const Decomposition d = Decomposition::uniform(p.grid.steps, parts);
  const bool split = cfg.variant == IsmConfig::Variant::split;
  const bool direct_plan = cfg.plan == IsmConfig::BoundaryPlan::direct;

  SolverSpec inner_spec = solver;
  if (cfg.checkpoint_stride > 0) {
    inner_spec.gradient.checkpoint_stride = cfg.checkpoint_stride;
  }
  const GradientOptions& gopts = inner_spec.gradient;

  RunRecord rec;
  rec.subintervals = parts;
  rec.workers = cfg.workers;
  rec.solver = solver_name(solver.kind);
  rec.variant = split ? "split" : "interpolated";
  rec.plan = direct_plan ? "direct" : "assembled";

  std::vector<ControlField> u_parts;
  u_parts.reserve(static_cast<size_t>(parts));
  for (int n = 0; n < parts; ++n) {
    u_parts.push_back(restrict_field(u0, d, n));
  }

  std::vector<CMat> psi_nodes, chi_nodes;
  std::vector<Subproblem> tasks;

  auto rebuild_tasks = [&]() {
    if (parts == 1) {
      std::vector<CMat> initials{p.initial};
      std::vector<CMat> targets{p.target};
      tasks = make_subproblems(p, d, initials, targets, /*weighted=*/!split,
                               split ? ObjectiveForm::overlap : ObjectiveForm::tracking);
      return;
    }
    if (split) {
      std::vector<CMat> initials(psi_nodes.begin(), psi_nodes.end() - 1);
      std::vector<CMat> targets(chi_nodes.begin() + 1, chi_nodes.end());
      tasks = make_subproblems(p, d, initials, targets, /*weighted=*/false,
                               ObjectiveForm::overlap);
    } else {
      std::vector<CMat> phi = interpolated_waypoints(psi_nodes, chi_nodes, d);
      std::vector<CMat> initials(phi.begin(), phi.end() - 1);
      std::vector<CMat> targets(phi.begin() + 1, phi.end());
      tasks = make_subproblems(p, d, initials, targets, /*weighted=*/true,
                               ObjectiveForm::tracking);
    }
  };

  // Payoff of the refreshed final boundary state: exact for linear flows, and
  // for split-step states exact once the boundary refresh has caught up with
  // the control.
  auto boundary_objective = [&]() {
    const CMat& final_state = psi_nodes[static_cast<size_t>(parts)];
    double fid;
    if (split) {
      fid = state_dot(*p.model, p.target, final_state).real();
    } else {
      const CMat diff = final_state - p.target;
      const double dist = state_norm(*p.model, diff);
      fid = -0.5 * dist * dist;
    }
    return fid - weighted_l2_penalty(concat(u_parts), p.penalty);
  };

  auto compose_from_propagators = [&](const std::vector<TaskSlot>& slots) {
    psi_nodes.assign(static_cast<size_t>(parts) + 1, CMat());
    chi_nodes.assign(static_cast<size_t>(parts) + 1, CMat());
    psi_nodes[0] = p.initial;
    for (int n = 0; n < parts; ++n) {
      psi_nodes[static_cast<size_t>(n) + 1] = apply_propagator(
          *p.model, slots[static_cast<size_t>(n)].propagator, psi_nodes[static_cast<size_t>(n)]);
    }
    chi_nodes[static_cast<size_t>(parts)] = p.target;
    for (int n = parts - 1; n >= 0; --n) {
      const CMat adj = slots[static_cast<size_t>(n)].propagator.adjoint();
      chi_nodes[static_cast<size_t>(n)] =
          apply_propagator(*p.model, adj, chi_nodes[static_cast<size_t>(n) + 1]);
    }
  };

  WorkerPool pool(cfg.workers);
  std::vector<TaskSlot> slots(static_cast<size_t>(parts));
  const bool serialized = parts > 1;

  auto finite_controls = [&]() {
    for (const ControlField& u : u_parts) {
      if (!u.all_finite()) {
        return false;
      }
    }
    return true;
  };
  auto finite_nodes = [&]() {
    if (parts == 1) {
      return true;
    }
    for (const CMat& s : psi_nodes) {
      if (!s.allFinite()) {
        return false;
      }
    }
    for (const CMat& s : chi_nodes) {
      if (!s.allFinite()) {
        return false;
      }
    }
    return true;
  };

  // ---- bootstrap: boundary data and tasks for the initial control ----
  {
    IterationStat boot;
    boot.iteration = 0;
    const double wall0 = wall_seconds();
    double worker_path = 0.0;
    const double coord0 = thread_cpu_seconds();
    if (parts > 1) {
      if (!split && !direct_plan) {
        pool.run(parts, [&](int n) {
          TaskSlot& r = slots[static_cast<size_t>(n)];
          const double t0 = thread_cpu_seconds();
          r.propagator = assemble_propagator(*p.model, u_parts[static_cast<size_t>(n)]);
          const double t1 = thread_cpu_seconds();
          if (serialized) {
            std::ostringstream os;
            write_matrix_binary(os, r.propagator);
            r.wire = std::move(os).str();
          }
          const double t2 = thread_cpu_seconds();
          r.stat = TaskStat{t1 - t0, t2 - t1, r.wire.size()};
        });
        for (TaskSlot& r : slots) {
          std::istringstream is(r.wire);
          r.propagator = read_matrix_binary(is);
          worker_path = std::max(worker_path, r.stat.compute_seconds + r.stat.serialize_seconds);
          boot.tasks.push_back(r.stat);
        }
        compose_from_propagators(slots);
      } else {
        auto nodes = node_sweeps(p, concat(u_parts), d, gopts.naive_nonlinear_adjoint);
        psi_nodes = std::move(nodes.first);
        chi_nodes = std::move(nodes.second);
      }
      boot.objective = boundary_objective();
    } else {
      boot.objective = std::numeric_limits<double>::quiet_NaN();  // filled by the next phase
    }
    rebuild_tasks();
    boot.coordinator_seconds = thread_cpu_seconds() - coord0;
    boot.critical_path_seconds = boot.coordinator_seconds + worker_path;
    boot.wall_seconds = wall_seconds() - wall0;
    if (!finite_nodes()) {
      rec.aborted = true;
      rec.abort_reason = "non-finite boundary state during bootstrap";
      boot.events.push_back(rec.abort_reason);
      rec.iterations.push_back(std::move(boot));
      return IsmRun{concat(u_parts), std::move(rec)};
    }
    rec.iterations.push_back(std::move(boot));
  }

  bool aborted = false;
  for (int k = 1; k <= cfg.max_outer && !aborted; ++k) {
    IterationStat it;
    it.iteration = k;
    const double wall0 = wall_seconds();

    pool.run(parts, [&](int n) {
      TaskSlot& r = slots[static_cast<size_t>(n)];
      const double t0 = thread_cpu_seconds();
      const Subproblem& task = tasks[static_cast<size_t>(n)];
      const ControlField& u_in = u_parts[static_cast<size_t>(n)];

      r.entry_value = sub_functional(task, u_in);
      InnerResult inner = run_inner(task, u_in, inner_spec);
      r.guard_rejections = inner.guard_rejections;
      r.newton_fallbacks = inner.newton_fallbacks;
      r.gmres_iterations = inner.gmres_iterations;

      if (cfg.compute_error) {
        Subproblem plain = task;
        plain.weight = 1.0;
        r.error = error_norm({sub_gradient(plain, inner.control, gopts)});
      } else {
        r.error = 0.0;
      }

      if (serialized && !split && !direct_plan) {
        r.propagator = assemble_propagator(*p.model, inner.control);
      }
      if (serialized && split && !direct_plan) {
        // Lagged boundary refresh: new endpoint states under the updated
        // control, grown from the boundary data of the previous iteration.
        const CMat& start = psi_nodes[static_cast<size_t>(n)];
        const int len = task.grid.steps;
        if (kind == PropagatorKind::strang) {
          const int stride = gopts.checkpoint_stride;
          if (stride > 0) {
            CheckpointedTrajectory traj(*p.model, inner.control, start, stride);
            r.psi_end = traj.final_state();
            CMat chi = chi_nodes[static_cast<size_t>(n) + 1];
            for (int j = len - 1; j >= 0; --j) {
              chi = strang_adjoint_step(*p.model, inner.control.step_values(j), task.grid.dt,
                                        traj.state(j), chi, gopts.naive_nonlinear_adjoint);
            }
            r.chi_start = chi;
          } else {
            Trajectory traj = propagate(*p.model, inner.control, start);
            r.psi_end = traj.final_state();
            CMat chi = chi_nodes[static_cast<size_t>(n) + 1];
            for (int j = len - 1; j >= 0; --j) {
              chi = strang_adjoint_step(*p.model, inner.control.step_values(j), task.grid.dt,
                                        traj[j], chi, gopts.naive_nonlinear_adjoint);
            }
            r.chi_start = chi;
          }
        } else {
          r.psi_end = propagate_final(*p.model, inner.control, start);
          CMat chi = chi_nodes[static_cast<size_t>(n) + 1];
          for (int j = len - 1; j >= 0; --j) {
            chi = adjoint_step_any(*p.model, inner.control.step_values(j), task.grid.dt, chi,
                                   nullptr, gopts.naive_nonlinear_adjoint);
          }
          r.chi_start = chi;
        }
      }

      const double t1 = thread_cpu_seconds();
      if (serialized) {
        std::ostringstream os;
        write_control_binary(os, inner.control);
        if (!direct_plan) {
          if (split) {
            write_matrix_binary(os, r.psi_end);
            write_matrix_binary(os, r.chi_start);
          } else {
            write_matrix_binary(os, r.propagator);
          }
        }
        r.wire = std::move(os).str();
      } else {
        r.control = std::move(inner.control);
      }
      const double t2 = thread_cpu_seconds();
      r.stat = TaskStat{t1 - t0, t2 - t1, r.wire.size()};
    });

    const double coord0 = thread_cpu_seconds();
    double worker_path = 0.0;
    double total_error = 0.0;
    for (int n = 0; n < parts; ++n) {
      TaskSlot& r = slots[static_cast<size_t>(n)];
      if (serialized) {
        std::istringstream is(r.wire);
        u_parts[static_cast<size_t>(n)] = read_control_binary(is);
        if (!direct_plan) {
          if (split) {
            r.psi_end = read_matrix_binary(is);
            r.chi_start = read_matrix_binary(is);
          } else {
            r.propagator = read_matrix_binary(is);
          }
        }
      } else {
        u_parts[static_cast<size_t>(n)] = std::move(r.control);
      }
      worker_path = std::max(worker_path, r.stat.compute_seconds + r.stat.serialize_seconds);
      total_error += r.error;
      it.tasks.push_back(r.stat);
      if (r.guard_rejections > 0) {
        it.events.push_back("task " + std::to_string(n) + ": kept " +
                            std::to_string(r.guard_rejections) + " slices at previous values");
      }
      if (r.newton_fallbacks > 0) {
        it.events.push_back("task " + std::to_string(n) + ": " +
                            std::to_string(r.newton_fallbacks) +
                            " Newton directions replaced by gradient steps");
      }
    }

    // The sub-payoffs evaluated on entry belong to the state recorded by the
    // previous iteration; sub-interval 1 runs also take their objective there.
    IterationStat& prev = rec.iterations.back();
    prev.task_values.assign(slots.size(), 0.0);
    double entry_sum = 0.0;
    for (int n = 0; n < parts; ++n) {
      prev.task_values[static_cast<size_t>(n)] = slots[static_cast<size_t>(n)].entry_value;
      entry_sum += slots[static_cast<size_t>(n)].entry_value;
    }
    if (parts == 1) {
      prev.objective = entry_sum;
    }

    if (!finite_controls()) {
      rec.aborted = true;
      rec.abort_reason = "non-finite control after the task updates of iteration " +
                         std::to_string(k);
      it.events.push_back(rec.abort_reason);
      it.objective = std::numeric_limits<double>::quiet_NaN();
      it.coordinator_seconds = thread_cpu_seconds() - coord0;
      it.critical_path_seconds = it.coordinator_seconds + worker_path;
      it.wall_seconds = wall_seconds() - wall0;
      rec.iterations.push_back(std::move(it));
      aborted = true;
      break;
    }

    if (parts > 1) {
      if (direct_plan) {
        auto nodes = node_sweeps(p, concat(u_parts), d, gopts.naive_nonlinear_adjoint);
        psi_nodes = std::move(nodes.first);
        chi_nodes = std::move(nodes.second);
      } else if (split) {
        for (int n = 0; n < parts; ++n) {
          psi_nodes[static_cast<size_t>(n) + 1] = slots[static_cast<size_t>(n)].psi_end;
          chi_nodes[static_cast<size_t>(n)] = slots[static_cast<size_t>(n)].chi_start;
        }
        psi_nodes[0] = p.initial;
        chi_nodes[static_cast<size_t>(parts)] = p.target;
      } else {
        compose_from_propagators(slots);
      }
      if (!finite_nodes()) {
        rec.aborted = true;
        rec.abort_reason = "non-finite boundary state at iteration " + std::to_string(k);
        it.events.push_back(rec.abort_reason);
        it.objective = std::numeric_limits<double>::quiet_NaN();
        it.coordinator_seconds = thread_cpu_seconds() - coord0;
        it.critical_path_seconds = it.coordinator_seconds + worker_path;
        it.wall_seconds = wall_seconds() - wall0;
        rec.iterations.push_back(std::move(it));
        aborted = true;
        break;
      }
      it.objective = boundary_objective();
      rebuild_tasks();
    } else {
      // Filled in by the next entry evaluation (or the trailing one).
      it.objective = std::numeric_limits<double>::quiet_NaN();
    }
    if (cfg.compute_error) {
      it.error = total_error;
    }
    it.coordinator_seconds = thread_cpu_seconds() - coord0;
    it.critical_path_seconds = it.coordinator_seconds + worker_path;

    if (cfg.log_exact_objective) {
      const double i0 = thread_cpu_seconds();
      it.exact_objective = evaluate_objective(p, concat(u_parts), ObjectiveForm::overlap);
      it.instrumentation_seconds += thread_cpu_seconds() - i0;
    }

    it.wall_seconds = wall_seconds() - wall0;
    rec.iterations.push_back(std::move(it));

    if (cfg.compute_error && total_error <= cfg.eta) {
      break;
    }
  }

  if (!aborted) {
    // Trailing evaluation: the sub-payoffs of the final control, which would
    // otherwise only be computed on entry to a further iteration.
    const double i0 = thread_cpu_seconds();
    std::vector<double> finals(static_cast<size_t>(parts), 0.0);
    pool.run(parts, [&](int n) {
      finals[static_cast<size_t>(n)] =
          sub_functional(tasks[static_cast<size_t>(n)], u_parts[static_cast<size_t>(n)]);
    });
    IterationStat& last = rec.iterations.back();
    last.task_values = finals;
    if (parts == 1) {
      last.objective = finals[0];
    }
    last.instrumentation_seconds += thread_cpu_seconds() - i0;
  }

  return IsmRun{concat(u_parts), std::move(rec)};
}

}  // namespace qoc
