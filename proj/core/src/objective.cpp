#include "qoc/objective.hpp"

#include <cmath>
#include <functional>
#include <optional>
#include <stdexcept>

#include <Eigen/LU>

namespace qoc {
namespace {

void check_shapes(const HamiltonianModel& m, const ControlField& u, const PenaltySchedule& alpha) {
  if (u.channels() != m.channels()) {
    throw std::invalid_argument("control field channel count does not match model");
  }
  if (alpha.steps() != u.steps()) {
    throw std::invalid_argument("penalty schedule length does not match control grid");
  }
}

double fidelity_payoff(const HamiltonianModel& m, const CMat& final_state, const CMat& target,
                       ObjectiveForm form) {
  if (form == ObjectiveForm::overlap) {
    return state_dot(m, target, final_state).real();
  }
  const CMat diff = final_state - target;
  return -0.5 * state_dot(m, diff, diff).real();
}

CMat adjoint_seed(const CMat& final_state, const CMat& target, ObjectiveForm form) {
  if (form == ObjectiveForm::overlap) return target;
  return target - final_state;
}

// Backward sweep with per-kind control-derivative rows. `state_at` must allow
// descending access over 0..steps.
RMat gradient_sweep(const HamiltonianModel& m, const ControlField& u,
                    const std::function<const CMat&(int)>& state_at, const CMat& seed,
                    const PenaltySchedule& alpha, const GradientOptions& opts) {
  const int steps = u.steps();
  const double dt = u.grid().dt;
  RMat g(u.channels(), steps);
  CMat chi = seed;
  for (int j = steps - 1; j >= 0; --j) {
    const RVec uj = u.step_values(j);
    switch (m.kind()) {
      case PropagatorKind::cn_dense: {
        const CMat h = m.hamiltonian(uj);
        const CMat chi_next = chi;
        chi = cn_adjoint_step(h, dt, chi_next);
        const CMat chi_sum = chi + chi_next;
        const CMat psi_sum = state_at(j) + state_at(j + 1);
        for (int c = 0; c < u.channels(); ++c) {
          g(c, j) = -alpha[j] * dt * u(c, j) +
                    0.25 * dt *
                        state_dot(m, chi_sum, m.control_derivative(c, uj) * psi_sum).imag();
        }
        break;
      }
      case PropagatorKind::cn_conjugation: {
        const CMat h = m.hamiltonian(uj);
        const auto stage = cn_conjugation_backward_stage(h, dt, chi, state_at(j + 1));
        chi = stage.x_j;
        for (int c = 0; c < u.channels(); ++c) {
          const Complex tr =
              (stage.r1.adjoint() * m.control_derivative(c, uj) * stage.r2).trace();
          g(c, j) = -alpha[j] * dt * u(c, j) + 2.0 * dt * tr.imag();
        }
        break;
      }
      case PropagatorKind::strang: {
        const auto stage =
            strang_backward_stage(m, uj, dt, state_at(j), chi, opts.naive_nonlinear_adjoint);
        chi = stage.chi_j;
        for (int c = 0; c < u.channels(); ++c) {
          const RVec dv = m.potential_derivative(c, uj);
          Complex ip(0.0, 0.0);
          for (Eigen::Index i = 0; i < dv.size(); ++i) {
            ip += std::conj(stage.chi_b[i]) * dv[i] * stage.psi_b[i];
          }
          g(c, j) = -alpha[j] * dt * u(c, j) + dt * m.ip_weight() * ip.imag();
        }
        break;
      }
    }
  }
  return g;
}

}  // namespace

double evaluate_objective(const HamiltonianModel& m, const ControlField& u, const CMat& initial,
                          const CMat& target, const PenaltySchedule& alpha, ObjectiveForm form) {
  check_shapes(m, u, alpha);
  const CMat final_state = propagate_final(m, u, initial);
  return fidelity_payoff(m, final_state, target, form) - weighted_l2_penalty(u, alpha);
}

double evaluate_objective(const ControlProblem& p, const ControlField& u, ObjectiveForm form) {
  if (!same_grid(p.grid, u.grid())) {
    throw std::invalid_argument("control field grid does not match problem grid");
  }
  return evaluate_objective(*p.model, u, p.initial, p.target, p.penalty, form);
}

RMat objective_gradient(const HamiltonianModel& m, const ControlField& u, const CMat& initial,
                        const CMat& target, const PenaltySchedule& alpha, ObjectiveForm form,
                        const GradientOptions& opts) {
  check_shapes(m, u, alpha);
  if (opts.checkpoint_stride > 0) {
    CheckpointedTrajectory traj(m, u, initial, opts.checkpoint_stride);
    const CMat seed = adjoint_seed(traj.final_state(), target, form);
    return gradient_sweep(
        m, u, [&traj](int j) -> const CMat& { return traj.state(j); }, seed, alpha, opts);
  }
  const Trajectory traj = propagate(m, u, initial);
  const CMat seed = adjoint_seed(traj.final_state(), target, form);
  return gradient_sweep(
      m, u, [&traj](int j) -> const CMat& { return traj[j]; }, seed, alpha, opts);
}

RMat objective_gradient(const ControlProblem& p, const ControlField& u, ObjectiveForm form,
                        const GradientOptions& opts) {
  if (!same_grid(p.grid, u.grid())) {
    throw std::invalid_argument("control field grid does not match problem grid");
  }
  return objective_gradient(*p.model, u, p.initial, p.target, p.penalty, form, opts);
}

double sub_functional(const Subproblem& s, const ControlField& u) {
  return s.weight * evaluate_objective(*s.model, u, s.initial, s.target, s.penalty, s.form);
}

RMat sub_gradient(const Subproblem& s, const ControlField& u, const GradientOptions& opts) {
  return s.weight *
         objective_gradient(*s.model, u, s.initial, s.target, s.penalty, s.form, opts);
}

double parallel_functional(const std::vector<Subproblem>& tasks,
                           const std::vector<ControlField>& controls) {
  if (tasks.size() != controls.size()) {
    throw std::invalid_argument("one control field per task is required");
  }
  double acc = 0.0;
  for (size_t n = 0; n < tasks.size(); ++n) {
    acc += sub_functional(tasks[n], controls[n]);
  }
  return acc;
}

double error_norm(const std::vector<RMat>& raw_gradients) {
  double acc = 0.0;
  for (const RMat& g : raw_gradients) {
    for (Eigen::Index j = 0; j < g.cols(); ++j) {
      acc += g.col(j).norm();
    }
  }
  return acc;
}

}  // namespace qoc
