#pragma once

#include <functional>

#include "qoc/objective.hpp"

namespace qoc {

struct SolverSpec {
  enum class Kind { gradient, monotonic, newton };
  Kind kind = Kind::gradient;

  double step_size = 1.0;     // rho of the constant-step ascent update
  int inner_iterations = 1;   // solver sweeps per outer iteration

  // Monotonic sweep: implicit per-slice update solved by fixed point.
  double fixed_point_tol = 1e-12;
  int fixed_point_max_iter = 50;

  // Newton direction via restarted GMRES on finite-difference
  // Hessian-vector products.
  int gmres_restart = 30;
  int gmres_max_iter = 200;
  double gmres_tol = 1e-6;
  double hvp_scale = 1e-5;

  GradientOptions gradient;  // shared adjoint/checkpoint options
};

struct InnerResult {
  ControlField control;
  int guard_rejections = 0;  // monotonic slices kept at their previous value
  int newton_fallbacks = 0;  // Newton directions replaced by a gradient step
  int gmres_iterations = 0;
};

// u + rho * (weighted) task gradient.
ControlField gradient_step(const Subproblem& s, const ControlField& u, double rho,
                           const GradientOptions& opts = {});

// Forward sweep that rebuilds the control slice by slice; every accepted
// slice provably does not decrease the task payoff, and slices whose exact
// increment comes out negative keep their previous value. Requires a single
// control channel, column states with the one-step rational scheme, and
// strictly positive penalty weights.
InnerResult monotonic_step(const Subproblem& s, const ControlField& u, const SolverSpec& spec);

// Newton update: solve (Hessian) d = -gradient by matrix-free GMRES and apply
// u + d; falls back to a plain gradient step when d is not an ascent
// direction.
InnerResult newton_step(const Subproblem& s, const ControlField& u, const SolverSpec& spec);

// Newton direction machinery on plain sample matrices, exposed so the solve
// can be exercised against synthetic quadratics.
struct NewtonReport {
  int gmres_iterations = 0;
  double relative_residual = 0.0;
  bool fell_back = false;
};
RMat newton_direction(const std::function<RMat(const RMat&)>& grad_fn, const RMat& u,
                      const RMat& g0, const SolverSpec& spec, NewtonReport* report = nullptr);

InnerResult run_inner(const Subproblem& s, const ControlField& u, const SolverSpec& spec);

}  // namespace qoc
