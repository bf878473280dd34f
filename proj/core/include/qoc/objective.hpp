#pragma once

#include <memory>
#include <vector>

#include "qoc/controls.hpp"
#include "qoc/propagation.hpp"

namespace qoc {

// Two equivalent fidelity payoffs (they differ by a control-independent
// constant when propagation preserves norms):
//   overlap:  Re<target, psi(T)>
//   tracking: -(1/2) ||psi(T) - target||^2
// Both are penalized by (1/2) sum_j alpha_j dt ||u_j||^2.
enum class ObjectiveForm { overlap, tracking };

struct ControlProblem {
  std::shared_ptr<const HamiltonianModel> model;
  TimeGrid grid;
  CMat initial;
  CMat target;
  PenaltySchedule penalty;  // one weight per step
};

struct GradientOptions {
  // For nonlinear split-step states: transpose only the frozen-potential flow
  // (demonstrably wrong; kept to quantify the error of ignoring the
  // density-variation terms).
  bool naive_nonlinear_adjoint = false;
  // 0 stores the whole forward trajectory; a positive stride recomputes
  // windows from snapshots during the backward sweep.
  int checkpoint_stride = 0;
};

double evaluate_objective(const HamiltonianModel& m, const ControlField& u, const CMat& initial,
                          const CMat& target, const PenaltySchedule& alpha, ObjectiveForm form);
double evaluate_objective(const ControlProblem& p, const ControlField& u, ObjectiveForm form);

// Exact gradient of the discrete objective with respect to every control
// sample; entries carry the dt factor of the penalty quadrature, i.e. this is
// the gradient of the objective as a plain function of the sample matrix.
// Sign convention: ascent (the objective is maximized).
RMat objective_gradient(const HamiltonianModel& m, const ControlField& u, const CMat& initial,
                        const CMat& target, const PenaltySchedule& alpha, ObjectiveForm form,
                        const GradientOptions& opts = {});
RMat objective_gradient(const ControlProblem& p, const ControlField& u, ObjectiveForm form,
                        const GradientOptions& opts = {});

// A subinterval task: steer `initial` towards `target` over the local grid,
// judged by `form` with an already-rescaled penalty. `weight` multiplies both
// functional and gradient so that one gradient iteration on every task
// reproduces one gradient iteration of the undecomposed problem.
struct Subproblem {
  std::shared_ptr<const HamiltonianModel> model;
  TimeGrid grid;
  CMat initial;
  CMat target;
  PenaltySchedule penalty;  // local window, scaled by (local steps / global steps)
  double weight = 1.0;      // global steps / local steps, or 1 for plain tasks
  ObjectiveForm form = ObjectiveForm::tracking;
};

double sub_functional(const Subproblem& s, const ControlField& u);
RMat sub_gradient(const Subproblem& s, const ControlField& u, const GradientOptions& opts = {});

// sum_n weight_n * tracking value of task n
double parallel_functional(const std::vector<Subproblem>& tasks,
                           const std::vector<ControlField>& controls);

// Residual size of a family of raw per-task gradients: sum over all steps of
// the Euclidean norm of the per-step gradient column. For a constant gradient
// density g this approximates span * |g|.
double error_norm(const std::vector<RMat>& raw_gradients);

}  // namespace qoc
