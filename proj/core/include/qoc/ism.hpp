#pragma once

#include <utility>
#include <vector>

#include "qoc/objective.hpp"
#include "qoc/optimizers.hpp"
#include "qoc/runtime.hpp"

namespace qoc {

struct IsmConfig {
  int subintervals = 1;
  int workers = 1;
  double eta = 1e-3;   // stop once the summed task-gradient residual drops below
  int max_outer = 50;  // hard cap on outer iterations

  // How subinterval tasks are built from the two global trajectories:
  //  - interpolated: waypoints blend the forward and adjoint node states; each
  //    task tracks its right waypoint (linear one-step flows only).
  //  - split: task initial states sit on the forward trajectory, task targets
  //    on the adjoint one, paired by the overlap payoff (required for, and
  //    primarily useful with, nonlinear flows).
  enum class Variant { interpolated, split };
  Variant variant = Variant::interpolated;

  // How boundary node states are refreshed each iteration. assembled: workers
  // return per-subinterval propagator products (linear one-step flows) or
  // updated endpoint states (split variant; the refresh then trails the
  // control update by one iteration) and the coordinator chains them. direct:
  // the coordinator re-sweeps the full grid itself — serial, but with an
  // arithmetic order independent of the number of subintervals.
  enum class BoundaryPlan { assembled, direct };
  BoundaryPlan plan = BoundaryPlan::assembled;

  bool compute_error = true;        // evaluate the stopping residual each iteration
  bool log_exact_objective = false; // extra full propagation per iteration
  int checkpoint_stride = 0;        // forwarded to gradient sweeps (0 = store all)
};

// Waypoints phi_n = ((J - j_n)/J) psi_n + (j_n/J) chi_n at the decomposition
// nodes; the end weights are exactly 0 and 1, so the sequence is pinned to
// psi_0 and chi_N.
std::vector<CMat> interpolated_waypoints(const std::vector<CMat>& psi_nodes,
                                         const std::vector<CMat>& chi_nodes,
                                         const Decomposition& d);

// Forward and adjoint node states of the undecomposed problem at the
// decomposition boundaries (adjoint seeded with the target and swept through
// the exact one-step transposes).
std::pair<std::vector<CMat>, std::vector<CMat>> boundary_sweep(const ControlProblem& p,
                                                               const ControlField& u,
                                                               const Decomposition& d);

// One task per subinterval; initials[n] seeds the local propagation, and
// targets[n] is judged at the right end of subinterval n with `form`. When
// `weighted`, task n carries weight J/len_n and its penalty is scaled by
// len_n/J, so summed task values and gradients reproduce the undecomposed
// ones.
std::vector<Subproblem> make_subproblems(const ControlProblem& p, const Decomposition& d,
                                         const std::vector<CMat>& initials,
                                         const std::vector<CMat>& targets, bool weighted,
                                         ObjectiveForm form);

// Consistency of the decomposition against the undecomposed problem for the
// given control: the summed weighted task values against the global
// distance-form objective, and the concatenated weighted task gradients
// against the global gradient (largest entry mismatch).
struct TheoremReport {
  double functional_mismatch = 0.0;
  double gradient_mismatch = 0.0;
};
TheoremReport verify_decomposition(const ControlProblem& p, const ControlField& u, int parts);

struct IsmRun {
  ControlField control;
  RunRecord record;
};

IsmRun run_ism(const ControlProblem& p, const ControlField& u0, const IsmConfig& cfg,
               const SolverSpec& solver);

}  // namespace qoc
