#pragma once

#include <memory>
#include <vector>

#include "qoc/controls.hpp"
#include "qoc/linalg.hpp"

namespace qoc {

// How states evolve over one step of size dt with control vector u:
//  - cn_dense:       column state, (Id + L) psi' = (Id - L) psi, L = i(dt/2) H(u)
//  - cn_conjugation: square state, rho' = A rho A^dagger with the same A
//  - strang:         column state on a periodic grid, kinetic/potential split
//                    with an optional cubic nonlinearity
enum class PropagatorKind { cn_dense, cn_conjugation, strang };

// A controlled model. Dense accessors are required for the cn_* kinds,
// spectral/potential accessors for strang; the unused ones throw.
class HamiltonianModel {
 public:
  virtual ~HamiltonianModel() = default;

  virtual PropagatorKind kind() const = 0;
  virtual int state_dim() const = 0;  // column length, or edge size for square states
  virtual int channels() const = 0;
  // Weight of the inner product (e.g. the grid spacing for sampled wavefunctions).
  virtual double ip_weight() const { return 1.0; }

  virtual CMat hamiltonian(const RVec& u) const;
  // dH/du_c evaluated at u (u-dependent when H is not affine in the control).
  virtual CMat control_derivative(int channel, const RVec& u) const;

  virtual const RVec& kinetic_spectrum() const;  // per Fourier mode, dft ordering
  virtual RVec potential(const RVec& u) const;
  virtual RVec potential_derivative(int channel, const RVec& u) const;
  virtual double nonlinearity() const { return 0.0; }
};

// <a, b> with the model's inner-product weight; square states use the
// trace (Frobenius) pairing.
Complex state_dot(const HamiltonianModel& m, const CMat& a, const CMat& b);
double state_norm(const HamiltonianModel& m, const CMat& a);

CMat cn_step(const CMat& h, double dt, const CMat& state);
CMat cn_conjugation_step(const CMat& h, double dt, const CMat& rho);
CMat strang_step(const HamiltonianModel& m, const RVec& u, double dt, const CMat& psi);

// One backward step of the discrete adjoint, taking chi at node j+1 to node j.
CMat cn_adjoint_step(const CMat& h, double dt, const CMat& chi_next);
CMat cn_conjugation_adjoint_step(const CMat& h, double dt, const CMat& x_next);
// Exact transpose of the (real-)linearized strang step around the stored
// forward state; `naive` drops the density-variation terms and transposes
// only the frozen-potential flow.
CMat strang_adjoint_step(const HamiltonianModel& m, const RVec& u, double dt,
                         const CMat& psi_j, const CMat& chi_next, bool naive = false);

// One backward stage plus the intermediate factors that control derivatives
// reuse, so a gradient sweep factors each step matrix exactly once.
struct ConjugationBackwardStage {
  CMat x_j;  // adjoint at node j
  CMat r1;   // (Id - L)^{-1} X_{j+1}
  CMat r2;   // (Id - L)^{-1} rho_{j+1}
};
ConjugationBackwardStage cn_conjugation_backward_stage(const CMat& h, double dt,
                                                       const CMat& x_next, const CMat& rho_next);

struct StrangBackwardStage {
  CMat chi_j;  // adjoint at node j
  CVec psi_b;  // forward state after the potential stage
  CVec chi_b;  // adjoint pulled back through the final kinetic half step
};
StrangBackwardStage strang_backward_stage(const HamiltonianModel& m, const RVec& u, double dt,
                                          const CMat& psi_j, const CMat& chi_next,
                                          bool naive = false);

CMat propagate_step(const HamiltonianModel& m, const RVec& u, double dt, const CMat& state);

struct Trajectory {
  std::vector<CMat> states;  // steps + 1 entries, node 0 .. node steps

  int steps() const { return static_cast<int>(states.size()) - 1; }
  const CMat& operator[](int j) const { return states[static_cast<size_t>(j)]; }
  const CMat& final_state() const { return states.back(); }
};

Trajectory propagate(const HamiltonianModel& m, const ControlField& u, const CMat& initial);
CMat propagate_final(const HamiltonianModel& m, const ControlField& u, const CMat& initial);

// Forward states with O(steps/stride + stride) memory; state(j) recomputes
// the window holding j from the nearest stored snapshot, tuned for the
// descending access pattern of backward sweeps.
class CheckpointedTrajectory {
 public:
  CheckpointedTrajectory(const HamiltonianModel& m, const ControlField& u,
                         const CMat& initial, int stride);

  int steps() const { return u_.steps(); }
  const CMat& state(int j) const;
  const CMat& final_state() const { return state(steps()); }

 private:
  const HamiltonianModel& model_;
  ControlField u_;
  int stride_;
  std::vector<CMat> snapshots_;          // node 0, stride, 2*stride, ...
  mutable int window_base_ = -1;
  mutable std::vector<CMat> window_;     // states at window_base_ .. window_base_+len
};

// Product of the per-step one-step matrices over the whole grid (cn kinds
// only; strang states have no dense per-step matrix here).
CMat assemble_propagator(const HamiltonianModel& m, const ControlField& u);
// Apply an assembled product M: column states get M s, square states M s M^dagger.
CMat apply_propagator(const HamiltonianModel& m, const CMat& prop, const CMat& state);

}  // namespace qoc
