#pragma once

#include <memory>
#include <utility>
#include <vector>

#include "qoc/objective.hpp"
#include "qoc/propagation.hpp"

namespace qoc {

// Finite-dimensional model
//   H(u) = H0 + sum_c u_c A_c + sum_c (u_c^2 / 2) B_c
// with Hermitian H0, A_c, B_c; quadratic terms may be omitted.
class DenseModel : public HamiltonianModel {
 public:
  DenseModel(PropagatorKind kind, CMat h0, std::vector<CMat> linear,
             std::vector<CMat> quadratic = {});

  PropagatorKind kind() const override { return kind_; }
  int state_dim() const override { return static_cast<int>(h0_.rows()); }
  int channels() const override { return static_cast<int>(linear_.size()); }
  CMat hamiltonian(const RVec& u) const override;
  CMat control_derivative(int channel, const RVec& u) const override;

 private:
  PropagatorKind kind_;
  CMat h0_;
  std::vector<CMat> linear_;
  std::vector<CMat> quadratic_;  // empty, or one matrix per channel
};

// One-dimensional periodic-grid model
//   i d/dt psi = (-(1/2) d^2/dx^2 + V(x, u) + kappa |psi|^2) psi
// sampled on n equidistant points of [x_min, x_max); the trap potential
//   V(x, l) = (1/2)(|x| - l d / 2)^2        for |x| > l d / 4
//             (1/2)((l d)^2 / 8 - x^2)      otherwise
// is steered by the single control l. States are normalized with the grid
// inner product <a,b> = dx sum conj(a) b.
class TrappedCondensateModel : public HamiltonianModel {
 public:
  TrappedCondensateModel(int points, double x_min, double x_max, double trap_distance,
                         double kappa);

  PropagatorKind kind() const override { return PropagatorKind::strang; }
  int state_dim() const override { return static_cast<int>(x_.size()); }
  int channels() const override { return 1; }
  double ip_weight() const override { return dx_; }
  const RVec& kinetic_spectrum() const override { return kinetic_; }
  RVec potential(const RVec& u) const override;
  RVec potential_derivative(int channel, const RVec& u) const override;
  double nonlinearity() const override { return kappa_; }

  const RVec& grid_points() const { return x_; }
  double dx() const { return dx_; }
  double trap_distance() const { return trap_distance_; }

 private:
  RVec x_;
  RVec kinetic_;
  double dx_;
  double trap_distance_;
  double kappa_;
};

// Self-consistent lowest stationary state of the model at a frozen control,
// found by normalized imaginary-time evolution of the same splitting.
struct StationaryState {
  CVec psi;
  double energy = 0.0;          // kinetic + potential + (kappa/2) interaction
  double chemical_potential = 0.0;
  double residual = 0.0;        // ||(H[psi] - mu) psi|| in the grid norm
  int iterations = 0;
};
StationaryState ground_state(const TrappedCondensateModel& m, const RVec& u_frozen,
                             double imaginary_dt = 1e-2, double energy_tol = 1e-10,
                             int max_iterations = 200000);

// Coupled spin-1/2 chain in the density-matrix picture: free coupling
// 2 pi j_coupling sum_{(a,b)} Iz_a Iz_b over the given 1-based pairs, local
// x/y controls on every spin (channels ordered x_1, y_1, x_2, y_2, ...),
// initial state Ix on the first spin, target observable Ix on the last.
ControlProblem spin_chain_problem(int n_spins, const std::vector<std::pair<int, int>>& couplings,
                                  double j_coupling, double control_time, int steps, double alpha);

// Planar rotor in the m=0 angular-momentum basis j = 0..j_max driven by a
// linearly polarized field: H(u) = B j(j+1) - mu0 cos(theta) u
// - (u^2/2)((a_par - a_perp) cos^2(theta) + a_perp). The target is the
// largest-eigenvalue eigenvector of cos(theta) restricted to j <= 4, the
// penalty weight is time-dependent: penalty_floor + penalty_peak ((t-T/2)/(T/2))^6.
ControlProblem rotor_problem(int j_max, double rotational_constant, double dipole,
                             double polarizability_parallel, double polarizability_perp,
                             double control_time, int steps, double penalty_peak,
                             double penalty_floor);

// Condensate transfer: steer the self-consistent ground state of the trap at
// l = 1 to the one at l = 0 (both computed here), no control penalty.
ControlProblem condensate_problem(int points, double x_min, double x_max, double trap_distance,
                                  double kappa, double control_time, int steps);

// cos(theta) couplings in the m=0 basis: off-diagonal (j+1)/sqrt((2j+1)(2j+3)).
CMat orientation_coupling(int j_max);

// Angular momentum operators (sigma_a / 2) acting on spin k (0-based) of an
// n-spin register.
CMat spin_operator(int n_spins, int k, char axis);

// Deterministic helpers for first-guess controls.
ControlField random_control(TimeGrid grid, int channels, unsigned seed, double amplitude);
ControlField ramp_control(TimeGrid grid, double from, double to);  // midpoint-sampled

}  // namespace qoc
