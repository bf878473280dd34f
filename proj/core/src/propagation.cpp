#include "qoc/propagation.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <Eigen/LU>

namespace qoc {
namespace {

CMat identity_like(const CMat& h) { return CMat::Identity(h.rows(), h.cols()); }

CMat half_step_matrix(const CMat& h, double dt) {
  return Complex(0.0, 0.5 * dt) * h;
}

CVec column_of(const CMat& state) {
  if (state.cols() != 1) {
    throw std::invalid_argument("expected a column state");
  }
  return state.col(0);
}

// idft(phase .* dft(psi)) — one kinetic half step (or its adjoint with
// conjugated phases).
CVec apply_spectral_phase(const CVec& psi, const CVec& phase) {
  CVec hat = dft(psi);
  hat.array() *= phase.array();
  return idft(hat);
}

CVec kinetic_half_phase(const RVec& spectrum, double dt, bool adjoint) {
  CVec phase(spectrum.size());
  const double sign = adjoint ? 1.0 : -1.0;
  for (Eigen::Index i = 0; i < spectrum.size(); ++i) {
    phase[i] = std::polar(1.0, sign * 0.5 * dt * spectrum[i]);
  }
  return phase;
}

struct StrangMidpoint {
  CVec psi_a;  // state after the first kinetic half step
  RVec w;      // effective potential frozen for the step
};

StrangMidpoint strang_midpoint(const HamiltonianModel& m, const RVec& u, double dt,
                               const CVec& psi) {
  StrangMidpoint mid;
  mid.psi_a = apply_spectral_phase(psi, kinetic_half_phase(m.kinetic_spectrum(), dt, false));
  mid.w = m.potential(u) + m.nonlinearity() * mid.psi_a.cwiseAbs2();
  return mid;
}

}  // namespace

CMat HamiltonianModel::hamiltonian(const RVec&) const {
  throw std::logic_error("model does not provide a dense Hamiltonian");
}

CMat HamiltonianModel::control_derivative(int, const RVec&) const {
  throw std::logic_error("model does not provide dense control derivatives");
}

const RVec& HamiltonianModel::kinetic_spectrum() const {
  throw std::logic_error("model does not provide a kinetic spectrum");
}

RVec HamiltonianModel::potential(const RVec&) const {
  throw std::logic_error("model does not provide a sampled potential");
}

RVec HamiltonianModel::potential_derivative(int, const RVec&) const {
  throw std::logic_error("model does not provide sampled potential derivatives");
}

Complex state_dot(const HamiltonianModel& m, const CMat& a, const CMat& b) {
  return m.ip_weight() * (a.adjoint() * b).trace();
}

double state_norm(const HamiltonianModel& m, const CMat& a) {
  return std::sqrt(std::max(0.0, state_dot(m, a, a).real()));
}

CMat cn_step(const CMat& h, double dt, const CMat& state) {
  const CMat l = half_step_matrix(h, dt);
  const CMat id = identity_like(h);
  Eigen::PartialPivLU<CMat> plus(id + l);
  return plus.solve((id - l) * state);
}

CMat cn_conjugation_step(const CMat& h, double dt, const CMat& rho) {
  const CMat l = half_step_matrix(h, dt);
  const CMat id = identity_like(h);
  const CMat minus = id - l;
  Eigen::PartialPivLU<CMat> plus(id + l);
  const CMat g = plus.solve(minus * rho);             // A rho
  return plus.solve(minus * g.adjoint()).adjoint();   // (A rho) A^dagger
}

CMat cn_adjoint_step(const CMat& h, double dt, const CMat& chi_next) {
  const CMat l = half_step_matrix(h, dt);
  const CMat id = identity_like(h);
  Eigen::PartialPivLU<CMat> minus(id - l);
  return minus.solve((id + l) * chi_next);
}

CMat cn_conjugation_adjoint_step(const CMat& h, double dt, const CMat& x_next) {
  const CMat l = half_step_matrix(h, dt);
  const CMat id = identity_like(h);
  const CMat plus = id + l;
  Eigen::PartialPivLU<CMat> minus(id - l);
  const CMat b = plus * minus.solve(x_next);          // A^dagger X
  return (plus * minus.solve(b.adjoint())).adjoint(); // (A^dagger X) A
}

ConjugationBackwardStage cn_conjugation_backward_stage(const CMat& h, double dt,
                                                       const CMat& x_next, const CMat& rho_next) {
  const CMat l = half_step_matrix(h, dt);
  const CMat id = identity_like(h);
  const CMat plus = id + l;
  Eigen::PartialPivLU<CMat> minus(id - l);
  ConjugationBackwardStage stage;
  stage.r1 = minus.solve(x_next);
  stage.r2 = minus.solve(rho_next);
  const CMat b = plus * stage.r1;                       // A^dagger X
  stage.x_j = (plus * minus.solve(b.adjoint())).adjoint();
  return stage;
}

CMat strang_step(const HamiltonianModel& m, const RVec& u, double dt, const CMat& psi) {
  const CVec psi0 = column_of(psi);
  const StrangMidpoint mid = strang_midpoint(m, u, dt, psi0);
  CVec psi_b(psi0.size());
  for (Eigen::Index i = 0; i < psi0.size(); ++i) {
    psi_b[i] = std::polar(1.0, -dt * mid.w[i]) * mid.psi_a[i];
  }
  return apply_spectral_phase(psi_b, kinetic_half_phase(m.kinetic_spectrum(), dt, false));
}

CMat strang_adjoint_step(const HamiltonianModel& m, const RVec& u, double dt,
                         const CMat& psi_j, const CMat& chi_next, bool naive) {
  return strang_backward_stage(m, u, dt, psi_j, chi_next, naive).chi_j;
}

StrangBackwardStage strang_backward_stage(const HamiltonianModel& m, const RVec& u, double dt,
                                          const CMat& psi_j, const CMat& chi_next, bool naive) {
  const CVec psi0 = column_of(psi_j);
  const StrangMidpoint mid = strang_midpoint(m, u, dt, psi0);
  const CVec adj_phase = kinetic_half_phase(m.kinetic_spectrum(), dt, true);
  StrangBackwardStage stage;
  stage.psi_b.resize(psi0.size());
  stage.chi_b = apply_spectral_phase(column_of(chi_next), adj_phase);
  const double kappa = m.nonlinearity();
  CVec chi_a(stage.chi_b.size());
  for (Eigen::Index i = 0; i < stage.chi_b.size(); ++i) {
    const Complex flow = std::polar(1.0, -dt * mid.w[i]);
    stage.psi_b[i] = flow * mid.psi_a[i];
    if (naive) {
      chi_a[i] = std::conj(flow) * stage.chi_b[i];
    } else {
      const double density = std::norm(mid.psi_a[i]);
      const Complex p = flow * (1.0 - Complex(0.0, dt * kappa) * density);
      const Complex q = -Complex(0.0, dt * kappa) * flow * mid.psi_a[i] * mid.psi_a[i];
      chi_a[i] = std::conj(p) * stage.chi_b[i] + q * std::conj(stage.chi_b[i]);
    }
  }
  stage.chi_j = apply_spectral_phase(chi_a, adj_phase);
  return stage;
}

CMat propagate_step(const HamiltonianModel& m, const RVec& u, double dt, const CMat& state) {
  switch (m.kind()) {
    case PropagatorKind::cn_dense:
      return cn_step(m.hamiltonian(u), dt, state);
    case PropagatorKind::cn_conjugation:
      return cn_conjugation_step(m.hamiltonian(u), dt, state);
    case PropagatorKind::strang:
      return strang_step(m, u, dt, state);
  }
  throw std::logic_error("unknown propagator kind");
}

Trajectory propagate(const HamiltonianModel& m, const ControlField& u, const CMat& initial) {
  Trajectory traj;
  traj.states.reserve(static_cast<size_t>(u.steps()) + 1);
  traj.states.push_back(initial);
  for (int j = 0; j < u.steps(); ++j) {
    traj.states.push_back(propagate_step(m, u.step_values(j), u.grid().dt, traj.states.back()));
  }
  return traj;
}

CMat propagate_final(const HamiltonianModel& m, const ControlField& u, const CMat& initial) {
  CMat state = initial;
  for (int j = 0; j < u.steps(); ++j) {
    state = propagate_step(m, u.step_values(j), u.grid().dt, state);
  }
  return state;
}

CheckpointedTrajectory::CheckpointedTrajectory(const HamiltonianModel& m, const ControlField& u,
                                               const CMat& initial, int stride)
    : model_(m), u_(u), stride_(stride) {
  if (stride_ <= 0) {
    throw std::invalid_argument("checkpoint stride must be positive");
  }
  CMat state = initial;
  snapshots_.push_back(state);
  // Snapshots sit at stride multiples; any trailing partial window is
  // recomputed from the last snapshot on demand.
  for (int j = 0; j < u_.steps(); ++j) {
    state = propagate_step(model_, u_.step_values(j), u_.grid().dt, state);
    if ((j + 1) % stride_ == 0) snapshots_.push_back(state);
  }
}

const CMat& CheckpointedTrajectory::state(int j) const {
  if (j < 0 || j > steps()) {
    throw std::out_of_range("trajectory node out of range");
  }
  const int base = (j / stride_) * stride_;
  if (window_base_ != base) {
    const int len = std::min(stride_, steps() - base);
    window_.assign(1, snapshots_[static_cast<size_t>(base / stride_)]);
    window_.reserve(static_cast<size_t>(len) + 1);
    for (int i = 0; i < len; ++i) {
      window_.push_back(
          propagate_step(model_, u_.step_values(base + i), u_.grid().dt, window_.back()));
    }
    window_base_ = base;
  }
  return window_[static_cast<size_t>(j - base)];
}

CMat assemble_propagator(const HamiltonianModel& m, const ControlField& u) {
  if (m.kind() != PropagatorKind::cn_dense && m.kind() != PropagatorKind::cn_conjugation) {
    throw std::logic_error("no dense one-step matrices to assemble for this propagator kind");
  }
  const int dim = m.state_dim();
  CMat prod = CMat::Identity(dim, dim);
  for (int j = 0; j < u.steps(); ++j) {
    const CMat l = half_step_matrix(m.hamiltonian(u.step_values(j)), u.grid().dt);
    const CMat id = CMat::Identity(dim, dim);
    Eigen::PartialPivLU<CMat> plus(id + l);
    prod = plus.solve((id - l) * prod);
  }
  return prod;
}

CMat apply_propagator(const HamiltonianModel& m, const CMat& prop, const CMat& state) {
  switch (m.kind()) {
    case PropagatorKind::cn_dense:
      return prop * state;
    case PropagatorKind::cn_conjugation:
      return prop * state * prop.adjoint();
    case PropagatorKind::strang:
      break;
  }
  throw std::logic_error("no assembled form for this propagator kind");
}

}  // namespace qoc
