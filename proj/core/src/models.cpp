#include "qoc/models.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>

namespace qoc {
namespace {

constexpr double kPi = 3.14159265358979323846;

void require(bool ok, const std::string& msg) {
  if (!ok) throw std::invalid_argument(msg);
}

void check_hermitian(const CMat& m, const std::string& what) {
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  if (hermiticity_defect(m) > 1e-10 * scale) {
    throw std::invalid_argument(what + " must be Hermitian");
  }
}

CVec dft_apply_real_spectrum(const CVec& psi, const RVec& spectrum) {
  CVec hat = dft(psi);
  for (Eigen::Index i = 0; i < hat.size(); ++i) hat[i] *= spectrum[i];
  return idft(hat);
}

}  // namespace

DenseModel::DenseModel(PropagatorKind kind, CMat h0, std::vector<CMat> linear,
                       std::vector<CMat> quadratic)
    : kind_(kind), h0_(std::move(h0)), linear_(std::move(linear)),
      quadratic_(std::move(quadratic)) {
  require(kind_ == PropagatorKind::cn_dense || kind_ == PropagatorKind::cn_conjugation,
          "DenseModel supports only the dense propagator kinds");
  require(h0_.rows() == h0_.cols() && h0_.rows() > 0, "free Hamiltonian must be square");
  require(!linear_.empty(), "at least one control channel is required");
  require(quadratic_.empty() || quadratic_.size() == linear_.size(),
          "quadratic terms must be absent or given per channel");
  check_hermitian(h0_, "free Hamiltonian");
  for (const CMat& a : linear_) {
    require(a.rows() == h0_.rows() && a.cols() == h0_.cols(),
            "control operator dimension mismatch");
    check_hermitian(a, "control operator");
  }
  for (const CMat& b : quadratic_) {
    require(b.rows() == h0_.rows() && b.cols() == h0_.cols(),
            "quadratic operator dimension mismatch");
    check_hermitian(b, "quadratic operator");
  }
}

CMat DenseModel::hamiltonian(const RVec& u) const {
  require(static_cast<int>(u.size()) == channels(), "control vector size mismatch");
  CMat h = h0_;
  for (size_t c = 0; c < linear_.size(); ++c) {
    h += u[static_cast<Eigen::Index>(c)] * linear_[c];
  }
  for (size_t c = 0; c < quadratic_.size(); ++c) {
    const double uc = u[static_cast<Eigen::Index>(c)];
    h += (0.5 * uc * uc) * quadratic_[c];
  }
  return h;
}

CMat DenseModel::control_derivative(int channel, const RVec& u) const {
  require(channel >= 0 && channel < channels(), "channel index out of range");
  if (quadratic_.empty()) return linear_[static_cast<size_t>(channel)];
  return linear_[static_cast<size_t>(channel)] +
         u[channel] * quadratic_[static_cast<size_t>(channel)];
}

TrappedCondensateModel::TrappedCondensateModel(int points, double x_min, double x_max,
                                               double trap_distance, double kappa)
    : trap_distance_(trap_distance), kappa_(kappa) {
  require(points > 1, "grid needs at least two points");
  require(x_max > x_min, "empty space domain");
  require(trap_distance > 0.0, "trap distance must be positive");
  const double length = x_max - x_min;
  dx_ = length / points;
  x_.resize(points);
  kinetic_.resize(points);
  for (int i = 0; i < points; ++i) {
    x_[i] = x_min + i * dx_;
    const int folded = (i <= points / 2) ? i : i - points;
    const double k = 2.0 * kPi * folded / length;
    kinetic_[i] = 0.5 * k * k;
  }
}

RVec TrappedCondensateModel::potential(const RVec& u) const {
  require(u.size() == 1, "single control channel expected");
  const double l = u[0];
  const double ld = l * trap_distance_;
  RVec v(x_.size());
  for (Eigen::Index i = 0; i < x_.size(); ++i) {
    const double ax = std::abs(x_[i]);
    if (ax > 0.25 * ld) {
      const double r = ax - 0.5 * ld;
      v[i] = 0.5 * r * r;
    } else {
      v[i] = 0.5 * (0.125 * ld * ld - x_[i] * x_[i]);
    }
  }
  return v;
}

RVec TrappedCondensateModel::potential_derivative(int channel, const RVec& u) const {
  require(channel == 0, "single control channel expected");
  const double l = u[0];
  const double d = trap_distance_;
  const double ld = l * d;
  RVec dv(x_.size());
  for (Eigen::Index i = 0; i < x_.size(); ++i) {
    const double ax = std::abs(x_[i]);
    if (ax > 0.25 * ld) {
      dv[i] = -0.5 * d * (ax - 0.5 * ld);
    } else {
      dv[i] = 0.125 * l * d * d;
    }
  }
  return dv;
}

StationaryState ground_state(const TrappedCondensateModel& m, const RVec& u_frozen,
                             double imaginary_dt, double energy_tol, int max_iterations) {
  const RVec v = m.potential(u_frozen);
  const RVec& kin = m.kinetic_spectrum();
  const double dx = m.dx();
  const int n = m.state_dim();
  const double kappa = m.nonlinearity();

  CVec half_kin(n);
  for (int i = 0; i < n; ++i) half_kin[i] = std::exp(-0.5 * imaginary_dt * kin[i]);

  CVec psi(n);
  for (int i = 0; i < n; ++i) psi[i] = std::exp(-0.5 * m.grid_points()[i] * m.grid_points()[i]);
  psi /= std::sqrt(dx) * psi.norm();

  const auto energy_of = [&](const CVec& s) {
    const CVec hat = dft(s);
    double kin_e = 0.0;
    for (int i = 0; i < n; ++i) kin_e += kin[i] * std::norm(hat[i]);
    double pot_e = 0.0, int_e = 0.0;
    for (int i = 0; i < n; ++i) {
      const double den = std::norm(s[i]);
      pot_e += v[i] * den;
      int_e += den * den;
    }
    return dx * (kin_e + pot_e + 0.5 * kappa * int_e);
  };

  StationaryState out;
  double energy = energy_of(psi);
  int k = 0;
  for (; k < max_iterations; ++k) {
    CVec hat = dft(psi);
    hat.array() *= half_kin.array();
    CVec psi_a = idft(hat);
    for (int i = 0; i < n; ++i) {
      const double w = v[i] + kappa * std::norm(psi_a[i]);
      psi_a[i] *= std::exp(-imaginary_dt * w);
    }
    hat = dft(psi_a);
    hat.array() *= half_kin.array();
    psi = idft(hat);
    psi /= std::sqrt(dx) * psi.norm();
    const double next = energy_of(psi);
    const bool done = std::abs(next - energy) < energy_tol;
    energy = next;
    if (done) {
      ++k;
      break;
    }
  }

  // The imaginary-time fixed point inherits an O(dt^2) splitting bias, so
  // polish with a normalized gradient flow on the exact discrete energy:
  // backtracked steps along -(H[psi] - mu) psi keep the energy monotone, and
  // the only fixed points are true discrete stationary states.
  const auto apply_h = [&](const CVec& s) {
    CVec h_psi = dft_apply_real_spectrum(s, kin);
    for (int i = 0; i < n; ++i) {
      h_psi[i] += (v[i] + kappa * std::norm(s[i])) * s[i];
    }
    return h_psi;
  };
  const auto residual_of = [&](const CVec& s, double chem) {
    CVec h_psi = apply_h(s);
    h_psi -= chem * s;
    return std::sqrt(dx) * h_psi.norm();
  };

  double step = imaginary_dt;
  double energy_now = energy_of(psi);
  double residual = std::numeric_limits<double>::infinity();
  for (int s = 0; s < 20000; ++s) {
    const CVec h_psi = apply_h(psi);
    const double mu_now = dx * psi.dot(h_psi).real();
    const CVec r = h_psi - mu_now * psi;
    residual = std::sqrt(dx) * r.norm();
    if (residual < 1e-12) {
      break;
    }
    bool accepted = false;
    for (int back = 0; back < 60 && !accepted; ++back) {
      CVec trial = psi - step * r;
      trial /= std::sqrt(dx) * trial.norm();
      const double e_trial = energy_of(trial);
      if (e_trial <= energy_now + 4e-16 * (1.0 + std::abs(energy_now))) {
        psi = std::move(trial);
        energy_now = e_trial;
        accepted = true;
        step *= 1.25;
      } else {
        step *= 0.5;
      }
    }
    ++k;
    if (!accepted) {
      break;  // descent stalled at the rounding floor
    }
  }

  // Energy-comparison line searches stall once energy differences drop below
  // rounding, which leaves the residual near sqrt(eps). Finish with damped
  // self-consistent diagonalization: at a frozen density the effective
  // Hamiltonian is linear, so its lowest eigenvector is exact to rounding,
  // and mixing densities removes the remaining self-consistency gap.
  {
    CMat kinetic_dense(n, n);
    for (int c = 0; c < n; ++c) {
      CVec e = CVec::Zero(n);
      e[c] = 1.0;
      kinetic_dense.col(c) = dft_apply_real_spectrum(e, kin);
    }
    kinetic_dense = 0.5 * (kinetic_dense + kinetic_dense.adjoint().eval());
    RVec density = psi.cwiseAbs2();
    double best = residual;
    int stale = 0;
    for (int s = 0; s < 500 && best > 1e-13; ++s) {
      CMat h_eff = kinetic_dense;
      for (int i = 0; i < n; ++i) h_eff(i, i) += v[i] + kappa * density[i];
      const auto [values, vectors] = eig_hermitian(h_eff);
      CVec candidate = vectors.col(0) / std::sqrt(dx);
      const double mu_candidate = dx * candidate.dot(apply_h(candidate)).real();
      const double r = residual_of(candidate, mu_candidate);
      if (r < best) {
        best = r;
        psi = std::move(candidate);
        stale = 0;
      } else if (++stale > 25) {
        break;  // self-consistency loop no longer improving
      }
      density = 0.5 * density + 0.5 * psi.cwiseAbs2();
      ++k;
    }
    residual = best;
  }

  // Deterministic global phase: largest component real and positive.
  int pivot = 0;
  for (int i = 1; i < n; ++i) {
    if (std::abs(psi[i]) > std::abs(psi[pivot])) pivot = i;
  }
  if (std::abs(psi[pivot]) > 0.0) {
    psi *= std::conj(psi[pivot]) / std::abs(psi[pivot]);
  }

  out.psi = psi;
  out.energy = energy_of(psi);
  out.iterations = k;

  double mu = 0.0;
  {
    const CVec hat = dft(psi);
    double kin_e = 0.0;
    for (int i = 0; i < n; ++i) kin_e += kin[i] * std::norm(hat[i]);
    double pot_e = 0.0, int_e = 0.0;
    for (int i = 0; i < n; ++i) {
      const double den = std::norm(psi[i]);
      pot_e += v[i] * den;
      int_e += den * den;
    }
    mu = dx * (kin_e + pot_e + kappa * int_e);
  }
  out.chemical_potential = mu;
  out.residual = residual_of(psi, mu);
  return out;
}

CMat spin_operator(int n_spins, int k, char axis) {
  require(n_spins > 0, "need at least one spin");
  require(k >= 0 && k < n_spins, "spin index out of range");
  CMat s(2, 2);
  switch (axis) {
    case 'x':
      s << Complex(0, 0), Complex(0.5, 0), Complex(0.5, 0), Complex(0, 0);
      break;
    case 'y':
      s << Complex(0, 0), Complex(0, -0.5), Complex(0, 0.5), Complex(0, 0);
      break;
    case 'z':
      s << Complex(0.5, 0), Complex(0, 0), Complex(0, 0), Complex(-0.5, 0);
      break;
    default:
      throw std::invalid_argument("axis must be one of x, y, z");
  }
  CMat op = CMat::Identity(1, 1);
  for (int i = 0; i < n_spins; ++i) {
    op = kron(op, i == k ? s : CMat::Identity(2, 2));
  }
  return op;
}

ControlProblem spin_chain_problem(int n_spins, const std::vector<std::pair<int, int>>& couplings,
                                  double j_coupling, double control_time, int steps,
                                  double alpha) {
  require(n_spins >= 2, "need at least two spins");
  require(!couplings.empty(), "need at least one coupled pair");
  const int dim = 1 << n_spins;
  CMat h0 = CMat::Zero(dim, dim);
  for (const auto& [a, b] : couplings) {
    require(a >= 1 && a <= n_spins && b >= 1 && b <= n_spins && a != b,
            "coupled pair indices must be distinct spins (1-based)");
    h0 += 2.0 * kPi * j_coupling *
          (spin_operator(n_spins, a - 1, 'z') * spin_operator(n_spins, b - 1, 'z'));
  }
  std::vector<CMat> controls;
  controls.reserve(static_cast<size_t>(2 * n_spins));
  for (int k = 0; k < n_spins; ++k) {
    controls.push_back(spin_operator(n_spins, k, 'x'));
    controls.push_back(spin_operator(n_spins, k, 'y'));
  }
  ControlProblem p;
  p.model = std::make_shared<DenseModel>(PropagatorKind::cn_conjugation, std::move(h0),
                                         std::move(controls));
  p.grid = TimeGrid::over(0.0, control_time, steps);
  p.initial = spin_operator(n_spins, 0, 'x');
  p.target = spin_operator(n_spins, n_spins - 1, 'x');
  p.penalty = PenaltySchedule::constant(alpha, steps);
  return p;
}

CMat orientation_coupling(int j_max) {
  require(j_max >= 1, "need at least two angular momentum levels");
  const int dim = j_max + 1;
  CMat m = CMat::Zero(dim, dim);
  for (int j = 0; j < j_max; ++j) {
    const double c = (j + 1.0) / std::sqrt((2.0 * j + 1.0) * (2.0 * j + 3.0));
    m(j, j + 1) = c;
    m(j + 1, j) = c;
  }
  return m;
}

ControlProblem rotor_problem(int j_max, double rotational_constant, double dipole,
                             double polarizability_parallel, double polarizability_perp,
                             double control_time, int steps, double penalty_peak,
                             double penalty_floor) {
  require(j_max >= 4, "the target lives in the j <= 4 subspace");
  const int dim = j_max + 1;
  CMat h0 = CMat::Zero(dim, dim);
  for (int j = 0; j <= j_max; ++j) h0(j, j) = rotational_constant * j * (j + 1.0);
  const CMat cosm = orientation_coupling(j_max);
  const CMat linear = -dipole * cosm;
  const CMat quadratic =
      -((polarizability_parallel - polarizability_perp) * (cosm * cosm) +
        polarizability_perp * CMat::Identity(dim, dim));

  ControlProblem p;
  p.model = std::make_shared<DenseModel>(PropagatorKind::cn_dense, h0,
                                         std::vector<CMat>{linear},
                                         std::vector<CMat>{quadratic});
  p.grid = TimeGrid::over(0.0, control_time, steps);
  p.initial = CMat::Zero(dim, 1);
  p.initial(0, 0) = 1.0;

  const auto [evals, evecs] = eig_hermitian(orientation_coupling(4));
  CVec top = evecs.col(evals.size() - 1);
  Eigen::Index pivot = 0;
  top.cwiseAbs().maxCoeff(&pivot);
  top *= std::conj(top[pivot]) / std::abs(top[pivot]);
  p.target = CMat::Zero(dim, 1);
  p.target.block(0, 0, top.size(), 1) = top;

  const double half = 0.5 * control_time;
  p.penalty = PenaltySchedule::from_function(p.grid, [=](double t) {
    const double s = (t - half) / half;
    const double s2 = s * s;
    return penalty_peak * s2 * s2 * s2 + penalty_floor;
  });
  return p;
}

ControlProblem condensate_problem(int points, double x_min, double x_max, double trap_distance,
                                  double kappa, double control_time, int steps) {
  auto model = std::make_shared<TrappedCondensateModel>(points, x_min, x_max, trap_distance,
                                                        kappa);
  RVec u1(1), u0(1);
  u1[0] = 1.0;
  u0[0] = 0.0;
  const StationaryState from = ground_state(*model, u1);
  const StationaryState to = ground_state(*model, u0);

  ControlProblem p;
  p.model = model;
  p.grid = TimeGrid::over(0.0, control_time, steps);
  p.initial = from.psi;
  p.target = to.psi;
  p.penalty = PenaltySchedule::constant(0.0, steps);
  return p;
}

ControlField random_control(TimeGrid grid, int channels, unsigned seed, double amplitude) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> dist(-amplitude, amplitude);
  ControlField u(grid, channels);
  for (int c = 0; c < channels; ++c) {
    for (int j = 0; j < grid.steps; ++j) u.at(c, j) = dist(rng);
  }
  return u;
}

ControlField ramp_control(TimeGrid grid, double from, double to) {
  ControlField u(grid, 1);
  const double span = grid.span();
  for (int j = 0; j < grid.steps; ++j) {
    const double mid = grid.node(j) + 0.5 * grid.dt - grid.t_start;
    u.at(0, j) = from + (to - from) * (mid / span);
  }
  return u;
}

}  // namespace qoc
