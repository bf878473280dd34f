#include "qoc/optimizers.hpp"

#include <cmath>
#include <stdexcept>

#include <Eigen/LU>

namespace qoc {
namespace {

double frob_dot(const RMat& a, const RMat& b) { return (a.array() * b.array()).sum(); }

Eigen::VectorXd flatten(const RMat& m) {
  return Eigen::Map<const Eigen::VectorXd>(m.data(), m.size());
}

RMat unflatten(const Eigen::VectorXd& v, Eigen::Index rows, Eigen::Index cols) {
  return Eigen::Map<const RMat>(v.data(), rows, cols);
}

// Restarted GMRES for x in A x = b given only v -> A v; returns iterations
// used and the final relative residual.
Eigen::VectorXd gmres(const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& apply,
                      const Eigen::VectorXd& b, int restart, int max_iter, double tol,
                      int* iterations, double* relative_residual) {
  const Eigen::Index n = b.size();
  Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
  const double bnorm = b.norm();
  int used = 0;
  double rel = 0.0;
  if (bnorm == 0.0) {
    if (iterations) *iterations = 0;
    if (relative_residual) *relative_residual = 0.0;
    return x;
  }
  while (used < max_iter) {
    Eigen::VectorXd r = b - apply(x);
    ++used;
    const double beta = r.norm();
    rel = beta / bnorm;
    if (rel <= tol) break;

    const int m = std::min(restart, static_cast<int>(n));
    Eigen::MatrixXd v(n, m + 1);
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(m + 1, m);
    Eigen::VectorXd g = Eigen::VectorXd::Zero(m + 1);
    Eigen::VectorXd cs = Eigen::VectorXd::Ones(m);
    Eigen::VectorXd sn = Eigen::VectorXd::Zero(m);
    v.col(0) = r / beta;
    g(0) = beta;

    int spanned = 0;
    for (int i = 0; i < m && used < max_iter; ++i) {
      Eigen::VectorXd w = apply(v.col(i));
      ++used;
      for (int k = 0; k <= i; ++k) {
        h(k, i) = v.col(k).dot(w);
        w -= h(k, i) * v.col(k);
      }
      h(i + 1, i) = w.norm();
      const bool breakdown = h(i + 1, i) <= 1e-14 * bnorm;
      if (!breakdown) v.col(i + 1) = w / h(i + 1, i);

      for (int k = 0; k < i; ++k) {
        const double t = cs(k) * h(k, i) + sn(k) * h(k + 1, i);
        h(k + 1, i) = -sn(k) * h(k, i) + cs(k) * h(k + 1, i);
        h(k, i) = t;
      }
      const double denom = std::hypot(h(i, i), h(i + 1, i));
      cs(i) = denom == 0.0 ? 1.0 : h(i, i) / denom;
      sn(i) = denom == 0.0 ? 0.0 : h(i + 1, i) / denom;
      h(i, i) = denom;
      h(i + 1, i) = 0.0;
      g(i + 1) = -sn(i) * g(i);
      g(i) = cs(i) * g(i);

      spanned = i + 1;
      rel = std::abs(g(i + 1)) / bnorm;
      if (rel <= tol || breakdown) break;
    }

    if (spanned > 0) {
      const Eigen::VectorXd y = h.topLeftCorner(spanned, spanned)
                                    .triangularView<Eigen::Upper>()
                                    .solve(g.head(spanned));
      x += v.leftCols(spanned) * y;
    }
    if (rel <= tol) {
      Eigen::VectorXd check = b - apply(x);
      ++used;
      rel = check.norm() / bnorm;
      if (rel <= tol) break;
    }
  }
  if (iterations) *iterations = used;
  if (relative_residual) *relative_residual = rel;
  return x;
}

}  // namespace

ControlField gradient_step(const Subproblem& s, const ControlField& u, double rho,
                           const GradientOptions& opts) {
  ControlField out = u;
  out.samples() += rho * sub_gradient(s, u, opts);
  return out;
}

InnerResult monotonic_step(const Subproblem& s, const ControlField& u, const SolverSpec& spec) {
  const HamiltonianModel& m = *s.model;
  if (m.kind() != PropagatorKind::cn_dense) {
    throw std::logic_error("the monotonic sweep requires column states with the one-step "
                           "rational scheme");
  }
  if (m.channels() != 1) {
    throw std::logic_error("the monotonic sweep handles a single control channel");
  }
  for (int j = 0; j < s.penalty.steps(); ++j) {
    if (s.penalty[j] <= 0.0) {
      throw std::logic_error("the monotonic sweep requires strictly positive penalty weights");
    }
  }

  // H(v) must be quadratic in the control: dH/dv = M + v P.
  RVec v0(1), v1(1), v2(1);
  v0 << 0.0;
  v1 << 1.0;
  v2 << 2.0;
  const CMat mu_op = m.control_derivative(0, v0);
  const CMat pol_op = m.control_derivative(0, v1) - mu_op;
  {
    const CMat second = m.control_derivative(0, v2) - m.control_derivative(0, v1);
    const double scale = std::max(1.0, pol_op.cwiseAbs().maxCoeff());
    if ((second - pol_op).cwiseAbs().maxCoeff() > 1e-10 * scale) {
      throw std::logic_error("the monotonic sweep requires a control dependence that is at "
                             "most quadratic");
    }
  }

  const int steps = u.steps();
  const double dt = u.grid().dt;
  const int dim = m.state_dim();
  const CMat id = CMat::Identity(dim, dim);

  // Adjoint nodes along the previous control.
  std::vector<CMat> chi(static_cast<size_t>(steps) + 1);
  chi[static_cast<size_t>(steps)] = s.target;
  for (int j = steps - 1; j >= 0; --j) {
    chi[static_cast<size_t>(j)] =
        cn_adjoint_step(m.hamiltonian(u.step_values(j)), dt, chi[static_cast<size_t>(j) + 1]);
  }

  InnerResult result;
  result.control = u;
  CMat psi = s.initial;
  for (int j = 0; j < steps; ++j) {
    const double uj = u(0, j);
    const double aj = s.penalty[j];
    RVec uv(1);
    uv << uj;
    const CMat l_old = Complex(0.0, 0.5 * dt) * m.hamiltonian(uv);
    const CMat psi_tilde = Eigen::PartialPivLU<CMat>(id + l_old).solve(psi);

    // chi_tilde(v), and the pairings of the control operators across the slice.
    double m_mu = 0.0, m_pol = 0.0;
    const auto pairings_at = [&](double v) {
      RVec vv(1);
      vv << v;
      const CMat l_new = Complex(0.0, 0.5 * dt) * m.hamiltonian(vv);
      const CMat chi_tilde =
          Eigen::PartialPivLU<CMat>(id - l_new).solve(chi[static_cast<size_t>(j) + 1]);
      m_mu = ((chi_tilde.adjoint() * mu_op * psi_tilde)(0, 0)).imag();
      m_pol = ((chi_tilde.adjoint() * pol_op * psi_tilde)(0, 0)).imag();
    };

    // Implicit update v (alpha - m_pol(v)) = m_mu(v) by fixed point.
    double v = uj;
    bool usable = true;
    for (int it = 0; it < spec.fixed_point_max_iter; ++it) {
      pairings_at(v);
      const double denom = aj - m_pol;
      if (!(std::abs(denom) > 1e-14 * (1.0 + aj))) {
        usable = false;
        break;
      }
      const double next = m_mu / denom;
      const bool settled = std::abs(next - v) <= spec.fixed_point_tol * (1.0 + std::abs(v));
      v = next;
      if (settled) break;
    }

    if (usable && std::isfinite(v)) {
      pairings_at(v);
      // Exact payoff increment of this slice given the rebuilt prefix and the
      // previous-control suffix.
      const double gain =
          dt * (v - uj) * (m_mu + 0.5 * (v + uj) * (m_pol - aj));
      if (!(gain >= 0.0)) usable = false;
    } else {
      usable = false;
    }
    if (!usable) {
      v = uj;
      ++result.guard_rejections;
    }

    result.control.at(0, j) = v;
    RVec vv(1);
    vv << v;
    psi = cn_step(m.hamiltonian(vv), dt, psi);
  }
  return result;
}

RMat newton_direction(const std::function<RMat(const RMat&)>& grad_fn, const RMat& u,
                      const RMat& g0, const SolverSpec& spec, NewtonReport* report) {
  const Eigen::Index rows = u.rows();
  const Eigen::Index cols = u.cols();
  const double u_scale = 1.0 + u.norm();

  const auto hessian_apply = [&](const Eigen::VectorXd& vflat) {
    const double vnorm = vflat.norm();
    if (vnorm == 0.0) return Eigen::VectorXd(Eigen::VectorXd::Zero(vflat.size()));
    const double h = spec.hvp_scale * u_scale / vnorm;
    const RMat dir = unflatten(vflat, rows, cols);
    const RMat gp = grad_fn(u + h * dir);
    const RMat gm = grad_fn(u - h * dir);
    return Eigen::VectorXd(flatten((gp - gm) / (2.0 * h)));
  };

  int iters = 0;
  double rel = 0.0;
  const Eigen::VectorXd d = gmres(hessian_apply, -flatten(g0), spec.gmres_restart,
                                  spec.gmres_max_iter, spec.gmres_tol, &iters, &rel);
  if (report) {
    report->gmres_iterations = iters;
    report->relative_residual = rel;
    report->fell_back = false;
  }
  return unflatten(d, rows, cols);
}

InnerResult newton_step(const Subproblem& s, const ControlField& u, const SolverSpec& spec) {
  const RMat g0 = sub_gradient(s, u, spec.gradient);
  const auto grad_fn = [&](const RMat& samples) {
    return sub_gradient(s, ControlField(u.grid(), samples), spec.gradient);
  };
  NewtonReport report;
  RMat d = newton_direction(grad_fn, u.samples(), g0, spec, &report);

  InnerResult result;
  result.gmres_iterations = report.gmres_iterations;
  if (!(frob_dot(d, g0) > 0.0)) {
    d = spec.step_size * g0;
    ++result.newton_fallbacks;
  }
  result.control = ControlField(u.grid(), u.samples() + d);
  return result;
}

InnerResult run_inner(const Subproblem& s, const ControlField& u, const SolverSpec& spec) {
  InnerResult result;
  result.control = u;
  for (int it = 0; it < spec.inner_iterations; ++it) {
    switch (spec.kind) {
      case SolverSpec::Kind::gradient:
        result.control = gradient_step(s, result.control, spec.step_size, spec.gradient);
        break;
      case SolverSpec::Kind::monotonic: {
        InnerResult one = monotonic_step(s, result.control, spec);
        result.control = std::move(one.control);
        result.guard_rejections += one.guard_rejections;
        break;
      }
      case SolverSpec::Kind::newton: {
        InnerResult one = newton_step(s, result.control, spec);
        result.control = std::move(one.control);
        result.newton_fallbacks += one.newton_fallbacks;
        result.gmres_iterations += one.gmres_iterations;
        break;
      }
    }
  }
  return result;
}

}  // namespace qoc
