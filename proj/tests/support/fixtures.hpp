#pragma once

// Seeded random problems shared by the unit and acceptance tests, plus
// independently rewritten ingredients (grid, kinetic spectrum, trap shape)
// for the reference evaluators.

#include <cmath>
#include <memory>
#include <numbers>
#include <random>
#include <vector>

#include "qoc/models.hpp"
#include "qoc/objective.hpp"
#include "reference_model.hpp"

namespace fixtures {

inline qoc::CMat random_hermitian(std::mt19937& rng, int dim, double scale) {
  std::normal_distribution<double> g(0.0, scale);
  qoc::CMat a(dim, dim);
  for (int j = 0; j < dim; ++j) {
    for (int i = 0; i < dim; ++i) {
      a(i, j) = qoc::Complex(g(rng), g(rng));
    }
  }
  return 0.5 * (a + a.adjoint());
}

inline qoc::CVec random_state(std::mt19937& rng, int dim) {
  std::normal_distribution<double> g(0.0, 1.0);
  qoc::CVec v(dim);
  for (int i = 0; i < dim; ++i) {
    v[i] = qoc::Complex(g(rng), g(rng));
  }
  v /= v.norm();
  return v;
}

inline qoc::CMat random_observable(std::mt19937& rng, int dim) {
  qoc::CMat m = random_hermitian(rng, dim, 1.0);
  return m / m.norm();
}

struct DenseFixture {
  qoc::CMat h0;
  std::vector<qoc::CMat> linear;
  std::vector<qoc::CMat> quadratic;  // empty when the model is affine
  qoc::ControlProblem problem;
  qoc::ControlField control;
  bool conjugation = false;
};

struct DenseFixtureOptions {
  int dim = 4;
  int steps = 16;
  int channels = 2;
  bool conjugation = false;
  bool quadratic = false;
  double alpha = 0.1;
  double duration = 1.0;
  double control_amplitude = 0.8;
  bool random_penalty = false;
};

inline DenseFixture dense_fixture(unsigned seed, const DenseFixtureOptions& opt = {}) {
  std::mt19937 rng(seed);
  DenseFixture f;
  f.conjugation = opt.conjugation;
  f.h0 = random_hermitian(rng, opt.dim, 1.0);
  for (int c = 0; c < opt.channels; ++c) {
    f.linear.push_back(random_hermitian(rng, opt.dim, 1.0));
  }
  if (opt.quadratic) {
    for (int c = 0; c < opt.channels; ++c) {
      f.quadratic.push_back(random_hermitian(rng, opt.dim, 0.5));
    }
  }

  const auto kind =
      opt.conjugation ? qoc::PropagatorKind::cn_conjugation : qoc::PropagatorKind::cn_dense;
  f.problem.model = std::make_shared<qoc::DenseModel>(kind, f.h0, f.linear, f.quadratic);
  f.problem.grid = qoc::TimeGrid::over(0.0, opt.duration, opt.steps);
  if (opt.conjugation) {
    f.problem.initial = random_observable(rng, opt.dim);
    f.problem.target = random_observable(rng, opt.dim);
  } else {
    f.problem.initial = random_state(rng, opt.dim);
    f.problem.target = random_state(rng, opt.dim);
  }
  if (opt.random_penalty) {
    std::uniform_real_distribution<double> a(0.0, opt.alpha);
    qoc::PenaltySchedule sched;
    sched.values.resize(static_cast<size_t>(opt.steps));
    for (auto& v : sched.values) {
      v = a(rng);
    }
    f.problem.penalty = sched;
  } else {
    f.problem.penalty = qoc::PenaltySchedule::constant(opt.alpha, opt.steps);
  }

  std::uniform_real_distribution<double> uc(-opt.control_amplitude, opt.control_amplitude);
  qoc::ControlField u(f.problem.grid, opt.channels);
  for (int c = 0; c < opt.channels; ++c) {
    for (int j = 0; j < opt.steps; ++j) {
      u.at(c, j) = uc(rng);
    }
  }
  f.control = u;
  return f;
}

// Reference-side widening of a dense fixture.
template <class S>
struct DenseRef {
  refmodel::Mat<S> h0;
  std::vector<refmodel::Mat<S>> linear;
  std::vector<refmodel::Mat<S>> quadratic;
  refmodel::Mat<S> initial;
  refmodel::Mat<S> target;
  refmodel::RVec<S> alpha;
  S dt;
};

template <class S>
DenseRef<S> widen_fixture(const DenseFixture& f) {
  DenseRef<S> r;
  r.h0 = refmodel::widen<S>(f.h0);
  for (const auto& m : f.linear) {
    r.linear.push_back(refmodel::widen<S>(m));
  }
  for (const auto& m : f.quadratic) {
    r.quadratic.push_back(refmodel::widen<S>(m));
  }
  r.initial = refmodel::widen<S>(f.problem.initial);
  r.target = refmodel::widen<S>(f.problem.target);
  r.alpha.resize(static_cast<Eigen::Index>(f.problem.penalty.values.size()));
  for (Eigen::Index j = 0; j < r.alpha.size(); ++j) {
    r.alpha[j] = static_cast<S>(f.problem.penalty.values[static_cast<size_t>(j)]);
  }
  r.dt = static_cast<S>(f.problem.grid.dt);
  return r;
}

// ---- independently rewritten condensate ingredients ----

// Equidistant points x_i = x_min + i (x_max - x_min) / n, i = 0..n-1.
template <class S>
refmodel::RVec<S> grid_points(int points, S x_min, S x_max) {
  refmodel::RVec<S> x(points);
  const S dx = (x_max - x_min) / static_cast<S>(points);
  for (int i = 0; i < points; ++i) {
    x[i] = x_min + dx * static_cast<S>(i);
  }
  return x;
}

// (1/2) (2 pi m / L)^2 with the mode index folded to -n/2 < m <= n/2.
template <class S>
refmodel::RVec<S> periodic_kinetic(int points, S x_min, S x_max) {
  refmodel::RVec<S> kin(points);
  const S length = x_max - x_min;
  for (int i = 0; i < points; ++i) {
    const int folded = i <= points / 2 ? i : i - points;
    const S k = S(2) * std::numbers::pi_v<S> * static_cast<S>(folded) / length;
    kin[i] = S(0.5) * k * k;
  }
  return kin;
}

// Trap shifted by the control: (1/2)(|x| - l d/2)^2 outside |x| <= l d/4,
// smoothly capped by (1/2)((l d)^2/8 - x^2) inside.
template <class S>
refmodel::RVec<S> trap_potential(const refmodel::RVec<S>& x, S control, S distance) {
  refmodel::RVec<S> v(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const S ax = std::abs(x[i]);
    if (ax > control * distance / S(4)) {
      const S r = ax - control * distance / S(2);
      v[i] = S(0.5) * r * r;
    } else {
      v[i] = S(0.5) * (control * distance * control * distance / S(8) - x[i] * x[i]);
    }
  }
  return v;
}

struct StrangFixture {
  std::shared_ptr<qoc::TrappedCondensateModel> model;
  qoc::ControlProblem problem;
  qoc::ControlField control;
  int points = 0;
  double x_min = 0.0, x_max = 0.0, distance = 0.0, kappa = 0.0;
};

struct StrangFixtureOptions {
  int points = 24;
  double x_min = -8.0, x_max = 8.0;
  double distance = 6.0;
  double kappa = 1.0;
  int steps = 12;
  double duration = 0.5;
  double alpha = 0.05;
  double control_amplitude = 0.9;
};

inline StrangFixture strang_fixture(unsigned seed, const StrangFixtureOptions& opt = {}) {
  std::mt19937 rng(seed);
  StrangFixture f;
  f.points = opt.points;
  f.x_min = opt.x_min;
  f.x_max = opt.x_max;
  f.distance = opt.distance;
  f.kappa = opt.kappa;
  f.model = std::make_shared<qoc::TrappedCondensateModel>(opt.points, opt.x_min, opt.x_max,
                                                          opt.distance, opt.kappa);
  f.problem.model = f.model;
  f.problem.grid = qoc::TimeGrid::over(0.0, opt.duration, opt.steps);
  const double dx = f.model->dx();
  qoc::CVec a = random_state(rng, opt.points);
  qoc::CVec b = random_state(rng, opt.points);
  f.problem.initial = a / std::sqrt(dx);  // unit grid norm
  f.problem.target = b / std::sqrt(dx);
  f.problem.penalty = qoc::PenaltySchedule::constant(opt.alpha, opt.steps);

  std::uniform_real_distribution<double> uc(-opt.control_amplitude, opt.control_amplitude);
  qoc::ControlField u(f.problem.grid, 1);
  for (int j = 0; j < opt.steps; ++j) {
    u.at(0, j) = uc(rng);
  }
  f.control = u;
  return f;
}

}  // namespace fixtures
