// Microbenchmarks for the propagation kernels and one macrobenchmark for a
// full decomposed-optimization iteration.  Run with --benchmark_filter=... to
// narrow the set; wall times depend on the machine, the relative costs are the
// interesting part (step kernels vs. propagator assembly vs. a whole sweep).
#include <benchmark/benchmark.h>

#include <complex>
#include <random>
#include <utility>
#include <vector>

#include "qoc/controls.hpp"
#include "qoc/ism.hpp"
#include "qoc/linalg.hpp"
#include "qoc/models.hpp"
#include "qoc/objective.hpp"
#include "qoc/optimizers.hpp"
#include "qoc/propagation.hpp"

namespace {

qoc::CMat random_hermitian(int dim, unsigned seed) {
  std::mt19937 gen(seed);
  std::normal_distribution<double> pick(0.0, 1.0);
  qoc::CMat a(dim, dim);
  for (int r = 0; r < dim; ++r)
    for (int c = 0; c < dim; ++c) a(r, c) = std::complex<double>(pick(gen), pick(gen));
  return 0.5 * (a + a.adjoint().eval());
}

qoc::CVec random_state(int dim, unsigned seed) {
  std::mt19937 gen(seed);
  std::normal_distribution<double> pick(0.0, 1.0);
  qoc::CVec v(dim);
  for (int r = 0; r < dim; ++r) v(r) = std::complex<double>(pick(gen), pick(gen));
  v.normalize();
  return v;
}

qoc::DenseModel dense_model(qoc::PropagatorKind kind, int dim, int channels, unsigned seed) {
  std::vector<qoc::CMat> linear;
  for (int c = 0; c < channels; ++c) linear.push_back(random_hermitian(dim, seed + 11 * c + 1));
  return {kind, random_hermitian(dim, seed), std::move(linear)};
}

qoc::ControlProblem dense_problem(qoc::PropagatorKind kind, int dim, int steps, unsigned seed) {
  qoc::ControlProblem p;
  p.model = std::make_shared<qoc::DenseModel>(dense_model(kind, dim, 2, seed));
  p.grid = qoc::TimeGrid::over(0.0, 1.0, steps);
  qoc::CVec from = random_state(dim, seed + 101);
  qoc::CVec to = random_state(dim, seed + 202);
  if (kind == qoc::PropagatorKind::cn_conjugation) {
    p.initial = from * from.adjoint();
    p.target = to * to.adjoint();
  } else {
    p.initial = from;
    p.target = to;
  }
  p.penalty = qoc::PenaltySchedule::constant(0.05, steps);
  return p;
}

}  // namespace

static void BM_dense_cn_step(benchmark::State& state) {
  const int dim = static_cast<int>(state.range(0));
  const qoc::CMat h = random_hermitian(dim, 42);
  qoc::CMat psi = random_state(dim, 7);
  for (auto _ : state) {
    psi = qoc::cn_step(h, 1e-3, psi);
    benchmark::DoNotOptimize(psi.data());
  }
  psi.normalize();
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_dense_cn_step)->Arg(8)->Arg(32)->Arg(64);

static void BM_density_conjugation_step(benchmark::State& state) {
  const int dim = static_cast<int>(state.range(0));
  const qoc::CMat h = random_hermitian(dim, 43);
  const qoc::CVec v = random_state(dim, 8);
  qoc::CMat rho = v * v.adjoint();
  for (auto _ : state) {
    rho = qoc::cn_conjugation_step(h, 1e-3, rho);
    benchmark::DoNotOptimize(rho.data());
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_density_conjugation_step)->Arg(8)->Arg(32);

static void BM_split_operator_step(benchmark::State& state) {
  const int points = static_cast<int>(state.range(0));
  const qoc::TrappedCondensateModel model(points, -10.0, 10.0, 10.0, 1.0);
  qoc::RVec u(1);
  u << 0.5;
  qoc::CMat psi = random_state(points, 9);
  psi /= std::sqrt(model.dx());
  for (auto _ : state) {
    psi = qoc::strang_step(model, u, 1e-3, psi);
    benchmark::DoNotOptimize(psi.data());
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_split_operator_step)->Arg(50)->Arg(256);

static void BM_fourier_transform(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const qoc::CVec x = random_state(n, 10);
  for (auto _ : state) {
    qoc::CVec y = qoc::dft(x);
    benchmark::DoNotOptimize(y.data());
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_fourier_transform)->Arg(50)->Arg(256)->Arg(1024);

static void BM_propagator_assembly(benchmark::State& state) {
  const int steps = static_cast<int>(state.range(0));
  const auto p = dense_problem(qoc::PropagatorKind::cn_dense, 4, steps, 77);
  const auto u = qoc::random_control(p.grid, p.model->channels(), 5u, 0.3);
  for (auto _ : state) {
    qoc::CMat m = qoc::assemble_propagator(*p.model, u);
    benchmark::DoNotOptimize(m.data());
  }
  state.SetItemsProcessed(state.iterations() * steps);
}
BENCHMARK(BM_propagator_assembly)->Arg(64)->Arg(256);

static void BM_objective_gradient(benchmark::State& state) {
  const int steps = static_cast<int>(state.range(0));
  const auto p = dense_problem(qoc::PropagatorKind::cn_dense, 4, steps, 78);
  const auto u = qoc::random_control(p.grid, p.model->channels(), 6u, 0.3);
  for (auto _ : state) {
    qoc::RMat g = qoc::objective_gradient(p, u, qoc::ObjectiveForm::tracking);
    benchmark::DoNotOptimize(g.data());
  }
  state.SetItemsProcessed(state.iterations() * steps);
}
BENCHMARK(BM_objective_gradient)->Arg(64)->Arg(256);

static void BM_ism_iteration(benchmark::State& state) {
  const int parts = static_cast<int>(state.range(0));
  const auto p = dense_problem(qoc::PropagatorKind::cn_dense, 4, 128, 79);
  const auto u0 = qoc::random_control(p.grid, p.model->channels(), 7u, 0.3);
  qoc::IsmConfig cfg;
  cfg.subintervals = parts;
  cfg.workers = 1;
  cfg.max_outer = 1;
  cfg.eta = 0.0;
  qoc::SolverSpec solver;
  solver.kind = qoc::SolverSpec::Kind::gradient;
  solver.step_size = 0.1;
  for (auto _ : state) {
    qoc::IsmRun run = qoc::run_ism(p, u0, cfg, solver);
    benchmark::DoNotOptimize(run.control.samples().data());
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_ism_iteration)->Arg(1)->Arg(2)->Arg(4);

BENCHMARK_MAIN();
