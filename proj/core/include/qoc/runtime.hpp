#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace qoc {

// Fixed-size thread pool; run(count, fn) executes fn(0..count-1) across the
// pool and returns when all tasks finished. Tasks must not share mutable
// state; results keyed by task index are merged deterministically by the
// caller, so pool size never changes numerical output.
class WorkerPool {
 public:
  explicit WorkerPool(int threads);
  ~WorkerPool();
  WorkerPool(const WorkerPool&) = delete;
  WorkerPool& operator=(const WorkerPool&) = delete;

  void run(int count, const std::function<void(int)>& fn);
  int size() const { return threads_; }

 private:
  struct Impl;
  Impl* impl_;
  int threads_;
};

// CPU time of the calling thread, in seconds. Used to cost tasks on
// oversubscribed machines, where per-task wall time would count scheduler
// preemption.
double thread_cpu_seconds();
double wall_seconds();

struct TaskStat {
  double compute_seconds = 0.0;
  double serialize_seconds = 0.0;
  uint64_t bytes_sent = 0;
};

struct IterationStat {
  int iteration = 0;
  // Global objective in its shifted (distance-based) form, reconstructed from
  // the weighted task values.
  double objective = 0.0;
  // Optionally, the payoff of a dedicated full propagation (nonlinear runs).
  std::optional<double> exact_objective;
  std::optional<double> error;  // stopping residual, absent on the 0th entry
  std::vector<double> task_values;
  std::vector<TaskStat> tasks;
  double coordinator_seconds = 0.0;
  // Modeled per-iteration time of an N-processor run: coordinator work plus
  // the slowest task (compute + serialize).
  double critical_path_seconds = 0.0;
  double instrumentation_seconds = 0.0;  // excluded from the critical path
  double wall_seconds = 0.0;             // measured wall time of the iteration
  std::vector<std::string> events;
};

struct RunRecord {
  int subintervals = 1;
  int workers = 1;
  std::string solver;
  std::string variant;
  std::string plan;
  std::vector<IterationStat> iterations;
  bool aborted = false;
  std::string abort_reason;

  double total_wall_seconds() const;
  double total_critical_path_seconds() const;
};

// Earliest cumulative critical-path time at which the recorded objective came
// within eps of the limit value; empty if never reached.
std::optional<double> time_to_target(const RunRecord& record, double limit_value, double eps);

struct EfficiencyRow {
  int subintervals = 0;
  double t_seconds = 0.0;
  double speedup = 0.0;            // t(eps, 1) / t(eps, N)
  double efficiency_percent = 0.0; // 100 * speedup / N
  bool reached = false;
};

// Rows for each (N, record) pair; speedups are relative to the N=1 entry,
// which must be present and must reach the target.
std::vector<EfficiencyRow> efficiency_table(
    const std::vector<std::pair<int, const RunRecord*>>& runs, double limit_value, double eps);

// "N,t_seconds,speedup,efficiency" with efficiency as e.g. "99.7%".
std::string efficiency_csv(const std::vector<EfficiencyRow>& rows);
std::string format_percent(double value);

}  // namespace qoc
