#include "qoc/runtime.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <condition_variable>
#include <cstdio>
#include <ctime>
#include <mutex>
#include <stdexcept>
#include <thread>

namespace qoc {

struct WorkerPool::Impl {
  std::vector<std::thread> threads;
  std::mutex mutex;
  std::condition_variable wake;
  std::condition_variable done;

  const std::function<void(int)>* fn = nullptr;
  std::atomic<int> next{0};
  int count = 0;
  int pending = 0;
  uint64_t generation = 0;
  bool stop = false;

  void worker() {
    uint64_t seen = 0;
    for (;;) {
      {
        std::unique_lock<std::mutex> lock(mutex);
        wake.wait(lock, [&] { return stop || generation != seen; });
        if (stop) return;
        seen = generation;
      }
      for (;;) {
        const int i = next.fetch_add(1, std::memory_order_relaxed);
        if (i >= count) break;
        (*fn)(i);
      }
      {
        std::lock_guard<std::mutex> lock(mutex);
        if (--pending == 0) done.notify_all();
      }
    }
  }
};

WorkerPool::WorkerPool(int threads) : impl_(new Impl), threads_(std::max(1, threads)) {
  if (threads_ > 1) {
    impl_->threads.reserve(static_cast<size_t>(threads_));
    for (int i = 0; i < threads_; ++i) {
      impl_->threads.emplace_back([this] { impl_->worker(); });
    }
  }
}

WorkerPool::~WorkerPool() {
  if (!impl_->threads.empty()) {
    {
      std::lock_guard<std::mutex> lock(impl_->mutex);
      impl_->stop = true;
    }
    impl_->wake.notify_all();
    for (auto& t : impl_->threads) t.join();
  }
  delete impl_;
}

void WorkerPool::run(int count, const std::function<void(int)>& fn) {
  if (count <= 0) return;
  if (impl_->threads.empty()) {
    for (int i = 0; i < count; ++i) fn(i);
    return;
  }
  {
    std::lock_guard<std::mutex> lock(impl_->mutex);
    impl_->fn = &fn;
    impl_->count = count;
    impl_->next.store(0, std::memory_order_relaxed);
    impl_->pending = static_cast<int>(impl_->threads.size());
    ++impl_->generation;
  }
  impl_->wake.notify_all();
  std::unique_lock<std::mutex> lock(impl_->mutex);
  impl_->done.wait(lock, [&] { return impl_->pending == 0; });
  impl_->fn = nullptr;
}

double thread_cpu_seconds() {
  timespec ts{};
  if (clock_gettime(CLOCK_THREAD_CPUTIME_ID, &ts) != 0) {
    throw std::runtime_error("thread CPU clock unavailable");
  }
  return static_cast<double>(ts.tv_sec) + 1e-9 * static_cast<double>(ts.tv_nsec);
}

double wall_seconds() {
  using clock = std::chrono::steady_clock;
  return std::chrono::duration<double>(clock::now().time_since_epoch()).count();
}

double RunRecord::total_wall_seconds() const {
  double acc = 0.0;
  for (const auto& it : iterations) acc += it.wall_seconds;
  return acc;
}

double RunRecord::total_critical_path_seconds() const {
  double acc = 0.0;
  for (const auto& it : iterations) acc += it.critical_path_seconds;
  return acc;
}

std::optional<double> time_to_target(const RunRecord& record, double limit_value, double eps) {
  double cumulative = 0.0;
  for (const auto& it : record.iterations) {
    cumulative += it.critical_path_seconds;
    if (limit_value - it.objective < eps) return cumulative;
  }
  return std::nullopt;
}

std::vector<EfficiencyRow> efficiency_table(
    const std::vector<std::pair<int, const RunRecord*>>& runs, double limit_value, double eps) {
  std::optional<double> base;
  for (const auto& [n, record] : runs) {
    if (n == 1) {
      base = time_to_target(*record, limit_value, eps);
      break;
    }
  }
  if (!base.has_value()) {
    throw std::invalid_argument("efficiency table needs an N=1 run that reaches the target");
  }
  std::vector<EfficiencyRow> rows;
  rows.reserve(runs.size());
  for (const auto& [n, record] : runs) {
    EfficiencyRow row;
    row.subintervals = n;
    const auto t = time_to_target(*record, limit_value, eps);
    row.reached = t.has_value();
    if (t.has_value()) {
      row.t_seconds = *t;
      row.speedup = *base / *t;
      row.efficiency_percent = 100.0 * row.speedup / n;
    }
    rows.push_back(row);
  }
  return rows;
}

std::string format_percent(double value) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.1f%%", value);
  return buf;
}

std::string efficiency_csv(const std::vector<EfficiencyRow>& rows) {
  std::string out = "N,t_seconds,speedup,efficiency\n";
  char buf[160];
  for (const auto& row : rows) {
    if (row.reached) {
      std::snprintf(buf, sizeof(buf), "%d,%.6f,%.6f,%s\n", row.subintervals, row.t_seconds,
                    row.speedup, format_percent(row.efficiency_percent).c_str());
    } else {
      std::snprintf(buf, sizeof(buf), "%d,,,unreached\n", row.subintervals);
    }
    out += buf;
  }
  return out;
}

}  // namespace qoc
