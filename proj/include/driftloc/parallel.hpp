#ifndef DRIFTLOC_PARALLEL_HPP
#define DRIFTLOC_PARALLEL_HPP

#include <atomic>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace driftloc {

/// Number of workers to use when the caller asked for "all cores".
inline int resolve_jobs(int jobs) {
  if (jobs > 0) return jobs;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

/// Runs fn(0), ..., fn(n_tasks-1) on up to `jobs` threads. Tasks must write
/// only to their own output slot; results are then independent of scheduling.
/// jobs <= 1 runs inline. The first exception thrown by a task is rethrown
/// after all workers have joined.
inline void parallel_for(int n_tasks, int jobs, const std::function<void(int)>& fn) {
  jobs = resolve_jobs(jobs);
  if (jobs <= 1 || n_tasks <= 1) {
    for (int i = 0; i < n_tasks; ++i) fn(i);
    return;
  }
  const int n_workers = jobs < n_tasks ? jobs : n_tasks;
  std::atomic<int> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> workers;
  workers.reserve(static_cast<std::size_t>(n_workers));
  for (int w = 0; w < n_workers; ++w) {
    workers.emplace_back([&] {
      for (;;) {
        const int i = next.fetch_add(1);
        if (i >= n_tasks) return;
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!error) error = std::current_exception();
          return;
        }
      }
    });
  }
  for (auto& t : workers) t.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace driftloc

#endif
