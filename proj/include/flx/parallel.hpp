#pragma once

#include <atomic>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

#include <Eigen/Core>

namespace flx {

// Process-wide worker count used by parallel_for (default 1).
int worker_count();
void set_worker_count(int jobs);

// Set while a thread executes a parallel_for body; nested loops run serially.
inline thread_local bool t_in_parallel = false;

// Runs fn(i) for i in [0, n) on a bounded pool of worker_count() threads.
// Indices are handed out dynamically; the first exception is rethrown after
// all workers join. Results must be written to disjoint locations.
template <class Fn>
void parallel_for(Eigen::Index n, Fn&& fn, int jobs = 0) {
  if (jobs <= 0) jobs = worker_count();
  if (jobs <= 1 || n <= 1 || t_in_parallel) {
    for (Eigen::Index i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<Eigen::Index> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto work = [&] {
    const bool outer = t_in_parallel;
    t_in_parallel = true;
    for (Eigen::Index i; (i = next.fetch_add(1)) < n;) {
      try {
        fn(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
        next.store(n);
      }
    }
    t_in_parallel = outer;
  };
  const int count = static_cast<int>(std::min<Eigen::Index>(jobs, n));
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(count - 1));
  for (int t = 1; t < count; ++t) pool.emplace_back(work);
  work();
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace flx
