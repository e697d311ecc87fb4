#pragma once

#include <condition_variable>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace penetrance {

// Persistent worker pool for data-parallel maps over family indices. Workers
// pull indices from a shared counter; callers must make fn(i) write only to
// slot i of its output so results are independent of scheduling.
class ThreadPool {
 public:
  explicit ThreadPool(int threads);
  ~ThreadPool();

  ThreadPool(const ThreadPool&) = delete;
  ThreadPool& operator=(const ThreadPool&) = delete;

  int thread_count() const { return static_cast<int>(workers_.size()) + 1; }

  // Blocks until fn has run for every i in [0, n).
  void parallel_for(int n, const std::function<void(int)>& fn);

 private:
  void worker_loop();

  std::vector<std::thread> workers_;
  std::mutex mu_;
  std::condition_variable cv_work_;
  std::condition_variable cv_done_;
  const std::function<void(int)>* fn_ = nullptr;
  int n_ = 0;
  int next_ = 0;
  int active_ = 0;
  long generation_ = 0;
  bool stop_ = false;
};

}  // namespace penetrance
