#pragma once

// Tiny persistent fork-join pool. Work is split into fixed-size blocks that
// each write only their own output slots, so results do not depend on which
// worker picks up which block. SHALLOW_PINN_THREADS caps the worker count.

#include <atomic>
#include <condition_variable>
#include <cstdlib>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace spinn {

class ThreadPool {
public:
  static ThreadPool& instance() {
    static ThreadPool pool;
    return pool;
  }

  int size() const { return n_threads_; }

  /// fn(block_index, lo, hi) over [0, n) in blocks of block_size.
  /// The calling thread participates. Blocks run exactly once.
  void for_blocks(std::size_t n, std::size_t block_size,
                  const std::function<void(std::size_t, std::size_t, std::size_t)>& fn) {
    if (n == 0) return;
    const std::size_t n_blocks = (n + block_size - 1) / block_size;
    if (n_threads_ == 1 || n_blocks == 1) {
      for (std::size_t b = 0; b < n_blocks; ++b)
        fn(b, b * block_size, std::min(n, (b + 1) * block_size));
      return;
    }
    {
      std::lock_guard<std::mutex> lock(mutex_);
      task_ = &fn;
      total_ = n;
      block_ = block_size;
      n_blocks_ = n_blocks;
      next_.store(0, std::memory_order_relaxed);
      pending_ = n_threads_ - 1;
      ++generation_;
    }
    cv_.notify_all();
    work();
    std::unique_lock<std::mutex> lock(mutex_);
    done_cv_.wait(lock, [this] { return pending_ == 0; });
    task_ = nullptr;
  }

  ~ThreadPool() {
    {
      std::lock_guard<std::mutex> lock(mutex_);
      stop_ = true;
      ++generation_;
    }
    cv_.notify_all();
    for (auto& t : workers_) t.join();
  }

private:
  ThreadPool() {
    int n = static_cast<int>(std::thread::hardware_concurrency());
    if (n < 1) n = 1;
    if (const char* env = std::getenv("SHALLOW_PINN_THREADS")) {
      const int cap = std::atoi(env);
      if (cap >= 1 && cap < n) n = cap;
    }
    n_threads_ = n;
    for (int i = 1; i < n; ++i)
      workers_.emplace_back([this] { worker_loop(); });
  }

  void worker_loop() {
    std::uint64_t seen = 0;
    for (;;) {
      std::unique_lock<std::mutex> lock(mutex_);
      cv_.wait(lock, [&] { return stop_ || generation_ != seen; });
      seen = generation_;
      if (stop_) return;
      if (!task_) {
        continue;
      }
      lock.unlock();
      work();
      lock.lock();
      if (--pending_ == 0) done_cv_.notify_one();
    }
  }

  void work() {
    for (;;) {
      const std::size_t b = next_.fetch_add(1, std::memory_order_relaxed);
      if (b >= n_blocks_) return;
      const std::size_t lo = b * block_;
      const std::size_t hi = std::min(total_, lo + block_);
      (*task_)(b, lo, hi);
    }
  }

  int n_threads_ = 1;
  std::vector<std::thread> workers_;
  std::mutex mutex_;
  std::condition_variable cv_, done_cv_;
  const std::function<void(std::size_t, std::size_t, std::size_t)>* task_ = nullptr;
  std::size_t total_ = 0, block_ = 0, n_blocks_ = 0;
  std::atomic<std::size_t> next_{0};
  int pending_ = 0;
  std::uint64_t generation_ = 0;
  bool stop_ = false;
};

/// Parallel loop over [0, n); fn(i) must touch only slot-i state.
template <class F>
void parallel_for(std::size_t n, std::size_t grain, F&& fn) {
  ThreadPool::instance().for_blocks(n, grain, [&](std::size_t, std::size_t lo, std::size_t hi) {
    for (std::size_t i = lo; i < hi; ++i) fn(i);
  });
}

} // namespace spinn
