#pragma once

#include <condition_variable>
#include <cstddef>
#include <functional>
#include <mutex>
#include <exception>
#include <thread>
#include <vector>

namespace breathflow {

/// Fixed-size pool that splits an index range into contiguous chunks.
///
/// Each index is handled by exactly one call of `body`; callers that compute every
/// output element from its inputs alone get results independent of the worker count.
class WorkerPool {
 public:
  explicit WorkerPool(unsigned workers = 1);
  WorkerPool(const WorkerPool&) = delete;
  WorkerPool& operator=(const WorkerPool&) = delete;
  ~WorkerPool();

  unsigned size() const noexcept { return workers_; }

  void parallel_for(std::size_t count,
                    const std::function<void(std::size_t begin, std::size_t end)>& body);

 private:
  void worker_loop(unsigned id);

  unsigned workers_;
  std::mutex mutex_;
  std::condition_variable wake_;
  std::condition_variable done_;
  const std::function<void(std::size_t, std::size_t)>* job_ = nullptr;
  std::size_t job_count_ = 0;
  std::size_t generation_ = 0;
  unsigned pending_ = 0;
  bool stopping_ = false;
  std::exception_ptr worker_failure_;
  std::vector<std::jthread> threads_;  // last: joined before the sync state dies
};

}  // namespace breathflow
