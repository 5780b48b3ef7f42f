#include "breathflow/parallel.hpp"

#include <algorithm>
#include <exception>
#include <utility>

namespace breathflow {

namespace {

std::pair<std::size_t, std::size_t> chunk(std::size_t count, unsigned parts, unsigned id) {
  const std::size_t base = count / parts;
  const std::size_t extra = count % parts;
  const std::size_t begin = id * base + std::min<std::size_t>(id, extra);
  return {begin, begin + base + (id < extra ? 1 : 0)};
}

}  // namespace

WorkerPool::WorkerPool(unsigned workers) : workers_(std::max(1u, workers)) {
  // The calling thread takes chunk 0.
  for (unsigned id = 1; id < workers_; ++id)
    threads_.emplace_back([this, id] { worker_loop(id); });
}

WorkerPool::~WorkerPool() {
  {
    std::lock_guard lock(mutex_);
    stopping_ = true;
  }
  wake_.notify_all();
}

void WorkerPool::worker_loop(unsigned id) {
  std::size_t seen = 0;
  for (;;) {
    const std::function<void(std::size_t, std::size_t)>* job = nullptr;
    std::size_t count = 0;
    {
      std::unique_lock lock(mutex_);
      wake_.wait(lock, [&] { return stopping_ || generation_ != seen; });
      if (stopping_) return;
      seen = generation_;
      job = job_;
      count = job_count_;
    }
    const auto [begin, end] = chunk(count, workers_, id);
    std::exception_ptr failure;
    try {
      if (begin < end) (*job)(begin, end);
    } catch (...) {
      failure = std::current_exception();
    }
    {
      std::lock_guard lock(mutex_);
      if (failure && !worker_failure_) worker_failure_ = failure;
      if (--pending_ == 0) done_.notify_one();
    }
  }
}

void WorkerPool::parallel_for(std::size_t count,
                              const std::function<void(std::size_t, std::size_t)>& body) {
  if (count == 0) return;
  if (workers_ == 1 || count == 1) {
    body(0, count);
    return;
  }
  {
    std::lock_guard lock(mutex_);
    job_ = &body;
    job_count_ = count;
    pending_ = workers_ - 1;
    ++generation_;
  }
  wake_.notify_all();
  std::exception_ptr failure;
  const auto [begin, end] = chunk(count, workers_, 0);
  try {
    if (begin < end) body(begin, end);
  } catch (...) {
    failure = std::current_exception();
  }
  std::unique_lock lock(mutex_);
  done_.wait(lock, [&] { return pending_ == 0; });
  job_ = nullptr;
  if (!failure) failure = std::exchange(worker_failure_, nullptr);
  worker_failure_ = nullptr;
  if (failure) std::rethrow_exception(failure);
}

}  // namespace breathflow
