#pragma once

#include "pvd/model.hpp"

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace pvd {

/// Environment variable overriding the worker count.
inline constexpr const char* kWorkersEnv = "PVD_WORKERS";

inline int default_workers() {
  if (const char* env = std::getenv(kWorkersEnv); env != nullptr && *env != '\0') {
    const int n = std::atoi(env);
    if (n > 0) {
      return n;
    }
  }
  return std::max(1U, std::thread::hardware_concurrency());
}

/**
 * Runs fn(i) for i in [0, n) on a pool of workers. Indices are claimed
 * dynamically, so callers must write results to per-index slots and reduce
 * afterwards in index order. The first exception thrown is rethrown.
 */
template <class Fn>
void parallel_for(std::size_t n, int workers, Fn&& fn) {
  if (workers <= 0) {
    workers = default_workers();
  }
  const auto pool_size = std::min<std::size_t>(static_cast<std::size_t>(workers), n);
  if (pool_size <= 1) {
    for (std::size_t i = 0; i < n; ++i) {
      fn(i);
    }
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&]() {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        fn(i);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) {
          failure = std::current_exception();
        }
        next = n;
      }
    }
  };
  std::vector<std::thread> threads;
  threads.reserve(pool_size);
  for (std::size_t t = 0; t < pool_size; ++t) {
    threads.emplace_back(worker);
  }
  for (auto& t : threads) {
    t.join();
  }
  if (failure) {
    std::rethrow_exception(failure);
  }
}

/// Calls fn with a Model specialised for the problem's dimension.
template <class Fn>
decltype(auto) with_model(const ProblemSpec& spec, Fn&& fn) {
  switch (spec.dimension) {
    case 1:
      return fn(Model<1>(spec));
    case 2:
      return fn(Model<2>(spec));
    case 10:  // the ring study's dimension; fixed size avoids heap temporaries
      return fn(Model<10>(spec));
    default:
      return fn(Model<Eigen::Dynamic>(spec));
  }
}

}  // namespace pvd
