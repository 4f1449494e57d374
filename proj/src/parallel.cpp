#include "infoop/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "infoop/error.hpp"

namespace infoop {

int thread_count() {
  if (const char* env = std::getenv("INFOOP_THREADS"); env != nullptr && *env != '\0') {
    char* end = nullptr;
    const long n = std::strtol(env, &end, 10);
    if (end == env || *end != '\0' || n < 1) {
      throw ConfigError("INFOOP_THREADS", "expected a positive integer, got '" + std::string(env) + "'");
    }
    return static_cast<int>(n);
  }
  return std::max(1U, std::thread::hardware_concurrency());
}

void parallel_for(Eigen::Index n, const std::function<void(Eigen::Index)>& body) {
  const int workers = static_cast<int>(std::min<Eigen::Index>(thread_count(), n));
  if (workers <= 1) {
    for (Eigen::Index i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<Eigen::Index> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  const auto run = [&] {
    for (Eigen::Index i = next++; i < n; i = next++) {
      try {
        body(i);
      } catch (...) {
        const std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = n;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (int t = 0; t < workers; ++t) pool.emplace_back(run);
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace infoop
