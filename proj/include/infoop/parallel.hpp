#pragma once

#include <functional>

#include <Eigen/Core>

namespace infoop {

// Worker count from INFOOP_THREADS; otherwise the hardware concurrency.
int thread_count();

// Runs body(i) for i in [0, n) on up to thread_count() threads. Each index
// runs exactly once; the first exception thrown by any body is rethrown.
void parallel_for(Eigen::Index n, const std::function<void(Eigen::Index)>& body);

}  // namespace infoop
