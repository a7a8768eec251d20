#include "rtdense/core/threading.hpp"

#include <atomic>

#include <omp.h>

namespace rtdense {
namespace {
std::atomic<int> g_thread_count{0};
}

int thread_count() {
  const int n = g_thread_count.load(std::memory_order_relaxed);
  return n > 0 ? n : omp_get_max_threads();
}

void set_thread_count(int n) {
  g_thread_count.store(n > 0 ? n : 0, std::memory_order_relaxed);
}

}  // namespace rtdense
