#include "vopt/parallel.hpp"

#include <atomic>

namespace vopt::parallel {

namespace {
std::atomic<int> g_max_threads{0};  // 0 = use OpenMP default
}

int max_threads() { return g_max_threads.load(); }

void set_max_threads(int n) { g_max_threads.store(n < 0 ? 0 : n); }

namespace detail {

int resolve_threads() {
  int n = g_max_threads.load();
#ifdef _OPENMP
  if (n == 0) n = omp_get_max_threads();
#else
  if (n == 0) n = 1;
#endif
  return n;
}

}  // namespace detail

}  // namespace vopt::parallel
