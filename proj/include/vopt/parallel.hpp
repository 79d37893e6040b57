#pragma once

#include <cstddef>
#include <exception>
#include <utility>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace vopt::parallel {

/// Thread budget for the OpenMP kernels. 1 selects the serial reference
/// path, which all parallel paths must match bitwise (each index computes
/// independently and reductions run in fixed index order).
int max_threads();
void set_max_threads(int n);

namespace detail {
int resolve_threads();
}

template <class F>
void for_each_index(std::size_t n, F&& f) {
  if (n == 0) return;
  const int threads = detail::resolve_threads();
#ifdef _OPENMP
  if (threads > 1 && n > 1) {
    std::exception_ptr err;
#pragma omp parallel for schedule(static) num_threads(threads)
    for (long long i = 0; i < static_cast<long long>(n); ++i) {
      try {
        f(static_cast<std::size_t>(i));
      } catch (...) {
#pragma omp critical
        if (!err) err = std::current_exception();
      }
    }
    if (err) std::rethrow_exception(err);
    return;
  }
#endif
  (void)threads;
  for (std::size_t i = 0; i < n; ++i) f(i);
}

}  // namespace vopt::parallel
