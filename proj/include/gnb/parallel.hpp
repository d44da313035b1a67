#pragma once

// Sample-level data parallelism. The OpenMP path and the serial reference run
// the same per-index body and write results by index, so both produce
// identical output; the serial path is kept for tests and benchmarks.

#include <cstddef>
#include <cstdint>

#ifdef GNB_HAVE_OPENMP
#include <omp.h>
#endif

namespace gnb {

enum class Execution { serial, parallel };

/// Calls body(i) for i in [0, count). The body must not throw.
template <class Body>
void for_each_index(std::size_t count, Execution exec, Body&& body) {
  if (exec == Execution::serial) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  const auto n = static_cast<std::int64_t>(count);
#ifdef GNB_HAVE_OPENMP
#pragma omp parallel for schedule(dynamic)
#endif
  for (std::int64_t i = 0; i < n; ++i) body(static_cast<std::size_t>(i));
}

inline int max_threads() {
#ifdef GNB_HAVE_OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

}  // namespace gnb
