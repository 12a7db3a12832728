#pragma once

#include <cstdint>

#include <omp.h>

namespace feaslab {

/// Runs fn(0), ..., fn(n-1) with per-index isolation. threads <= 1 selects
/// the serial reference loop; otherwise the indices are distributed over an
/// OpenMP team. Callers must make fn(i) depend only on i (write to slot i,
/// draw from streams keyed by i), so both paths produce identical results.
template <class Fn>
void for_each_index(std::int64_t n, int threads, Fn&& fn) {
  if (threads <= 1) {
    for (std::int64_t i = 0; i < n; ++i) fn(i);
    return;
  }
#pragma omp parallel for schedule(dynamic, 16) num_threads(threads)
  for (std::int64_t i = 0; i < n; ++i) fn(i);
}

}  // namespace feaslab
