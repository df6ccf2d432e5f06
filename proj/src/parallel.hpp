#pragma once

#include <cstddef>
#include <exception>

namespace eyeid::detail {

// OpenMP loop over [0, count) that rethrows the first exception raised by any
// iteration once the loop has finished.
template <class F>
void parallel_for(std::ptrdiff_t count, F&& fn) {
  std::exception_ptr first;
#pragma omp parallel for schedule(dynamic, 1)
  for (std::ptrdiff_t i = 0; i < count; ++i) {
    try {
      fn(i);
    } catch (...) {
#pragma omp critical(eyeid_parallel_for)
      {
        if (!first) first = std::current_exception();
      }
    }
  }
  if (first) std::rethrow_exception(first);
}

}  // namespace eyeid::detail
