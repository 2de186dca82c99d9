#pragma once

#include <cstddef>
#include <exception>
#include <functional>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace sblab {

enum class Exec { Serial, Parallel };

// Run body(i) for i in [0, count).  In parallel mode each index writes only
// its own slots, so results are reduced in index order afterwards and both
// modes produce identical output.  Exceptions are captured per index and the
// lowest-index one is rethrown.
inline void for_each_index(Exec exec, std::size_t count,
                           const std::function<void(std::size_t)>& body) {
#ifdef _OPENMP
  if (exec == Exec::Parallel && count > 1) {
    std::vector<std::exception_ptr> errors(count);
#pragma omp parallel for schedule(static)
    for (long long i = 0; i < static_cast<long long>(count); ++i) {
      try {
        body(static_cast<std::size_t>(i));
      } catch (...) {
        errors[static_cast<std::size_t>(i)] = std::current_exception();
      }
    }
    for (const auto& err : errors)
      if (err) std::rethrow_exception(err);
    return;
  }
#else
  (void)exec;
#endif
  for (std::size_t i = 0; i < count; ++i) body(i);
}

}  // namespace sblab
