#pragma once

#include <cstddef>
#include <exception>
#include <vector>

namespace tdmc {

// serial is the reference path; parallel fans replicas out with OpenMP. Each
// replica draws only from its own stream and results are kept in replica
// order, so both produce identical output.
enum class Execution { serial, parallel };

// results[i] = fn(i) for i in [0, count). The first exception (by replica
// index) is rethrown after all replicas have finished.
template <class Result, class Fn>
std::vector<Result> map_replicas(std::size_t count, Execution exec, Fn&& fn) {
  std::vector<Result> results(count);
  std::vector<std::exception_ptr> errors(count);
  const auto n = static_cast<long long>(count);
  if (exec == Execution::parallel) {
#pragma omp parallel for schedule(dynamic, 16)
    for (long long i = 0; i < n; ++i) {
      try {
        results[static_cast<std::size_t>(i)] = fn(static_cast<std::size_t>(i));
      } catch (...) {
        errors[static_cast<std::size_t>(i)] = std::current_exception();
      }
    }
  } else {
    for (long long i = 0; i < n; ++i) {
      try {
        results[static_cast<std::size_t>(i)] = fn(static_cast<std::size_t>(i));
      } catch (...) {
        errors[static_cast<std::size_t>(i)] = std::current_exception();
      }
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return results;
}

int available_threads();

}  // namespace tdmc
