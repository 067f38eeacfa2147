// Copyright (c) The polymfd Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <exception>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace polymfd {

/// Thread count used by the OpenMP kernels: OpenMP's default, capped by the
/// POLYMFD_THREADS environment variable. Returns 1 when OpenMP is disabled.
int max_threads();

/// Runs fn(i) for i in [0, n). With use_threads the iterations are
/// distributed over OpenMP threads; otherwise the plain serial loop below is
/// the reference implementation the parallel path is tested against.
/// Exceptions escaping fn are captured and rethrown on the calling thread.
template <typename Fn>
void parallel_for(std::size_t n, Fn&& fn, bool use_threads = true) {
  const int nthreads = use_threads ? max_threads() : 1;
  if (nthreads <= 1 || n < 2) {
    for (std::size_t i = 0; i < n; ++i) {
      fn(i);
    }
    return;
  }
#ifdef _OPENMP
  std::exception_ptr failure;
#pragma omp parallel for schedule(static) num_threads(nthreads)
  for (long long i = 0; i < static_cast<long long>(n); ++i) {
    try {
      fn(static_cast<std::size_t>(i));
    } catch (...) {
#pragma omp critical(polymfd_parallel_for_failure)
      {
        if (!failure) {
          failure = std::current_exception();
        }
      }
    }
  }
  if (failure) {
    std::rethrow_exception(failure);
  }
#else
  for (std::size_t i = 0; i < n; ++i) {
    fn(i);
  }
#endif
}

}  // namespace polymfd
