// Copyright (c) The polymfd Authors.
// SPDX-License-Identifier: Apache-2.0

#include "polymfd/parallel.hpp"

#include <cstdlib>
#include <string>

namespace polymfd {

int max_threads() {
#ifdef _OPENMP
  int n = omp_get_max_threads();
  if (const char* cap = std::getenv("POLYMFD_THREADS")) {
    try {
      const int limit = std::stoi(cap);
      if (limit >= 1 && limit < n) {
        n = limit;
      }
    } catch (...) {
      // Unparseable cap: keep the OpenMP default.
    }
  }
  return n;
#else
  return 1;
#endif
}

}  // namespace polymfd
