// Copyright (c) The polymfd Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>

#include "polymfd/assemble.hpp"

namespace polymfd {

struct SolverOptions {
  enum class Type { Auto, Direct, CG };
  Type type = Type::Auto;   // Auto: direct factorization everywhere
  double tol = 1e-12;       // relative residual target for CG
};

struct SolveInfo {
  std::string method;
  int iterations = 0;       // 0 for direct solves
  double residual = 0.0;    // |A x - b| / |b|
};

/// Solves the assembled system. SPD systems use a simplicial LDLT (or
/// conjugate gradients when requested); symmetric-indefinite and
/// nonsymmetric systems use sparse LU. Deterministic. Throws
/// SingularFactorization / NoConvergence.
Eigen::VectorXd solve_system(const LinearSystem& system, SolveInfo* info = nullptr,
                             const SolverOptions& opts = {});

/// Signed eigenvalue counts of a (symmetrized) system matrix; intended for
/// desk-size diagnostics only.
struct Inertia {
  int positive = 0;
  int negative = 0;
  int zero = 0;
};
Inertia dense_inertia(const LinearSystem& system, int max_dim = 4000);

struct NodalSolution {
  NodeField u;  // boundary vertices carry the Dirichlet data
  SolveInfo info;
};

struct MixedSolution {
  FaceField flux;      // F_h, approximates K grad u
  CellField pressure;  // p_h, mean-zero, approximates u - mean(u)
  double multiplier = 0.0;  // boundary-data shift enforcing the mean-zero constraint
  double pin = 0.0;         // structurally-zero companion unknown
  SolveInfo info;
};

NodalSolution solve_nodal(const PolyMesh& mesh, const NodalSystem& system,
                          SolveInfo* info = nullptr, const SolverOptions& opts = {});
MixedSolution solve_mixed(const MixedSystem& system, const SolverOptions& opts = {});

}  // namespace polymfd
