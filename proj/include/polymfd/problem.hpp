// Copyright (c) The polymfd Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>
#include <string>

#include "polymfd/interp.hpp"
#include "polymfd/mesh.hpp"

namespace polymfd {

/// Data of the boundary value problem
///   -div(K grad u) + beta . grad u = g  in Omega,   u = u_D  on the boundary.
struct ProblemSpec {
  TensorFn K;            // symmetric positive definite
  VectorFn beta;         // empty function = pure diffusion
  ScalarFn g;
  ScalarFn dirichlet;    // u_D (zero function for the homogeneous case)

  struct ExactSolution {
    ScalarFn u;
    VectorFn grad;
    VectorFn flux;  // K grad u
  };
  std::optional<ExactSolution> exact;  // set for manufactured runs
};

/// Named constant diffusion tensors used by the verification problems:
/// "identity" | "diag10" (diag(10,1,1)) | "anisotropic" (full SPD).
Mat3 named_tensor(const std::string& name);

/// Manufactured problems on the unit cube with constant K and beta; g is
/// derived from the exact solution. Names: "linear" (1 + 2x - y + 3z) and
/// "trig" (sin(pi x) sin(pi y) sin(pi z)).
ProblemSpec make_problem(const std::string& name, const Mat3& K = Mat3::Identity(),
                         const Vec3& beta = Vec3::Zero());

}  // namespace polymfd
