// Copyright (c) The polymfd Authors.
// SPDX-License-Identifier: Apache-2.0

#include "polymfd/problem.hpp"

#include <cmath>
#include <numbers>

namespace polymfd {

Mat3 named_tensor(const std::string& name) {
  Mat3 K = Mat3::Identity();
  if (name == "identity") {
    return K;
  }
  if (name == "diag10") {
    K.diagonal() << 10.0, 1.0, 1.0;
    return K;
  }
  if (name == "anisotropic") {
    K << 2.0, 0.5, 0.0, 0.5, 1.0, 0.2, 0.0, 0.2, 3.0;
    return K;
  }
  throw InvalidParam("unknown tensor '" + name + "' (expected identity|diag10|anisotropic)");
}

namespace {

constexpr double pi = std::numbers::pi;

struct ManufacturedSolution {
  ScalarFn u;
  VectorFn grad;
  std::function<Mat3(const Vec3&)> hessian;
};

ManufacturedSolution named_solution(const std::string& name) {
  if (name == "linear") {
    return {
        [](const Vec3& x) { return 1.0 + 2.0 * x[0] - x[1] + 3.0 * x[2]; },
        [](const Vec3&) { return Vec3(2.0, -1.0, 3.0); },
        [](const Vec3&) { return Mat3::Zero(); },
    };
  }
  if (name == "trig") {
    return {
        [](const Vec3& x) {
          return std::sin(pi * x[0]) * std::sin(pi * x[1]) * std::sin(pi * x[2]);
        },
        [](const Vec3& x) {
          const double sx = std::sin(pi * x[0]), cx = std::cos(pi * x[0]);
          const double sy = std::sin(pi * x[1]), cy = std::cos(pi * x[1]);
          const double sz = std::sin(pi * x[2]), cz = std::cos(pi * x[2]);
          return Vec3(pi * cx * sy * sz, pi * sx * cy * sz, pi * sx * sy * cz);
        },
        [](const Vec3& x) {
          const double sx = std::sin(pi * x[0]), cx = std::cos(pi * x[0]);
          const double sy = std::sin(pi * x[1]), cy = std::cos(pi * x[1]);
          const double sz = std::sin(pi * x[2]), cz = std::cos(pi * x[2]);
          Mat3 H;
          H(0, 0) = -pi * pi * sx * sy * sz;
          H(1, 1) = -pi * pi * sx * sy * sz;
          H(2, 2) = -pi * pi * sx * sy * sz;
          H(0, 1) = H(1, 0) = pi * pi * cx * cy * sz;
          H(0, 2) = H(2, 0) = pi * pi * cx * sy * cz;
          H(1, 2) = H(2, 1) = pi * pi * sx * cy * cz;
          return H;
        },
    };
  }
  throw InvalidParam("unknown problem '" + name + "' (expected linear|trig)");
}

}  // namespace

ProblemSpec make_problem(const std::string& name, const Mat3& K, const Vec3& beta) {
  const ManufacturedSolution sol = named_solution(name);
  ProblemSpec spec;
  spec.K = [K](const Vec3&) { return K; };
  if (beta.norm() > 0.0) {
    spec.beta = [beta](const Vec3&) { return beta; };
  }
  // g = -div(K grad u) + beta . grad u = -tr(K H(u)) + beta . grad u for
  // constant data.
  spec.g = [K, beta, sol](const Vec3& x) {
    return -(K * sol.hessian(x)).trace() + beta.dot(sol.grad(x));
  };
  spec.dirichlet = [sol](const Vec3& x) { return sol.u(x); };
  spec.exact = ProblemSpec::ExactSolution{
      sol.u,
      sol.grad,
      [K, sol](const Vec3& x) { return Vec3(K * sol.grad(x)); },
  };
  return spec;
}

}  // namespace polymfd
