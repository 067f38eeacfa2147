// Copyright (c) The polymfd Authors.
// SPDX-License-Identifier: Apache-2.0

#include "polymfd/solve.hpp"

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>

#include <cmath>

namespace polymfd {

Eigen::VectorXd solve_system(const LinearSystem& system, SolveInfo* info,
                             const SolverOptions& opts) {
  const auto n = system.A.rows();
  if (n == 0) {
    throw SingularSystem("empty system");
  }
  Eigen::VectorXd x;
  SolveInfo local;

  if (system.spd && opts.type == SolverOptions::Type::CG) {
    Eigen::ConjugateGradient<Eigen::SparseMatrix<double>, Eigen::Lower | Eigen::Upper> cg;
    cg.setTolerance(opts.tol);
    cg.setMaxIterations(10 * n);
    cg.compute(system.A);
    x = cg.solve(system.rhs);
    if (cg.info() != Eigen::Success) {
      throw NoConvergence("conjugate gradients did not reach the residual target");
    }
    local.method = "cg";
    local.iterations = static_cast<int>(cg.iterations());
  } else if (system.spd) {
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(system.A);
    if (ldlt.info() != Eigen::Success) {
      throw SingularFactorization("LDLT factorization failed");
    }
    x = ldlt.solve(system.rhs);
    local.method = "ldlt";
  } else {
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu(system.A);
    if (lu.info() != Eigen::Success) {
      throw SingularFactorization("sparse LU factorization failed");
    }
    x = lu.solve(system.rhs);
    local.method = "lu";
  }

  const double rhs_norm = system.rhs.norm();
  local.residual = (system.A * x - system.rhs).norm() / (rhs_norm > 0.0 ? rhs_norm : 1.0);
  if (!x.allFinite()) {
    throw SingularFactorization("solution contains non-finite entries");
  }
  if (info) {
    *info = local;
  }
  return x;
}

Inertia dense_inertia(const LinearSystem& system, int max_dim) {
  if (system.A.rows() > max_dim) {
    throw InvalidParam("system too large for a dense inertia computation");
  }
  Eigen::MatrixXd dense = Eigen::MatrixXd(system.A);
  dense = 0.5 * (dense + dense.transpose().eval());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(dense, Eigen::EigenvaluesOnly);
  const double scale = eig.eigenvalues().cwiseAbs().maxCoeff();
  const double tol = 1e-11 * (scale > 0.0 ? scale : 1.0);
  Inertia inertia;
  for (Eigen::Index i = 0; i < eig.eigenvalues().size(); ++i) {
    const double lambda = eig.eigenvalues()[i];
    if (lambda > tol) {
      ++inertia.positive;
    } else if (lambda < -tol) {
      ++inertia.negative;
    } else {
      ++inertia.zero;
    }
  }
  return inertia;
}

NodalSolution solve_nodal(const PolyMesh& mesh, const NodalSystem& system, SolveInfo* info,
                          const SolverOptions& opts) {
  NodalSolution sol;
  const Eigen::VectorXd x = solve_system(system.sys, &sol.info, opts);
  sol.u = NodeField(mesh.n_vertices());
  for (int v = 0; v < mesh.n_vertices(); ++v) {
    const int i = system.unknown_of_vertex[static_cast<std::size_t>(v)];
    sol.u[v] = i >= 0 ? x[i] : system.boundary_values[v];
  }
  if (info) {
    *info = sol.info;
  }
  return sol;
}

MixedSolution solve_mixed(const MixedSystem& system, const SolverOptions& opts) {
  MixedSolution sol;
  const Eigen::VectorXd x = solve_system(system.sys, &sol.info, opts);
  sol.flux = FaceField(x.head(system.n_faces));
  sol.pressure = CellField(x.segment(system.n_faces, system.n_cells));
  sol.multiplier = x[system.lambda_index()];
  sol.pin = x[system.mu_index()];
  return sol;
}

}  // namespace polymfd
