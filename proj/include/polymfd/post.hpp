// Copyright (c) The polymfd Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <limits>
#include <optional>
#include <vector>

#include "polymfd/forms.hpp"
#include "polymfd/solve.hpp"

namespace polymfd {

/// Piecewise linear field x -> value_P + slope_P . (x - x_P).
struct CellLinearField {
  Eigen::VectorXd value;                          // one constant per cell
  Eigen::Matrix<double, Eigen::Dynamic, 3> slope; // one gradient per cell

  double evaluate(const PolyMesh& mesh, int cell, const Vec3& x) const {
    return value[cell] +
           slope.row(cell).dot((x - mesh.cells[static_cast<std::size_t>(cell)].centroid));
  }
};

/// Constant-vector reconstruction (1/|P|) R^T (G|_P); exact on interpolants
/// of constant fields.
Vec3 reconstruct_vector(const PolyMesh& mesh, const std::vector<LocalElementMatrices>& forms,
                        int cell, const FaceField& G);

/// Reconstructed gradient (1/|P|) K^-1 A^T (v|_P); exact on interpolants of
/// linear polynomials.
Vec3 reconstruct_gradient(const PolyMesh& mesh, const std::vector<LocalElementMatrices>& forms,
                          const MaterialSample& material, int cell, const NodeField& v);

/// p_h^R: cell value p_h, slope (1/|P|) K^-1 R^T (F_h|_P).
CellLinearField postprocess_mixed(const MixedSolution& sol, const PolyMesh& mesh,
                                  const std::vector<LocalElementMatrices>& forms,
                                  const MaterialSample& material, bool use_threads = true);

/// u_h^R: cell value (1/|P|) sum_i w_P^i u(V_i), slope = reconstructed
/// gradient.
CellLinearField postprocess_nodal(const NodeField& u, const PolyMesh& mesh,
                                  const std::vector<LocalElementMatrices>& forms,
                                  const MaterialSample& material, const QuadratureWeights& quad,
                                  bool use_threads = true);

/// Errors of a run against the manufactured solution. Fields left as NaN
/// were not produced by the run (e.g. flux errors for a nodal solve).
struct ErrorReport {
  double h = 0.0;
  int n_cells = 0;
  int n_faces = 0;
  int n_vertices = 0;
  double nodal = std::numeric_limits<double>::quiet_NaN();  // discrete L2 at vertices
  double cell = std::numeric_limits<double>::quiet_NaN();   // |P|-weighted L2 of p_h
  double flux = std::numeric_limits<double>::quiet_NaN();   // M_F energy norm
  double grad = std::numeric_limits<double>::quiet_NaN();   // broken L2 of grad^R
  double post = std::numeric_limits<double>::quiet_NaN();   // L2 of the linear postprocessing
};

/// Throws MissingExact when the problem has no manufactured solution.
ErrorReport nodal_errors(const PolyMesh& mesh, const std::vector<LocalElementMatrices>& forms,
                         const QuadratureWeights& quad, const MaterialSample& material,
                         const ProblemSpec& spec, const NodeField& u, bool use_threads = true);
ErrorReport mixed_errors(const PolyMesh& mesh, const std::vector<LocalElementMatrices>& forms,
                         const MaterialSample& material, const ProblemSpec& spec,
                         const MixedSolution& sol, bool use_threads = true);

/// Merges the defined columns of b into a (both from the same mesh level).
ErrorReport merge_reports(ErrorReport a, const ErrorReport& b);

/// Convergence rates between consecutive refinement levels:
/// log(e1/e2) / log(h1/h2). nullopt marks an exactly reproduced quantity
/// (both errors below 1e-14). Requires >= 2 reports with strictly
/// decreasing h; throws BadSequence otherwise.
struct ErrorRates {
  std::optional<double> nodal, cell, flux, grad, post;
};
std::vector<ErrorRates> convergence_rates(const std::vector<ErrorReport>& reports);

}  // namespace polymfd
