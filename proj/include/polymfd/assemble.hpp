// Copyright (c) The polymfd Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Sparse>
#include <vector>

#include "polymfd/fields.hpp"
#include "polymfd/forms.hpp"
#include "polymfd/mesh.hpp"
#include "polymfd/problem.hpp"

namespace polymfd {

struct LinearSystem {
  Eigen::SparseMatrix<double> A;
  Eigen::VectorXd rhs;
  bool symmetric = false;
  bool spd = false;
};

/// Nodal system over the interior vertices; Dirichlet data handled by
/// lifting (boundary columns moved to the right-hand side).
struct NodalSystem {
  LinearSystem sys;
  std::vector<int> unknown_of_vertex;  // -1 for boundary vertices
  std::vector<int> vertex_of_unknown;
  Eigen::VectorXd boundary_values;     // u_D at boundary vertices, 0 elsewhere
};

/// Stiffness sum_P M_N^P restricted to interior vertices, source from the
/// elemental vertex quadrature. Throws EmptyInterior when every vertex lies
/// on the boundary.
NodalSystem assemble_nodal(const PolyMesh& mesh, const std::vector<LocalElementMatrices>& forms,
                           const QuadratureWeights& quad, const MaterialSample& material,
                           const ProblemSpec& spec, bool use_threads = true);

struct AdvectionConfig {
  bool streamline_diffusion = false;
  double tau_scale = 1.0;  // multiplies the Peclet-switched tau_P
};

/// Nodal advection-diffusion system: diffusion plus the rank-one advective
/// block per cell, optionally with the streamline-diffusion term.
NodalSystem assemble_advection(const PolyMesh& mesh,
                               const std::vector<LocalElementMatrices>& forms,
                               const QuadratureWeights& quad, const MaterialSample& material,
                               const ProblemSpec& spec, const AdvectionConfig& adv = {},
                               bool use_threads = true);

/// Saddle-point system of the mixed method. Unknowns are ordered faces,
/// cells, then two multiplier slots: a boundary-data shift lambda coupling
/// to the boundary-face rows (which keeps the per-cell flux equations exact)
/// and the mean-zero pin mu for the pressure; mu is structurally zero.
struct MixedSystem {
  LinearSystem sys;
  int n_faces = 0;
  int n_cells = 0;
  int lambda_index() const { return n_faces + n_cells; }
  int mu_index() const { return n_faces + n_cells + 1; }
};

MixedSystem assemble_mixed(const PolyMesh& mesh, const std::vector<LocalElementMatrices>& forms,
                           const ProblemSpec& spec, bool use_threads = true);

/// tau_P = tau_scale (h_P / (2|beta|)) min(1, Pe_P / 3) with the local
/// Peclet number Pe_P = |beta| h_P / (2 lambda_min(K)); zero when beta
/// vanishes on the cell.
double local_tau(const PolyMesh& mesh, int cell, const Mat3& K, const Vec3& beta,
                 double tau_scale = 1.0);

}  // namespace polymfd
