// Copyright (c) The polymfd Authors.
// SPDX-License-Identifier: Apache-2.0

#include "polymfd/fields.hpp"

#include <cmath>

namespace polymfd {

Eigen::VectorXd local_face_values(const PolyMesh& mesh, int cell, const FaceField& F) {
  const Cell& c = mesh.cells[static_cast<std::size_t>(cell)];
  Eigen::VectorXd out(static_cast<Eigen::Index>(c.face_refs.size()));
  for (std::size_t i = 0; i < c.face_refs.size(); ++i) {
    out[static_cast<Eigen::Index>(i)] = c.face_refs[i].sign * F[c.face_refs[i].face];
  }
  return out;
}

Eigen::VectorXd local_node_values(const PolyMesh& mesh, int cell, const NodeField& u) {
  const Cell& c = mesh.cells[static_cast<std::size_t>(cell)];
  Eigen::VectorXd out(static_cast<Eigen::Index>(c.vertex_ids.size()));
  for (std::size_t i = 0; i < c.vertex_ids.size(); ++i) {
    out[static_cast<Eigen::Index>(i)] = u[c.vertex_ids[i]];
  }
  return out;
}

bool in_zero_boundary_subspace(const PolyMesh& mesh, const NodeField& u, double tol) {
  for (int v = 0; v < mesh.n_vertices(); ++v) {
    if (mesh.vertex_boundary[static_cast<std::size_t>(v)] && std::abs(u[v]) > tol) {
      return false;
    }
  }
  return true;
}

}  // namespace polymfd
