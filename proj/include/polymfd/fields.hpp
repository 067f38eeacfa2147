// Copyright (c) The polymfd Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Dense>

#include "polymfd/mesh.hpp"

namespace polymfd {

/// One real value per mesh entity of a fixed kind. Face values are stored
/// relative to the face's fixed global normal, edge values relative to the
/// v1 -> v2 orientation.
template <typename Tag>
class EntityField {
public:
  EntityField() = default;
  explicit EntityField(Eigen::Index n) : data_(Eigen::VectorXd::Zero(n)) {}
  explicit EntityField(Eigen::VectorXd values) : data_(std::move(values)) {}

  Eigen::Index size() const { return data_.size(); }
  double operator[](Eigen::Index i) const { return data_[i]; }
  double& operator[](Eigen::Index i) { return data_[i]; }

  const Eigen::VectorXd& data() const { return data_; }
  Eigen::VectorXd& data() { return data_; }

private:
  Eigen::VectorXd data_;
};

struct CellTag {};
struct FaceTag {};
struct EdgeTag {};
struct NodeTag {};

using CellField = EntityField<CellTag>;  // space P
using FaceField = EntityField<FaceTag>;  // space F
using EdgeField = EntityField<EdgeTag>;  // space E
using NodeField = EntityField<NodeTag>;  // space N

/// Face values of a cell in face_refs order with the sigma signs applied
/// (flux densities relative to the outward normals of the cell).
Eigen::VectorXd local_face_values(const PolyMesh& mesh, int cell, const FaceField& F);

/// Node values of a cell in vertex_ids order.
Eigen::VectorXd local_node_values(const PolyMesh& mesh, int cell, const NodeField& u);

/// True when the field vanishes on every boundary vertex (member of N_0).
bool in_zero_boundary_subspace(const PolyMesh& mesh, const NodeField& u, double tol = 0.0);

}  // namespace polymfd
