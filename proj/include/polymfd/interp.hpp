// Copyright (c) The polymfd Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <functional>

#include "polymfd/fields.hpp"
#include "polymfd/mesh.hpp"

namespace polymfd {

using ScalarFn = std::function<double(const Vec3&)>;
using VectorFn = std::function<Vec3(const Vec3&)>;
using TensorFn = std::function<Mat3(const Vec3&)>;

/// Integral of f over a cell by fan sub-tetrahedralization about the cell
/// centroid with a 4-point second-order rule per tetrahedron (exact for
/// quadratics on planar-faced cells).
double integrate_cell(const PolyMesh& mesh, int cell, const ScalarFn& f);

/// Integral of f over a face by the fan-triangle centroid rule (exact for
/// affine integrands).
double integrate_face(const PolyMesh& mesh, int face, const ScalarFn& f);

/// Cell averages (1/|P|) int_P p.
CellField interp_cell(const ScalarFn& p, const PolyMesh& mesh, bool use_threads = true);

/// Face-average normal flux densities (1/|f|) int_f F . n_f.
FaceField interp_face(const VectorFn& F, const PolyMesh& mesh, bool use_threads = true);

/// Pointwise vertex values u(V).
NodeField interp_node(const ScalarFn& u, const PolyMesh& mesh, bool use_threads = true);

/// Per-edge difference quotient (u(v2) - u(v1)) / |e|. Maps N_0 into E_0.
EdgeField discrete_grad(const NodeField& u, const PolyMesh& mesh);

/// Per-cell signed flux sum (1/|P|) sum_f |f| F_f^P.
CellField discrete_div(const FaceField& F, const PolyMesh& mesh);

}  // namespace polymfd
