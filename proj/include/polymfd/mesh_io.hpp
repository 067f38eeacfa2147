// Copyright (c) The polymfd Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <map>
#include <string>

#include "polymfd/fields.hpp"
#include "polymfd/mesh.hpp"

namespace polymfd {

/// JSON mesh schema, version 1:
///   { "version": 1,
///     "vertices": [[x,y,z], ...],
///     "faces":    [[v0,v1,...], ...],
///     "cells":    [[+-(face_index+1), ...], ...] }
/// The sign on a cell's face reference encodes sigma. Edges and boundary
/// entities are inferred. save followed by load is the identity on topology
/// and bit-identical on coordinates.
PolyMesh load_mesh(const std::string& path);
void save_mesh(const PolyMesh& mesh, const std::string& path);

/// Legacy ASCII VTK unstructured grid with polyhedron cells. NodeFields are
/// attached as point data, CellFields as cell data.
void export_vtk(const PolyMesh& mesh, const std::string& path,
                const std::map<std::string, NodeField>& point_data = {},
                const std::map<std::string, CellField>& cell_data = {});

}  // namespace polymfd
