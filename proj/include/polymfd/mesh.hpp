// Copyright (c) The polymfd Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Dense>

#include <array>
#include <string>
#include <vector>

#include "polymfd/errors.hpp"

namespace polymfd {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Point3 = Vec3;

/// Oriented edge, from vertex v1 to vertex v2.
struct Edge {
  int v1 = -1;
  int v2 = -1;
  double length = 0.0;
};

/// Planar polygonal face. The vertex loop runs counter-clockwise about the
/// stored unit normal (right-hand rule); the normal fixes the global
/// orientation of the face once and for all.
struct Face {
  std::vector<int> vertex_loop;
  double area = 0.0;
  double diameter = 0.0;
  Vec3 centroid = Vec3::Zero();
  Vec3 normal = Vec3::Zero();
};

/// Reference from a cell to one of its faces; sign is the relative
/// orientation between the face's global normal and the outward normal of
/// this cell (+1 when they coincide).
struct FaceRef {
  int face = -1;
  int sign = 0;
};

/// Simply-connected polyhedral cell. vertex_ids are sorted ascending and fix
/// the local DOF ordering used by the elemental matrices; face_refs fix the
/// local face ordering.
struct Cell {
  std::vector<FaceRef> face_refs;
  std::vector<int> vertex_ids;
  std::vector<int> edge_ids;
  double volume = 0.0;
  double diameter = 0.0;
  Vec3 centroid = Vec3::Zero();
};

/// Conforming polyhedral mesh. Immutable after construction by convention;
/// all queries are safe for concurrent read access.
struct PolyMesh {
  std::vector<Vec3> vertices;
  std::vector<Edge> edges;
  std::vector<Face> faces;
  std::vector<Cell> cells;

  /// Cells incident to each face, -1 when absent. Slot 0 holds the cell with
  /// sign +1 when such a cell exists.
  std::vector<std::array<int, 2>> face_cells;

  std::vector<char> vertex_boundary;
  std::vector<char> edge_boundary;
  std::vector<char> face_boundary;

  double h = 0.0;  // max cell diameter

  int n_vertices() const { return static_cast<int>(vertices.size()); }
  int n_edges() const { return static_cast<int>(edges.size()); }
  int n_faces() const { return static_cast<int>(faces.size()); }
  int n_cells() const { return static_cast<int>(cells.size()); }

  /// Local index of global vertex v within cell c (position in vertex_ids).
  int local_vertex(int c, int v) const;
};

struct FaceGeometry {
  double area = 0.0;
  Vec3 centroid = Vec3::Zero();
  Vec3 normal = Vec3::Zero();
};

/// Area, centroid and unit normal of a planar polygon given by its vertex
/// loop (fan rule about the vertex average, right-hand-rule normal).
/// Throws DegenerateFace / NonPlanarFace.
FaceGeometry face_geometry(const std::vector<Vec3>& loop);

struct CellGeometry {
  double volume = 0.0;
  Vec3 centroid = Vec3::Zero();
};

/// Volume and centroid of a cell from divergence-theorem surface sums over
/// its oriented faces. Throws OpenSurface / NegativeVolume.
CellGeometry cell_geometry(const std::vector<Vec3>& vertices,
                           const std::vector<Face>& faces,
                           const std::vector<FaceRef>& face_refs);
CellGeometry cell_geometry(const PolyMesh& mesh, int cell);

/// Builds a mesh from explicit faces (vertex loops) and cells given as
/// signed 1-based face references (sign = sigma). Computes all geometry,
/// edges, incidence and boundary flags.
PolyMesh build_mesh(std::vector<Vec3> vertices,
                    const std::vector<std::vector<int>>& face_loops,
                    const std::vector<std::vector<int>>& cell_faces);

/// Builds a mesh from per-cell outward-oriented vertex loops; shared faces
/// are deduplicated and sigma is inferred from the loop orientation.
PolyMesh mesh_from_cell_loops(std::vector<Vec3> vertices,
                              const std::vector<std::vector<std::vector<int>>>& cell_loops);

struct ValidationReport {
  std::vector<std::string> violations;
  double max_closedness = 0.0;     // max over cells of |sum sigma |f| n_f| / sum |f|
  double max_second_moment = 0.0;  // max relative defect of sum sigma |f| x_f n_f^T = |P| I
  double total_volume = 0.0;
  bool ok() const { return violations.empty(); }
};

/// Checks per-cell closedness, the second-moment identity, conformity counts
/// and positive measures. Never throws; all findings go into the report.
ValidationReport validate_mesh(const PolyMesh& mesh, bool use_threads = true);

/// Shape diagnostics from a fan sub-tetrahedralization of each cell.
/// Diagnostic only, never a hard gate.
struct MeshQualityReport {
  std::vector<int> subtet_count;         // per cell
  std::vector<double> min_shape_ratio;   // per cell, min r_T / h_T over sub-tets
  int max_subtets = 0;
  double min_shape = 1.0;       // global min of r_T / h_T
  double min_face_ratio = 1.0;  // min over cells/faces of h_f / h_P
  double min_edge_ratio = 1.0;  // min over faces/edges of |e| / h_f
};

MeshQualityReport mesh_quality(const PolyMesh& mesh);

}  // namespace polymfd
