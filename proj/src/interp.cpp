// Copyright (c) The polymfd Authors.
// SPDX-License-Identifier: Apache-2.0

#include "polymfd/interp.hpp"

#include <cmath>

#include "polymfd/parallel.hpp"

namespace polymfd {

namespace {

// Degree-2 rule on a tetrahedron: four points, equal weights.
constexpr double kTetA = 0.58541019662496845446;  // (5 + 3 sqrt 5) / 20
constexpr double kTetB = 0.13819660112501051518;  // (5 - sqrt 5) / 20

}  // namespace

double integrate_cell(const PolyMesh& mesh, int cell, const ScalarFn& f) {
  const Cell& c = mesh.cells[static_cast<std::size_t>(cell)];
  double sum = 0.0;
  for (const FaceRef& fr : c.face_refs) {
    const Face& face = mesh.faces[static_cast<std::size_t>(fr.face)];
    const auto& loop = face.vertex_loop;
    for (std::size_t i = 0; i < loop.size(); ++i) {
      const Vec3& a = mesh.vertices[static_cast<std::size_t>(loop[i])];
      const Vec3& b = mesh.vertices[static_cast<std::size_t>(loop[(i + 1) % loop.size()])];
      // Signed sub-tetrahedron (x_P, x_f, a, b); the sign keeps the sum exact
      // even when the cell is not star-shaped about its centroid.
      const Vec3 u = face.centroid - c.centroid;
      const Vec3 v = a - c.centroid;
      const Vec3 w = b - c.centroid;
      const double vol = fr.sign * u.cross(v).dot(w) / 6.0;
      if (vol == 0.0) {
        continue;
      }
      const Vec3 verts[4] = {c.centroid, face.centroid, a, b};
      for (int q = 0; q < 4; ++q) {
        Vec3 x = Vec3::Zero();
        for (int t = 0; t < 4; ++t) {
          x += (t == q ? kTetA : kTetB) * verts[t];
        }
        sum += 0.25 * vol * f(x);
      }
    }
  }
  return sum;
}

double integrate_face(const PolyMesh& mesh, int face, const ScalarFn& f) {
  const Face& fc = mesh.faces[static_cast<std::size_t>(face)];
  const auto& loop = fc.vertex_loop;
  double sum = 0.0;
  for (std::size_t i = 0; i < loop.size(); ++i) {
    const Vec3& a = mesh.vertices[static_cast<std::size_t>(loop[i])];
    const Vec3& b = mesh.vertices[static_cast<std::size_t>(loop[(i + 1) % loop.size()])];
    const double tri_area = 0.5 * (a - fc.centroid).cross(b - fc.centroid).dot(fc.normal);
    sum += tri_area * f((fc.centroid + a + b) / 3.0);
  }
  return sum;
}

CellField interp_cell(const ScalarFn& p, const PolyMesh& mesh, bool use_threads) {
  CellField out(mesh.n_cells());
  parallel_for(
      static_cast<std::size_t>(mesh.n_cells()),
      [&](std::size_t c) {
        out[static_cast<Eigen::Index>(c)] =
            integrate_cell(mesh, static_cast<int>(c), p) / mesh.cells[c].volume;
      },
      use_threads);
  return out;
}

FaceField interp_face(const VectorFn& F, const PolyMesh& mesh, bool use_threads) {
  FaceField out(mesh.n_faces());
  parallel_for(
      static_cast<std::size_t>(mesh.n_faces()),
      [&](std::size_t f) {
        const Vec3 n = mesh.faces[f].normal;
        out[static_cast<Eigen::Index>(f)] =
            integrate_face(mesh, static_cast<int>(f), [&](const Vec3& x) { return F(x).dot(n); }) /
            mesh.faces[f].area;
      },
      use_threads);
  return out;
}

NodeField interp_node(const ScalarFn& u, const PolyMesh& mesh, bool use_threads) {
  NodeField out(mesh.n_vertices());
  parallel_for(
      static_cast<std::size_t>(mesh.n_vertices()),
      [&](std::size_t v) { out[static_cast<Eigen::Index>(v)] = u(mesh.vertices[v]); },
      use_threads);
  return out;
}

EdgeField discrete_grad(const NodeField& u, const PolyMesh& mesh) {
  EdgeField out(mesh.n_edges());
  for (int e = 0; e < mesh.n_edges(); ++e) {
    const Edge& edge = mesh.edges[static_cast<std::size_t>(e)];
    out[e] = (u[edge.v2] - u[edge.v1]) / edge.length;
  }
  return out;
}

CellField discrete_div(const FaceField& F, const PolyMesh& mesh) {
  CellField out(mesh.n_cells());
  for (int c = 0; c < mesh.n_cells(); ++c) {
    const Cell& cell = mesh.cells[static_cast<std::size_t>(c)];
    double sum = 0.0;
    for (const FaceRef& fr : cell.face_refs) {
      sum += fr.sign * mesh.faces[static_cast<std::size_t>(fr.face)].area * F[fr.face];
    }
    out[c] = sum / cell.volume;
  }
  return out;
}

}  // namespace polymfd
