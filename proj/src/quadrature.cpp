// Copyright (c) The polymfd Authors.
// SPDX-License-Identifier: Apache-2.0

#include "polymfd/quadrature.hpp"

#include <cmath>
#include <sstream>

#include "polymfd/parallel.hpp"

namespace polymfd {

namespace {

// Minimum-norm solution of the moment system
//   sum_l w_l = measure,  sum_l w_l (x_l - center) = 0,
// posed in coordinates scaled by the diameter for conditioning.
Eigen::VectorXd min_norm_moment_weights(const std::vector<Vec3>& points, const Vec3& center,
                                        double measure, double diameter) {
  const auto n = static_cast<Eigen::Index>(points.size());
  Eigen::MatrixXd M(4, n);
  Eigen::Vector4d rhs(measure, 0.0, 0.0, 0.0);
  for (Eigen::Index l = 0; l < n; ++l) {
    M(0, l) = 1.0;
    M.block<3, 1>(1, l) = (points[static_cast<std::size_t>(l)] - center) / diameter;
  }
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(M);
  return cod.solve(rhs);
}

bool nonnegative(const Eigen::VectorXd& w, double measure) {
  return (w.array() >= -1e-12 * measure).all();
}

}  // namespace

QuadratureWeights build_quadrature(const PolyMesh& mesh, CellWeightMode mode, bool use_threads) {
  QuadratureWeights q;
  q.face.resize(mesh.faces.size());
  q.cell.resize(mesh.cells.size());

  parallel_for(
      mesh.faces.size(),
      [&](std::size_t fi) {
        const Face& f = mesh.faces[fi];
        const auto& loop = f.vertex_loop;
        std::vector<Vec3> pts;
        pts.reserve(loop.size());
        for (int v : loop) {
          pts.push_back(mesh.vertices[static_cast<std::size_t>(v)]);
        }
        Eigen::VectorXd w = min_norm_moment_weights(pts, f.centroid, f.area, f.diameter);
        if (!nonnegative(w, f.area)) {
          // Fan lumping: each fan triangle gives area/3 to its two loop
          // vertices; the centroid share is spread over the loop in
          // proportion to the minimum-norm weights, which preserves
          // exactness on linears.
          Eigen::VectorXd lumped = w / 3.0;
          const auto n = static_cast<Eigen::Index>(loop.size());
          for (Eigen::Index l = 0; l < n; ++l) {
            const Vec3& a = pts[static_cast<std::size_t>(l)];
            const Vec3& b = pts[static_cast<std::size_t>((l + 1) % n)];
            const double tri =
                0.5 * (a - f.centroid).cross(b - f.centroid).dot(f.normal);
            lumped[l] += tri / 3.0;
            lumped[(l + 1) % n] += tri / 3.0;
          }
          w = lumped;
          if (!nonnegative(w, f.area)) {
            std::ostringstream os;
            os << "no nonnegative linear-exact weights for face " << fi;
            throw WeightSolveFailure(os.str());
          }
        }
        q.face[fi] = std::move(w);
      },
      use_threads);

  parallel_for(
      mesh.cells.size(),
      [&](std::size_t ci) {
        const Cell& c = mesh.cells[ci];
        const auto n = static_cast<Eigen::Index>(c.vertex_ids.size());
        if (mode == CellWeightMode::Uniform) {
          q.cell[ci] = Eigen::VectorXd::Constant(n, c.volume / static_cast<double>(n));
          return;
        }
        std::vector<Vec3> pts;
        pts.reserve(c.vertex_ids.size());
        for (int v : c.vertex_ids) {
          pts.push_back(mesh.vertices[static_cast<std::size_t>(v)]);
        }
        Eigen::VectorXd w = min_norm_moment_weights(pts, c.centroid, c.volume, c.diameter);
        if (!nonnegative(w, c.volume)) {
          // Sub-tetrahedron vertex-rule lumping. Corner masses at mesh
          // vertices stay; the cell-centroid mass (zero first moment) is
          // spread like the minimum-norm weights; each face-centroid mass is
          // pushed onto that face's vertices with the facial rule, which
          // reproduces its first moment.
          Eigen::VectorXd lumped = Eigen::VectorXd::Zero(n);
          double centroid_mass = 0.0;
          for (const FaceRef& fr : c.face_refs) {
            const Face& f = mesh.faces[static_cast<std::size_t>(fr.face)];
            const auto& loop = f.vertex_loop;
            const auto& fw = q.face[static_cast<std::size_t>(fr.face)];
            double face_mass = 0.0;
            for (std::size_t l = 0; l < loop.size(); ++l) {
              const Vec3& a = mesh.vertices[static_cast<std::size_t>(loop[l])];
              const Vec3& b =
                  mesh.vertices[static_cast<std::size_t>(loop[(l + 1) % loop.size()])];
              const double vol = fr.sign *
                                 (f.centroid - c.centroid)
                                     .cross(a - c.centroid)
                                     .dot(b - c.centroid) /
                                 6.0;
              lumped[mesh.local_vertex(static_cast<int>(ci), loop[l])] += vol / 4.0;
              lumped[mesh.local_vertex(static_cast<int>(ci), loop[(l + 1) % loop.size()])] +=
                  vol / 4.0;
              face_mass += vol / 4.0;
              centroid_mass += vol / 4.0;
            }
            for (std::size_t l = 0; l < loop.size(); ++l) {
              lumped[mesh.local_vertex(static_cast<int>(ci), loop[l])] +=
                  face_mass * fw[static_cast<Eigen::Index>(l)] / f.area;
            }
          }
          lumped += centroid_mass / c.volume * w;
          w = lumped;
          if (!nonnegative(w, c.volume)) {
            std::ostringstream os;
            os << "no nonnegative linear-exact cell weights for cell " << ci;
            throw WeightSolveFailure(os.str());
          }
        }
        q.cell[ci] = std::move(w);
      },
      use_threads);

  return q;
}

}  // namespace polymfd
