// Copyright (c) The polymfd Authors.
// SPDX-License-Identifier: Apache-2.0

#include "polymfd/assemble.hpp"

#include <cmath>

#include "polymfd/interp.hpp"
#include "polymfd/parallel.hpp"

namespace polymfd {

namespace {

using Triplet = Eigen::Triplet<double>;

struct NodalSkeleton {
  std::vector<int> unknown_of_vertex;
  std::vector<int> vertex_of_unknown;
  Eigen::VectorXd boundary_values;
};

NodalSkeleton nodal_skeleton(const PolyMesh& mesh, const ProblemSpec& spec) {
  NodalSkeleton s;
  s.unknown_of_vertex.assign(static_cast<std::size_t>(mesh.n_vertices()), -1);
  s.boundary_values = Eigen::VectorXd::Zero(mesh.n_vertices());
  for (int v = 0; v < mesh.n_vertices(); ++v) {
    if (mesh.vertex_boundary[static_cast<std::size_t>(v)]) {
      s.boundary_values[v] =
          spec.dirichlet ? spec.dirichlet(mesh.vertices[static_cast<std::size_t>(v)]) : 0.0;
    } else {
      s.unknown_of_vertex[static_cast<std::size_t>(v)] =
          static_cast<int>(s.vertex_of_unknown.size());
      s.vertex_of_unknown.push_back(v);
    }
  }
  if (s.vertex_of_unknown.empty()) {
    throw EmptyInterior("mesh has no interior vertices");
  }
  return s;
}

// Shared scatter for the nodal-type methods: per-cell local matrices are
// built in parallel, then reduced serially in cell order so the assembled
// triplets are deterministic.
NodalSystem assemble_vertex_system(const PolyMesh& mesh,
                                   const std::vector<Eigen::MatrixXd>& local,
                                   const QuadratureWeights& quad,
                                   const MaterialSample& material, const ProblemSpec& spec,
                                   bool symmetric_spd) {
  NodalSkeleton s = nodal_skeleton(mesh, spec);
  const int n = static_cast<int>(s.vertex_of_unknown.size());

  std::vector<Triplet> triplets;
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);

  for (int c = 0; c < mesh.n_cells(); ++c) {
    const Cell& cell = mesh.cells[static_cast<std::size_t>(c)];
    const Eigen::MatrixXd& L = local[static_cast<std::size_t>(c)];
    const auto& w = quad.cell[static_cast<std::size_t>(c)];
    for (std::size_t a = 0; a < cell.vertex_ids.size(); ++a) {
      const int ga = cell.vertex_ids[a];
      const int ia = s.unknown_of_vertex[static_cast<std::size_t>(ga)];
      if (ia < 0) {
        continue;
      }
      rhs[ia] += material.g[static_cast<std::size_t>(c)] * w[static_cast<Eigen::Index>(a)];
      for (std::size_t b = 0; b < cell.vertex_ids.size(); ++b) {
        const int gb = cell.vertex_ids[b];
        const int ib = s.unknown_of_vertex[static_cast<std::size_t>(gb)];
        const double v = L(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b));
        if (v == 0.0) {
          continue;
        }
        if (ib >= 0) {
          triplets.emplace_back(ia, ib, v);
        } else {
          rhs[ia] -= v * s.boundary_values[gb];  // Dirichlet lifting
        }
      }
    }
  }

  NodalSystem out;
  out.sys.A.resize(n, n);
  out.sys.A.setFromTriplets(triplets.begin(), triplets.end());
  out.sys.rhs = std::move(rhs);
  out.sys.symmetric = symmetric_spd;
  out.sys.spd = symmetric_spd;
  out.unknown_of_vertex = std::move(s.unknown_of_vertex);
  out.vertex_of_unknown = std::move(s.vertex_of_unknown);
  out.boundary_values = std::move(s.boundary_values);
  return out;
}

}  // namespace

NodalSystem assemble_nodal(const PolyMesh& mesh, const std::vector<LocalElementMatrices>& forms,
                           const QuadratureWeights& quad, const MaterialSample& material,
                           const ProblemSpec& spec, bool use_threads) {
  std::vector<Eigen::MatrixXd> local(forms.size());
  parallel_for(
      forms.size(), [&](std::size_t c) { local[c] = forms[c].M_N; }, use_threads);
  return assemble_vertex_system(mesh, local, quad, material, spec, /*symmetric_spd=*/true);
}

double local_tau(const PolyMesh& mesh, int cell, const Mat3& K, const Vec3& beta,
                 double tau_scale) {
  const double b = beta.norm();
  if (b <= 1e-14) {
    return 0.0;  // pure diffusion fallback
  }
  const double h = mesh.cells[static_cast<std::size_t>(cell)].diameter;
  Eigen::SelfAdjointEigenSolver<Mat3> eig(K);
  const double peclet = b * h / (2.0 * eig.eigenvalues().minCoeff());
  return tau_scale * (h / (2.0 * b)) * std::min(1.0, peclet / 3.0);
}

NodalSystem assemble_advection(const PolyMesh& mesh,
                               const std::vector<LocalElementMatrices>& forms,
                               const QuadratureWeights& quad, const MaterialSample& material,
                               const ProblemSpec& spec, const AdvectionConfig& adv,
                               bool use_threads) {
  std::vector<Eigen::MatrixXd> local(forms.size());
  parallel_for(
      forms.size(),
      [&](std::size_t c) {
        const Cell& cell = mesh.cells[c];
        const Mat3& K = material.K[c];
        const Vec3& beta = material.beta[c];
        Eigen::MatrixXd L = forms[c].M_N;
        if (beta.norm() > 1e-14) {
          // Row of beta . grad^R: (1/|P|) beta^T K^-1 A^T, sampled against
          // the elemental vertex quadrature.
          const Eigen::VectorXd r =
              forms[c].A * K.llt().solve(beta) / cell.volume;
          const auto& w = quad.cell[c];
          L += w * r.transpose();
          if (adv.streamline_diffusion) {
            const double tau = local_tau(mesh, static_cast<int>(c), K, beta, adv.tau_scale);
            L += tau * cell.volume * r * r.transpose();
          }
        }
        local[c] = std::move(L);
      },
      use_threads);
  return assemble_vertex_system(mesh, local, quad, material, spec, /*symmetric_spd=*/false);
}

MixedSystem assemble_mixed(const PolyMesh& mesh, const std::vector<LocalElementMatrices>& forms,
                           const ProblemSpec& spec, bool use_threads) {
  MixedSystem out;
  out.n_faces = mesh.n_faces();
  out.n_cells = mesh.n_cells();
  const int n = out.n_faces + out.n_cells + 2;
  const int il = out.lambda_index();
  const int im = out.mu_index();

  const CellField g_avg = interp_cell(spec.g ? spec.g : ScalarFn([](const Vec3&) { return 0.0; }),
                                      mesh, use_threads);

  std::vector<Triplet> triplets;
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);

  for (int c = 0; c < mesh.n_cells(); ++c) {
    const Cell& cell = mesh.cells[static_cast<std::size_t>(c)];
    const Eigen::MatrixXd& MF = forms[static_cast<std::size_t>(c)].M_F;
    const int row_p = out.n_faces + c;

    // [F, G]_F block with the sigma signs folded into the scatter.
    for (std::size_t a = 0; a < cell.face_refs.size(); ++a) {
      const FaceRef& fa = cell.face_refs[a];
      for (std::size_t b = 0; b < cell.face_refs.size(); ++b) {
        const FaceRef& fb = cell.face_refs[b];
        triplets.emplace_back(fa.face, fb.face,
                              fa.sign * fb.sign *
                                  MF(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)));
      }
      // div^h coupling: B(P, f) = sigma |f|.
      const double bval = fa.sign * mesh.faces[static_cast<std::size_t>(fa.face)].area;
      triplets.emplace_back(row_p, fa.face, bval);
      triplets.emplace_back(fa.face, row_p, bval);
    }

    rhs[row_p] = -cell.volume * g_avg[c];
    rhs[il] += rhs[row_p];

    // Mean-zero pin on the pressure.
    triplets.emplace_back(row_p, im, cell.volume);
    triplets.emplace_back(im, row_p, cell.volume);
  }

  // Boundary faces: Dirichlet datum on the flux equations and the lambda
  // border that absorbs its incompatible mean.
  for (int f = 0; f < out.n_faces; ++f) {
    if (!mesh.face_boundary[static_cast<std::size_t>(f)]) {
      continue;
    }
    const int c = mesh.face_cells[static_cast<std::size_t>(f)][0] >= 0
                      ? mesh.face_cells[static_cast<std::size_t>(f)][0]
                      : mesh.face_cells[static_cast<std::size_t>(f)][1];
    int sigma = 0;
    for (const FaceRef& fr : mesh.cells[static_cast<std::size_t>(c)].face_refs) {
      if (fr.face == f) {
        sigma = fr.sign;
        break;
      }
    }
    const Face& face = mesh.faces[static_cast<std::size_t>(f)];
    const double d = sigma * face.area;
    triplets.emplace_back(f, il, d);
    triplets.emplace_back(il, f, d);
    rhs[f] += d * (spec.dirichlet ? spec.dirichlet(face.centroid) : 0.0);
  }

  out.sys.A.resize(n, n);
  out.sys.A.setFromTriplets(triplets.begin(), triplets.end());
  out.sys.rhs = std::move(rhs);
  out.sys.symmetric = true;
  out.sys.spd = false;
  return out;
}

}  // namespace polymfd
