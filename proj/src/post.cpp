// Copyright (c) The polymfd Authors.
// SPDX-License-Identifier: Apache-2.0

#include "polymfd/post.hpp"

#include <cmath>

#include "polymfd/interp.hpp"
#include "polymfd/parallel.hpp"

namespace polymfd {

Vec3 reconstruct_vector(const PolyMesh& mesh, const std::vector<LocalElementMatrices>& forms,
                        int cell, const FaceField& G) {
  const Eigen::VectorXd local = local_face_values(mesh, cell, G);
  return forms[static_cast<std::size_t>(cell)].R.transpose() * local /
         mesh.cells[static_cast<std::size_t>(cell)].volume;
}

Vec3 reconstruct_gradient(const PolyMesh& mesh, const std::vector<LocalElementMatrices>& forms,
                          const MaterialSample& material, int cell, const NodeField& v) {
  const Eigen::VectorXd local = local_node_values(mesh, cell, v);
  const Vec3 a = forms[static_cast<std::size_t>(cell)].A.transpose() * local;
  return material.K[static_cast<std::size_t>(cell)].llt().solve(a) /
         mesh.cells[static_cast<std::size_t>(cell)].volume;
}

CellLinearField postprocess_mixed(const MixedSolution& sol, const PolyMesh& mesh,
                                  const std::vector<LocalElementMatrices>& forms,
                                  const MaterialSample& material, bool use_threads) {
  CellLinearField out;
  out.value = sol.pressure.data();
  out.slope.resize(mesh.n_cells(), 3);
  parallel_for(
      static_cast<std::size_t>(mesh.n_cells()),
      [&](std::size_t c) {
        const Eigen::VectorXd local = local_face_values(mesh, static_cast<int>(c), sol.flux);
        const Vec3 r = forms[c].R.transpose() * local;
        out.slope.row(static_cast<Eigen::Index>(c)) =
            (material.K[c].llt().solve(r) / mesh.cells[c].volume).transpose();
      },
      use_threads);
  return out;
}

CellLinearField postprocess_nodal(const NodeField& u, const PolyMesh& mesh,
                                  const std::vector<LocalElementMatrices>& forms,
                                  const MaterialSample& material, const QuadratureWeights& quad,
                                  bool use_threads) {
  CellLinearField out;
  out.value.resize(mesh.n_cells());
  out.slope.resize(mesh.n_cells(), 3);
  parallel_for(
      static_cast<std::size_t>(mesh.n_cells()),
      [&](std::size_t c) {
        const Eigen::VectorXd local = local_node_values(mesh, static_cast<int>(c), u);
        out.value[static_cast<Eigen::Index>(c)] =
            quad.cell[c].dot(local) / mesh.cells[c].volume;
        out.slope.row(static_cast<Eigen::Index>(c)) =
            reconstruct_gradient(mesh, forms, material, static_cast<int>(c), u).transpose();
      },
      use_threads);
  return out;
}

namespace {

const ProblemSpec::ExactSolution& require_exact(const ProblemSpec& spec) {
  if (!spec.exact) {
    throw MissingExact("problem has no manufactured solution");
  }
  return *spec.exact;
}

// Index-ordered reduction of per-cell partial sums keeps the norms
// deterministic regardless of the thread count.
double sum_sqrt(const std::vector<double>& terms) {
  double sum = 0.0;
  for (double t : terms) {
    sum += t;
  }
  return std::sqrt(std::max(sum, 0.0));
}

}  // namespace

ErrorReport nodal_errors(const PolyMesh& mesh, const std::vector<LocalElementMatrices>& forms,
                         const QuadratureWeights& quad, const MaterialSample& material,
                         const ProblemSpec& spec, const NodeField& u, bool use_threads) {
  const auto& exact = require_exact(spec);
  const auto nc = static_cast<std::size_t>(mesh.n_cells());

  ErrorReport report;
  report.h = mesh.h;
  report.n_cells = mesh.n_cells();
  report.n_faces = mesh.n_faces();
  report.n_vertices = mesh.n_vertices();

  const CellLinearField recon = postprocess_nodal(u, mesh, forms, material, quad, use_threads);

  std::vector<double> nodal_terms(nc), grad_terms(nc), post_terms(nc);
  parallel_for(
      nc,
      [&](std::size_t c) {
        const Cell& cell = mesh.cells[c];
        double nodal = 0.0;
        for (std::size_t i = 0; i < cell.vertex_ids.size(); ++i) {
          const int v = cell.vertex_ids[i];
          const double diff = u[v] - exact.u(mesh.vertices[static_cast<std::size_t>(v)]);
          nodal += quad.cell[c][static_cast<Eigen::Index>(i)] * diff * diff;
        }
        nodal_terms[c] = nodal;

        const Vec3 diff_grad =
            reconstruct_gradient(mesh, forms, material, static_cast<int>(c), u) -
            exact.grad(cell.centroid);
        grad_terms[c] = cell.volume * diff_grad.squaredNorm();

        post_terms[c] = integrate_cell(mesh, static_cast<int>(c), [&](const Vec3& x) {
          const double diff = recon.evaluate(mesh, static_cast<int>(c), x) - exact.u(x);
          return diff * diff;
        });
      },
      use_threads);

  report.nodal = sum_sqrt(nodal_terms);
  report.grad = sum_sqrt(grad_terms);
  report.post = sum_sqrt(post_terms);
  return report;
}

ErrorReport mixed_errors(const PolyMesh& mesh, const std::vector<LocalElementMatrices>& forms,
                         const MaterialSample& material, const ProblemSpec& spec,
                         const MixedSolution& sol, bool use_threads) {
  const auto& exact = require_exact(spec);
  const auto nc = static_cast<std::size_t>(mesh.n_cells());

  ErrorReport report;
  report.h = mesh.h;
  report.n_cells = mesh.n_cells();
  report.n_faces = mesh.n_faces();
  report.n_vertices = mesh.n_vertices();

  // The mixed scalar target is u - mean(u); use the discrete volume-weighted
  // mean so the patch test is reproduced exactly.
  const CellField u_avg = interp_cell(exact.u, mesh, use_threads);
  double volume = 0.0;
  double mean = 0.0;
  for (int c = 0; c < mesh.n_cells(); ++c) {
    volume += mesh.cells[static_cast<std::size_t>(c)].volume;
    mean += mesh.cells[static_cast<std::size_t>(c)].volume * u_avg[c];
  }
  mean /= volume;

  const FaceField flux_target = interp_face(exact.flux, mesh, use_threads);
  const CellLinearField recon = postprocess_mixed(sol, mesh, forms, material, use_threads);

  std::vector<double> cell_terms(nc), flux_terms(nc), post_terms(nc);
  parallel_for(
      nc,
      [&](std::size_t c) {
        const Cell& cell = mesh.cells[c];
        const double diff_p = sol.pressure[static_cast<Eigen::Index>(c)] - (u_avg[static_cast<Eigen::Index>(c)] - mean);
        cell_terms[c] = cell.volume * diff_p * diff_p;

        const Eigen::VectorXd delta =
            local_face_values(mesh, static_cast<int>(c), sol.flux) -
            local_face_values(mesh, static_cast<int>(c), flux_target);
        flux_terms[c] = delta.dot(forms[c].M_F * delta);

        post_terms[c] = integrate_cell(mesh, static_cast<int>(c), [&](const Vec3& x) {
          const double diff = recon.evaluate(mesh, static_cast<int>(c), x) - (exact.u(x) - mean);
          return diff * diff;
        });
      },
      use_threads);

  report.cell = sum_sqrt(cell_terms);
  report.flux = sum_sqrt(flux_terms);
  report.post = sum_sqrt(post_terms);
  return report;
}

ErrorReport merge_reports(ErrorReport a, const ErrorReport& b) {
  auto take = [](double& dst, double src) {
    if (std::isnan(dst) && !std::isnan(src)) {
      dst = src;
    }
  };
  take(a.nodal, b.nodal);
  take(a.cell, b.cell);
  take(a.flux, b.flux);
  take(a.grad, b.grad);
  take(a.post, b.post);
  return a;
}

std::vector<ErrorRates> convergence_rates(const std::vector<ErrorReport>& reports) {
  if (reports.size() < 2) {
    throw BadSequence("need at least two refinement levels");
  }
  for (std::size_t i = 1; i < reports.size(); ++i) {
    if (!(reports[i].h < reports[i - 1].h)) {
      throw BadSequence("mesh sizes must be strictly decreasing");
    }
  }
  auto rate = [](double e1, double e2, double h1, double h2) -> std::optional<double> {
    if (e1 < 1e-14 && e2 < 1e-14) {
      return std::nullopt;  // exactly reproduced
    }
    return std::log(e1 / e2) / std::log(h1 / h2);
  };
  std::vector<ErrorRates> rates(reports.size() - 1);
  for (std::size_t i = 1; i < reports.size(); ++i) {
    const ErrorReport& r1 = reports[i - 1];
    const ErrorReport& r2 = reports[i];
    rates[i - 1].nodal = rate(r1.nodal, r2.nodal, r1.h, r2.h);
    rates[i - 1].cell = rate(r1.cell, r2.cell, r1.h, r2.h);
    rates[i - 1].flux = rate(r1.flux, r2.flux, r1.h, r2.h);
    rates[i - 1].grad = rate(r1.grad, r2.grad, r1.h, r2.h);
    rates[i - 1].post = rate(r1.post, r2.post, r1.h, r2.h);
  }
  return rates;
}

}  // namespace polymfd
