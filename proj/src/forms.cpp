// Copyright (c) The polymfd Authors.
// SPDX-License-Identifier: Apache-2.0

#include "polymfd/forms.hpp"

#include <cmath>
#include <random>
#include <sstream>

#include "polymfd/interp.hpp"
#include "polymfd/parallel.hpp"

namespace polymfd {

namespace {

constexpr double kRankCutoff = 1e-10;

Mat3 spd_inverse(const Mat3& K, int cell) {
  Eigen::SelfAdjointEigenSolver<Mat3> eig(K);
  if (eig.eigenvalues().minCoeff() <= 0.0) {
    std::ostringstream os;
    os << "diffusion tensor on cell " << cell << " is not positive definite";
    throw SingularKTilde(os.str());
  }
  return K.inverse();
}

double symmetric_uniform(std::mt19937_64& rng) {
  return 2.0 * (static_cast<double>(rng() >> 11) * 0x1p-53) - 1.0;
}

}  // namespace

MaterialSample sample_material(const PolyMesh& mesh, const ProblemSpec& spec, SampleMode mode,
                               bool use_threads) {
  MaterialSample mat;
  const auto nc = static_cast<std::size_t>(mesh.n_cells());
  mat.K.resize(nc);
  mat.beta.resize(nc, Vec3::Zero());
  mat.g.resize(nc, 0.0);

  parallel_for(
      nc,
      [&](std::size_t c) {
        const Cell& cell = mesh.cells[c];
        Mat3 K;
        if (mode == SampleMode::Centroid) {
          K = spec.K(cell.centroid);
          if (spec.beta) {
            mat.beta[c] = spec.beta(cell.centroid);
          }
          if (spec.g) {
            mat.g[c] = spec.g(cell.centroid);
          }
        } else {
          for (int i = 0; i < 3; ++i) {
            for (int j = 0; j < 3; ++j) {
              K(i, j) = integrate_cell(mesh, static_cast<int>(c),
                                       [&](const Vec3& x) { return spec.K(x)(i, j); }) /
                        cell.volume;
            }
          }
          if (spec.beta) {
            for (int i = 0; i < 3; ++i) {
              mat.beta[c][i] = integrate_cell(mesh, static_cast<int>(c),
                                              [&](const Vec3& x) { return spec.beta(x)[i]; }) /
                              cell.volume;
            }
          }
          if (spec.g) {
            mat.g[c] = integrate_cell(mesh, static_cast<int>(c), spec.g) / cell.volume;
          }
        }
        if ((K - K.transpose()).norm() > 1e-14 * K.norm()) {
          std::ostringstream os;
          os << "diffusion tensor on cell " << c << " is not symmetric";
          throw SingularKTilde(os.str());
        }
        Eigen::SelfAdjointEigenSolver<Mat3> eig(K);
        if (eig.eigenvalues().minCoeff() <= 0.0) {
          std::ostringstream os;
          os << "diffusion tensor on cell " << c << " is not positive definite";
          throw SingularKTilde(os.str());
        }
        mat.K[c] = K;
      },
      use_threads);
  return mat;
}

std::pair<Eigen::MatrixXd, Eigen::MatrixXd> build_NR(const PolyMesh& mesh, int cell,
                                                     const Mat3& K) {
  const Cell& c = mesh.cells[static_cast<std::size_t>(cell)];
  const auto nf = static_cast<Eigen::Index>(c.face_refs.size());
  Eigen::MatrixXd N(nf, 3);
  Eigen::MatrixXd R(nf, 3);
  for (Eigen::Index f = 0; f < nf; ++f) {
    const FaceRef& fr = c.face_refs[static_cast<std::size_t>(f)];
    const Face& face = mesh.faces[static_cast<std::size_t>(fr.face)];
    N.row(f) = (fr.sign * face.normal).transpose() * K;
    R.row(f) = face.area * (face.centroid - c.centroid).transpose();
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(N);
  if (svd.singularValues()(2) < kRankCutoff * svd.singularValues()(0)) {
    std::ostringstream os;
    os << "N matrix of cell " << cell << " is rank deficient";
    throw RankDeficientN(os.str());
  }
  return {std::move(N), std::move(R)};
}

Eigen::MatrixXd build_W(const PolyMesh& mesh, int cell, const QuadratureWeights& quad) {
  const Cell& c = mesh.cells[static_cast<std::size_t>(cell)];
  Eigen::MatrixXd W = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(c.face_refs.size()),
                                            static_cast<Eigen::Index>(c.vertex_ids.size()));
  for (std::size_t f = 0; f < c.face_refs.size(); ++f) {
    const int fi = c.face_refs[f].face;
    const auto& loop = mesh.faces[static_cast<std::size_t>(fi)].vertex_loop;
    const auto& w = quad.face[static_cast<std::size_t>(fi)];
    for (std::size_t l = 0; l < loop.size(); ++l) {
      W(static_cast<Eigen::Index>(f), mesh.local_vertex(cell, loop[l])) +=
          w[static_cast<Eigen::Index>(l)];
    }
  }
  return W;
}

std::pair<Eigen::MatrixXd, Eigen::MatrixXd> build_AB(const PolyMesh& mesh, int cell,
                                                     const Eigen::MatrixXd& N,
                                                     const Eigen::MatrixXd& W) {
  const Cell& c = mesh.cells[static_cast<std::size_t>(cell)];
  Eigen::MatrixXd A = W.transpose() * N;
  Eigen::MatrixXd B(static_cast<Eigen::Index>(c.vertex_ids.size()), 3);
  for (std::size_t i = 0; i < c.vertex_ids.size(); ++i) {
    B.row(static_cast<Eigen::Index>(i)) =
        (mesh.vertices[static_cast<std::size_t>(c.vertex_ids[i])] - c.centroid).transpose();
  }
  return {std::move(A), std::move(B)};
}

Eigen::MatrixXd null_basis(const Eigen::MatrixXd& M, NullBasisKind kind) {
  const Eigen::Index rows = M.rows();
  const Eigen::Index cols = M.cols();
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(M, Eigen::ComputeFullU);
  if (cols > 0 && rows >= cols &&
      svd.singularValues()(cols - 1) < kRankCutoff * svd.singularValues()(0)) {
    throw RankDeficiency(kind == NullBasisKind::C ? "N has rank < 3"
                                                  : "[1|B] has rank < 4");
  }
  if (rows < cols) {
    throw RankDeficiency("fewer rows than columns");
  }
  return svd.matrixU().rightCols(rows - cols);
}

Eigen::MatrixXd build_MF(const PolyMesh& mesh, int cell, const Mat3& K,
                         const Eigen::MatrixXd& R, const Eigen::MatrixXd& C,
                         const StabilizationConfig& cfg) {
  const Cell& c = mesh.cells[static_cast<std::size_t>(cell)];
  const Mat3 Kinv = spd_inverse(K, cell);
  Eigen::MatrixXd M = R * Kinv * R.transpose() / c.volume;
  if (C.cols() > 0) {
    const double gamma = M.trace() / static_cast<double>(M.rows());
    M += cfg.u_scale_F * gamma * (C * C.transpose());
  }
  return M;
}

Eigen::MatrixXd build_MN(const PolyMesh& mesh, int cell, const Mat3& K,
                         const Eigen::MatrixXd& A, const Eigen::MatrixXd& D,
                         const StabilizationConfig& cfg) {
  const Cell& c = mesh.cells[static_cast<std::size_t>(cell)];
  const Mat3 Kinv = spd_inverse(K, cell);
  Eigen::MatrixXd M = A * Kinv * A.transpose() / c.volume;
  if (D.cols() > 0) {
    const double gamma = M.trace() / static_cast<double>(M.rows());
    M += cfg.u_scale_N * gamma * (D * D.transpose());
  }
  return M;
}

LocalElementMatrices build_cell_forms(const PolyMesh& mesh, int cell, const Mat3& K,
                                      const QuadratureWeights& quad,
                                      const StabilizationConfig& cfg) {
  LocalElementMatrices m;
  std::tie(m.N, m.R) = build_NR(mesh, cell, K);
  m.W = build_W(mesh, cell, quad);
  std::tie(m.A, m.B) = build_AB(mesh, cell, m.N, m.W);
  m.C = null_basis(m.N, NullBasisKind::C);
  Eigen::MatrixXd OB(m.B.rows(), 4);
  OB.col(0).setOnes();
  OB.rightCols(3) = m.B;
  m.D = null_basis(OB, NullBasisKind::D);
  m.M_F = build_MF(mesh, cell, K, m.R, m.C, cfg);
  m.M_N = build_MN(mesh, cell, K, m.A, m.D, cfg);
  return m;
}

std::vector<LocalElementMatrices> build_forms(const PolyMesh& mesh,
                                              const QuadratureWeights& quad,
                                              const MaterialSample& material,
                                              const StabilizationConfig& cfg,
                                              bool use_threads) {
  std::vector<LocalElementMatrices> forms(static_cast<std::size_t>(mesh.n_cells()));
  parallel_for(
      forms.size(),
      [&](std::size_t c) {
        forms[c] = build_cell_forms(mesh, static_cast<int>(c), material.K[c], quad, cfg);
      },
      use_threads);
  return forms;
}

std::pair<double, double> spectral_check(const Eigen::MatrixXd& M, const PolyMesh& mesh,
                                         int cell, SpectralKind kind, int samples,
                                         std::uint64_t seed) {
  const Cell& c = mesh.cells[static_cast<std::size_t>(cell)];
  double lo = 0.0;
  double hi = 0.0;

  if (kind == SpectralKind::F) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(M);
    lo = eig.eigenvalues().minCoeff() / c.volume;
    hi = eig.eigenvalues().maxCoeff() / c.volume;
    if (!(lo > 1e-12 * std::abs(hi)) || !std::isfinite(hi)) {
      throw NonPositive("face scalar product is not positive definite");
    }
    return {lo, hi};
  }

  // Nodal kind: Rayleigh quotient against |P| sum_e (grad^h v)_e^2 sampled
  // over random v orthogonal to constants. The kernel condition (second
  // eigenvalue positive) is checked directly.
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(M);
  const auto n = M.rows();
  if (n >= 2 && !(eig.eigenvalues()(1) > 1e-12 * std::abs(eig.eigenvalues()(n - 1)))) {
    throw NonPositive("nodal scalar product has a kernel beyond the constants");
  }

  std::mt19937_64 rng(seed);
  bool first = true;
  for (int s = 0; s < samples; ++s) {
    Eigen::VectorXd v(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      v[i] = symmetric_uniform(rng);
    }
    v.array() -= v.mean();
    double denom = 0.0;
    for (int e : c.edge_ids) {
      const Edge& edge = mesh.edges[static_cast<std::size_t>(e)];
      const double dv = (v[mesh.local_vertex(cell, edge.v2)] -
                         v[mesh.local_vertex(cell, edge.v1)]) /
                        edge.length;
      denom += dv * dv;
    }
    denom *= c.volume;
    if (denom <= 0.0) {
      continue;
    }
    const double quotient = v.dot(M * v) / denom;
    lo = first ? quotient : std::min(lo, quotient);
    hi = first ? quotient : std::max(hi, quotient);
    first = false;
  }
  if (first || !(lo > 0.0) || !std::isfinite(hi)) {
    throw NonPositive("nodal scaling constants are not positive and finite");
  }
  return {lo, hi};
}

}  // namespace polymfd
