// Copyright (c) The polymfd Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "polymfd/mesh.hpp"
#include "polymfd/problem.hpp"
#include "polymfd/quadrature.hpp"

namespace polymfd {

/// Piecewise-constant data samples: one diffusion tensor, advection vector
/// and source value per cell.
struct MaterialSample {
  std::vector<Mat3> K;
  std::vector<Vec3> beta;
  std::vector<double> g;
};

enum class SampleMode { Centroid, SubtetAverage };

/// Samples the problem data cell by cell. Centroid evaluation is exact for
/// per-cell affine data; SubtetAverage integrates with the cell quadrature
/// for rough coefficients. Throws SingularKTilde when a sampled tensor is
/// not symmetric positive definite.
MaterialSample sample_material(const PolyMesh& mesh, const ProblemSpec& spec,
                               SampleMode mode = SampleMode::Centroid,
                               bool use_threads = true);

/// Scaling knobs for the stabilization blocks C U_F C^T and D U_N D^T. The
/// defaults give the identity-based member of the scalar-product family.
struct StabilizationConfig {
  double u_scale_F = 1.0;
  double u_scale_N = 1.0;
};

/// Elemental matrices of one cell. Face rows follow the cell's face_refs
/// order, vertex rows/columns its vertex_ids order.
///
/// Invariants (up to roundoff): M_F N = R, M_N B = A, N^T C = 0,
/// [1|B]^T D = 0, M_F symmetric positive definite, M_N symmetric positive
/// semidefinite with kernel spanned by the constant vector.
struct LocalElementMatrices {
  Eigen::MatrixXd N;    // f_P x 3, rows (n_f^P)^T K
  Eigen::MatrixXd R;    // f_P x 3, rows |f| (x_f - x_P)^T
  Eigen::MatrixXd W;    // f_P x V_P, facial quadrature weights
  Eigen::MatrixXd A;    // V_P x 3, A = W^T N
  Eigen::MatrixXd B;    // V_P x 3, rows (V_i - x_P)^T
  Eigen::MatrixXd C;    // f_P x (f_P - 3), orthonormal null basis of N^T
  Eigen::MatrixXd D;    // V_P x (V_P - 4), orthonormal complement of [1|B]
  Eigen::MatrixXd M_F;  // f_P x f_P scalar product on face values
  Eigen::MatrixXd M_N;  // V_P x V_P scalar product on node values
};

std::pair<Eigen::MatrixXd, Eigen::MatrixXd> build_NR(const PolyMesh& mesh, int cell,
                                                     const Mat3& K);
Eigen::MatrixXd build_W(const PolyMesh& mesh, int cell, const QuadratureWeights& quad);
std::pair<Eigen::MatrixXd, Eigen::MatrixXd> build_AB(const PolyMesh& mesh, int cell,
                                                     const Eigen::MatrixXd& N,
                                                     const Eigen::MatrixXd& W);

enum class NullBasisKind { C, D };

/// Orthonormal basis of the orthogonal complement of the column span:
/// pass N for kind C, [1|B] for kind D. Deterministic (SVD with a fixed
/// singular-value cutoff of 1e-10 sigma_max). Throws RankDeficiency when the
/// input loses full column rank.
Eigen::MatrixXd null_basis(const Eigen::MatrixXd& M, NullBasisKind kind);

/// M_F = (1/|P|) R K^-1 R^T + u_scale_F gamma_F C C^T with
/// gamma_F = trace(consistency) / f_P; analogously for M_N with A and D.
Eigen::MatrixXd build_MF(const PolyMesh& mesh, int cell, const Mat3& K,
                         const Eigen::MatrixXd& R, const Eigen::MatrixXd& C,
                         const StabilizationConfig& cfg = {});
Eigen::MatrixXd build_MN(const PolyMesh& mesh, int cell, const Mat3& K,
                         const Eigen::MatrixXd& A, const Eigen::MatrixXd& D,
                         const StabilizationConfig& cfg = {});

/// Full elemental construction for one cell.
LocalElementMatrices build_cell_forms(const PolyMesh& mesh, int cell, const Mat3& K,
                                      const QuadratureWeights& quad,
                                      const StabilizationConfig& cfg = {});

/// Elemental construction over the whole mesh (parallel over cells).
std::vector<LocalElementMatrices> build_forms(const PolyMesh& mesh,
                                              const QuadratureWeights& quad,
                                              const MaterialSample& material,
                                              const StabilizationConfig& cfg = {},
                                              bool use_threads = true);

enum class SpectralKind { F, N };

/// Observed scaling constants of a scalar product: extremes of the Rayleigh
/// quotient against |P| sum_f (G_f^P)^2 (kind F, over the eigenbasis) or
/// |P| sum_e (grad^h v)_e^2 (kind N, over seeded random v orthogonal to
/// constants). Throws NonPositive when the lower constant is not positive.
std::pair<double, double> spectral_check(const Eigen::MatrixXd& M, const PolyMesh& mesh,
                                         int cell, SpectralKind kind, int samples = 200,
                                         std::uint64_t seed = 7);

}  // namespace polymfd
