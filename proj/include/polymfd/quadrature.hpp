// Copyright (c) The polymfd Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Dense>
#include <vector>

#include "polymfd/mesh.hpp"

namespace polymfd {

enum class CellWeightMode { Uniform, Moment };

/// Vertex quadrature weights.
///
/// face[f] holds one weight per vertex of the face loop; the rule
/// sum_l w_l q(V_l) reproduces int_f q exactly for q in P^1(f), with all
/// weights nonnegative. cell[c] holds one weight per cell vertex (in
/// vertex_ids order) with sum |P|; in Moment mode the cell rule is also
/// exact on linears.
struct QuadratureWeights {
  std::vector<Eigen::VectorXd> face;
  std::vector<Eigen::VectorXd> cell;
};

/// Throws WeightSolveFailure when no nonnegative linear-exact rule is found.
QuadratureWeights build_quadrature(const PolyMesh& mesh,
                                   CellWeightMode mode = CellWeightMode::Uniform,
                                   bool use_threads = true);

}  // namespace polymfd
