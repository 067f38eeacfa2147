// Copyright (c) The polymfd Authors.
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cstdlib>

#include "polymfd/generate.hpp"
#include "polymfd/interp.hpp"
#include "polymfd/parallel.hpp"
#include "polymfd/post.hpp"
#include "test_helpers.hpp"

using namespace polymfd;

// The OpenMP kernels must reproduce the serial reference bit for bit: every
// parallel loop writes disjoint slots and reductions stay index-ordered.
TEST_CASE("parallel kernels match the serial reference exactly") {
  const PolyMesh mesh = generate_mesh(MeshKind::PerturbedHex, 3, 0.2, 1);
  const ProblemSpec spec = make_problem("trig", named_tensor("anisotropic"));

  SUBCASE("interpolation") {
    const CellField serial = interp_cell(spec.exact->u, mesh, false);
    const CellField parallel = interp_cell(spec.exact->u, mesh, true);
    CHECK((serial.data() - parallel.data()).cwiseAbs().maxCoeff() == 0.0);
    const FaceField fs = interp_face(spec.exact->flux, mesh, false);
    const FaceField fp = interp_face(spec.exact->flux, mesh, true);
    CHECK((fs.data() - fp.data()).cwiseAbs().maxCoeff() == 0.0);
  }

  SUBCASE("quadrature and forms") {
    const QuadratureWeights qs = build_quadrature(mesh, CellWeightMode::Moment, false);
    const QuadratureWeights qp = build_quadrature(mesh, CellWeightMode::Moment, true);
    for (std::size_t f = 0; f < qs.face.size(); ++f) {
      CHECK((qs.face[f] - qp.face[f]).cwiseAbs().maxCoeff() == 0.0);
    }
    for (std::size_t c = 0; c < qs.cell.size(); ++c) {
      CHECK((qs.cell[c] - qp.cell[c]).cwiseAbs().maxCoeff() == 0.0);
    }
    const MaterialSample mat = sample_material(mesh, spec);
    const auto serial = build_forms(mesh, qs, mat, {}, false);
    const auto parallel = build_forms(mesh, qs, mat, {}, true);
    for (std::size_t c = 0; c < serial.size(); ++c) {
      CHECK((serial[c].M_F - parallel[c].M_F).cwiseAbs().maxCoeff() == 0.0);
      CHECK((serial[c].M_N - parallel[c].M_N).cwiseAbs().maxCoeff() == 0.0);
      CHECK((serial[c].C - parallel[c].C).cwiseAbs().maxCoeff() == 0.0);
      CHECK((serial[c].D - parallel[c].D).cwiseAbs().maxCoeff() == 0.0);
    }
  }

  SUBCASE("error norms") {
    const QuadratureWeights quad = build_quadrature(mesh);
    const MaterialSample mat = sample_material(mesh, spec);
    const auto forms = build_forms(mesh, quad, mat);
    const NodeField u = interp_node(spec.exact->u, mesh);
    const ErrorReport serial = nodal_errors(mesh, forms, quad, mat, spec, u, false);
    const ErrorReport parallel = nodal_errors(mesh, forms, quad, mat, spec, u, true);
    CHECK(serial.nodal == parallel.nodal);
    CHECK(serial.grad == parallel.grad);
    CHECK(serial.post == parallel.post);
  }

  SUBCASE("validation") {
    const ValidationReport serial = validate_mesh(mesh, false);
    const ValidationReport parallel = validate_mesh(mesh, true);
    CHECK(serial.ok() == parallel.ok());
    CHECK(serial.max_closedness == parallel.max_closedness);
    CHECK(serial.max_second_moment == parallel.max_second_moment);
  }
}

TEST_CASE("exceptions propagate out of parallel loops") {
  CHECK_THROWS_AS(
      parallel_for(64, [](std::size_t i) {
        if (i == 13) {
          throw InvalidParam("boom");
        }
      }),
      InvalidParam);
}

TEST_CASE("POLYMFD_THREADS caps the thread count") {
  setenv("POLYMFD_THREADS", "1", 1);
  CHECK(max_threads() == 1);
  unsetenv("POLYMFD_THREADS");
  CHECK(max_threads() >= 1);
}
