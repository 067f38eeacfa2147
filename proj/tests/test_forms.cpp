// Copyright (c) The polymfd Authors.
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>

#include "polymfd/forms.hpp"
#include "polymfd/generate.hpp"
#include "polymfd/interp.hpp"
#include "oracles.hpp"
#include "test_helpers.hpp"

using namespace polymfd;

namespace {

const Mat3 kIdentity = Mat3::Identity();

Mat3 diag10() {
  Mat3 K = Mat3::Identity();
  K(0, 0) = 10.0;
  return K;
}

Mat3 full_spd() {
  Mat3 K;
  K << 2.0, 0.5, 0.0, 0.5, 1.0, 0.2, 0.0, 0.2, 3.0;
  return K;
}

int find_cell_face(const PolyMesh& m, int cell, const Vec3& centroid) {
  const Cell& c = m.cells[static_cast<std::size_t>(cell)];
  for (std::size_t i = 0; i < c.face_refs.size(); ++i) {
    if ((m.faces[static_cast<std::size_t>(c.face_refs[i].face)].centroid - centroid).norm() <
        1e-12) {
      return static_cast<int>(i);
    }
  }
  return -1;
}

}  // namespace

TEST_CASE("build_NR rows") {
  const PolyMesh cube = testing::make_unit_cube();
  const int row = find_cell_face(cube, 0, Vec3(1.0, 0.5, 0.5));
  REQUIRE(row >= 0);
  SUBCASE("identity tensor") {
    const auto [N, R] = build_NR(cube, 0, kIdentity);
    CHECK((N.row(row) - Eigen::RowVector3d(1, 0, 0)).norm() < 1e-14);
    CHECK((R.row(row) - Eigen::RowVector3d(0.5, 0, 0)).norm() < 1e-14);
  }
  SUBCASE("row scaling by the tensor") {
    Mat3 K = Mat3::Identity();
    K(0, 0) = 2.0;
    const auto [N, R] = build_NR(cube, 0, K);
    CHECK((N.row(row) - Eigen::RowVector3d(2, 0, 0)).norm() < 1e-14);
  }
  SUBCASE("oblique face of the reference tetrahedron") {
    const PolyMesh tet = testing::make_reference_tet();
    const Mat3 K = full_spd();
    const auto [N, R] = build_NR(tet, 0, K);
    const int i = find_cell_face(tet, 0, Vec3(1.0 / 3, 1.0 / 3, 1.0 / 3));
    REQUIRE(i >= 0);
    const Face& f = tet.faces[static_cast<std::size_t>(tet.cells[0].face_refs[static_cast<std::size_t>(i)].face)];
    CHECK(f.area == doctest::Approx(std::sqrt(3.0) / 2).epsilon(1e-14));
    const Eigen::RowVector3d n_expected = Vec3(1, 1, 1).normalized().transpose() * K;
    CHECK((N.row(i) - n_expected).norm() < 1e-13);
    const Eigen::RowVector3d r_expected =
        f.area * (f.centroid - tet.cells[0].centroid).transpose();
    CHECK((R.row(i) - r_expected).norm() < 1e-13);
  }
}

TEST_CASE("build_W") {
  const QuadratureWeights qtet = build_quadrature(testing::make_reference_tet());
  const PolyMesh tet = testing::make_reference_tet();
  SUBCASE("tetrahedron columns are (1/3)(|f_1| ... 0 ... |f_4|)") {
    const Eigen::MatrixXd W = build_W(tet, 0, qtet);
    REQUIRE(W.rows() == 4);
    REQUIRE(W.cols() == 4);
    for (int j = 0; j < 4; ++j) {
      for (int f = 0; f < 4; ++f) {
        const int fi = tet.cells[0].face_refs[static_cast<std::size_t>(f)].face;
        const auto& loop = tet.faces[static_cast<std::size_t>(fi)].vertex_loop;
        const bool on_face =
            std::find(loop.begin(), loop.end(), tet.cells[0].vertex_ids[static_cast<std::size_t>(j)]) != loop.end();
        const double expected =
            on_face ? tet.faces[static_cast<std::size_t>(fi)].area / 3.0 : 0.0;
        CHECK(W(f, j) == doctest::Approx(expected).epsilon(1e-13));
      }
    }
  }
  SUBCASE("cube rows are four quarters") {
    const PolyMesh cube = testing::make_unit_cube();
    const Eigen::MatrixXd W = build_W(cube, 0, build_quadrature(cube));
    for (int f = 0; f < 6; ++f) {
      CHECK(W.row(f).sum() == doctest::Approx(1.0).epsilon(1e-13));
      int nonzero = 0;
      for (int j = 0; j < 8; ++j) {
        if (W(f, j) != 0.0) {
          CHECK(W(f, j) == doctest::Approx(0.25).epsilon(1e-13));
          ++nonzero;
        }
      }
      CHECK(nonzero == 4);
    }
  }
  SUBCASE("row sums equal face areas on polyhedra") {
    const PolyMesh m = generate_mesh(MeshKind::PerturbedHex, 2, 0.2, 2);
    const QuadratureWeights q = build_quadrature(m);
    for (int c = 0; c < m.n_cells(); ++c) {
      const Eigen::MatrixXd W = build_W(m, c, q);
      const Cell& cell = m.cells[static_cast<std::size_t>(c)];
      for (std::size_t f = 0; f < cell.face_refs.size(); ++f) {
        CHECK(W.row(static_cast<Eigen::Index>(f)).sum() ==
              doctest::Approx(m.faces[static_cast<std::size_t>(cell.face_refs[f].face)].area)
                  .epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("build_AB") {
  const PolyMesh cube = testing::make_unit_cube();
  const QuadratureWeights q = build_quadrature(cube);
  const Mat3 K = full_spd();
  const auto [N, R] = build_NR(cube, 0, K);
  const Eigen::MatrixXd W = build_W(cube, 0, q);
  const auto [A, B] = build_AB(cube, 0, N, W);

  SUBCASE("column sums of A vanish by closedness") {
    CHECK(A.colwise().sum().norm() < 1e-12 * A.norm());
  }
  SUBCASE("B rows are the centered vertex positions") {
    for (int i = 0; i < 8; ++i) {
      const Vec3 expected =
          cube.vertices[static_cast<std::size_t>(cube.cells[0].vertex_ids[static_cast<std::size_t>(i)])] -
          Vec3(0.5, 0.5, 0.5);
      CHECK((B.row(i).transpose() - expected).norm() < 1e-13);
      CHECK(B.row(i).cwiseAbs().maxCoeff() == doctest::Approx(0.5).epsilon(1e-13));
    }
  }
  SUBCASE("A^T B = |P| K on the reference tetrahedron") {
    const PolyMesh tet = testing::make_reference_tet();
    const QuadratureWeights qt = build_quadrature(tet);
    const auto [Nt, Rt] = build_NR(tet, 0, K);
    const auto [At, Bt] = build_AB(tet, 0, Nt, build_W(tet, 0, qt));
    const Mat3 product = At.transpose() * Bt;
    CHECK((product - tet.cells[0].volume * K).norm() < 1e-13 * K.norm());
  }
}

TEST_CASE("null_basis") {
  const PolyMesh cube = testing::make_unit_cube();
  const auto [N, R] = build_NR(cube, 0, kIdentity);
  SUBCASE("C of the cube") {
    const Eigen::MatrixXd C = null_basis(N, NullBasisKind::C);
    REQUIRE(C.rows() == 6);
    REQUIRE(C.cols() == 3);
    CHECK((N.transpose() * C).norm() <= 1e-13);
    CHECK((C.transpose() * C - Eigen::MatrixXd::Identity(3, 3)).norm() <= 1e-13);
  }
  SUBCASE("D of a tetrahedron is empty") {
    const PolyMesh tet = testing::make_reference_tet();
    const QuadratureWeights qt = build_quadrature(tet);
    const auto [Nt, Rt] = build_NR(tet, 0, kIdentity);
    const auto [At, Bt] = build_AB(tet, 0, Nt, build_W(tet, 0, qt));
    Eigen::MatrixXd OB(4, 4);
    OB.col(0).setOnes();
    OB.rightCols(3) = Bt;
    const Eigen::MatrixXd D = null_basis(OB, NullBasisKind::D);
    CHECK(D.rows() == 4);
    CHECK(D.cols() == 0);
  }
  SUBCASE("rank deficiency is detected") {
    Eigen::MatrixXd degenerate = N;
    degenerate.col(2).setZero();
    CHECK_THROWS_AS(null_basis(degenerate, NullBasisKind::C), RankDeficiency);
  }
  SUBCASE("deterministic output") {
    const Eigen::MatrixXd C1 = null_basis(N, NullBasisKind::C);
    const Eigen::MatrixXd C2 = null_basis(N, NullBasisKind::C);
    CHECK((C1 - C2).norm() == 0.0);
  }
}

TEST_CASE("scalar product construction") {
  const PolyMesh cube = testing::make_unit_cube();
  const QuadratureWeights q = build_quadrature(cube);

  SUBCASE("exactness of M_F on the cube (identity tensor)") {
    const LocalElementMatrices m = build_cell_forms(cube, 0, kIdentity, q);
    const Eigen::VectorXd g = m.N.col(0);  // interpolant of K xhat_1
    CHECK(g.dot(m.M_F * g) == doctest::Approx(1.0).epsilon(1e-12));
  }
  SUBCASE("M_N on the cube with diag(2,1,1)") {
    Mat3 K = Mat3::Identity();
    K(0, 0) = 2.0;
    const LocalElementMatrices m = build_cell_forms(cube, 0, K, q);
    const Mat3 product = m.B.transpose() * m.M_N * m.B;
    CHECK((product - cube.cells[0].volume * K).norm() < 1e-12);
  }
  SUBCASE("M_N of a tetrahedron is the P1 stiffness matrix") {
    const PolyMesh tet = testing::make_reference_tet();
    const QuadratureWeights qt = build_quadrature(tet);
    for (const Mat3& K : {kIdentity, diag10(), full_spd()}) {
      const LocalElementMatrices m = build_cell_forms(tet, 0, K, qt);
      CHECK(m.D.cols() == 0);
      std::array<Vec3, 4> v;
      for (int i = 0; i < 4; ++i) {
        v[static_cast<std::size_t>(i)] = tet.vertices[static_cast<std::size_t>(
            tet.cells[0].vertex_ids[static_cast<std::size_t>(i)])];
      }
      const Eigen::MatrixXd oracle = testing::p1_stiffness_tet(v, K);
      CHECK((m.M_N - oracle).cwiseAbs().maxCoeff() < 1e-12);
    }
  }
  SUBCASE("origin-vertex diagonal of the tetrahedral M_N is 1/2") {
    // integral of |grad phi_1|^2 = 3 * (1/6)
    const PolyMesh tet = testing::make_reference_tet();
    const LocalElementMatrices m = build_cell_forms(tet, 0, kIdentity, build_quadrature(tet));
    const int local_origin = tet.local_vertex(0, 0);
    CHECK(m.M_N(local_origin, local_origin) == doctest::Approx(0.5).epsilon(1e-12));
  }

  SUBCASE("consistency, exactness and kernel across the family sweep") {
    for (auto [kind, n, delta] : {std::tuple{MeshKind::Tet, 2, 0.0},
                                  std::tuple{MeshKind::Hex, 3, 0.0},
                                  std::tuple{MeshKind::PerturbedHex, 3, 0.2}}) {
      const PolyMesh mesh = generate_mesh(kind, n, delta, 1);
      const QuadratureWeights quad = build_quadrature(mesh);
      for (const Mat3& K : {kIdentity, diag10(), full_spd()}) {
        for (double scale : {0.5, 1.0, 4.0}) {
          const StabilizationConfig cfg{scale, scale};
          for (int c = 0; c < mesh.n_cells(); ++c) {
            const LocalElementMatrices m = build_cell_forms(mesh, c, K, quad, cfg);
            const double vol = mesh.cells[static_cast<std::size_t>(c)].volume;

            CHECK((m.M_F * m.N - m.R).norm() <= 1e-12 * m.R.norm());
            CHECK((m.M_N * m.B - m.A).norm() <= 1e-12 * m.A.norm());
            CHECK((m.N.transpose() * m.C).norm() <= 1e-12 * m.N.norm());
            CHECK((m.M_F - m.M_F.transpose()).norm() <= 1e-13 * m.M_F.norm());
            CHECK((m.M_N - m.M_N.transpose()).norm() <= 1e-13 * m.M_N.norm());

            // exactness on interpolated constants / linears
            const Mat3 mixed = m.N.transpose() * m.M_F * m.N;
            const Mat3 nodal = m.B.transpose() * m.M_N * m.B;
            CHECK((mixed - vol * K).norm() <= 1e-11 * vol * K.norm());
            CHECK((nodal - vol * K).norm() <= 1e-11 * vol * K.norm());

            // kernel of M_N is exactly the constants
            const Eigen::VectorXd ones = Eigen::VectorXd::Ones(m.M_N.rows());
            CHECK((m.M_N * ones).norm() <= 1e-12 * m.M_N.norm());
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(m.M_N);
            CHECK(eig.eigenvalues()(1) > 0.0);
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eigF(m.M_F);
            CHECK(eigF.eigenvalues()(0) > 0.0);
          }
        }
      }
    }
  }
}

TEST_CASE("spectral_check") {
  const PolyMesh cube = testing::make_unit_cube();
  const QuadratureWeights q = build_quadrature(cube);
  SUBCASE("cube face product brackets") {
    const LocalElementMatrices m = build_cell_forms(cube, 0, kIdentity, q);
    const auto [lo, hi] = spectral_check(m.M_F, cube, 0, SpectralKind::F);
    CHECK(lo > 0.0);
    CHECK(lo == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(hi == doctest::Approx(0.5).epsilon(1e-12));
  }
  SUBCASE("vanishing stabilization is flagged") {
    const StabilizationConfig cfg{0.0, 0.0};
    const LocalElementMatrices m = build_cell_forms(cube, 0, kIdentity, q, cfg);
    CHECK_THROWS_AS(spectral_check(m.M_F, cube, 0, SpectralKind::F), NonPositive);
    CHECK_THROWS_AS(spectral_check(m.M_N, cube, 0, SpectralKind::N), NonPositive);
  }
  SUBCASE("nodal constants on the reference tetrahedron") {
    const PolyMesh tet = testing::make_reference_tet();
    const LocalElementMatrices m = build_cell_forms(tet, 0, kIdentity, build_quadrature(tet));
    const auto [lo, hi] = spectral_check(m.M_N, tet, 0, SpectralKind::N);
    CHECK(lo > 0.0);
    CHECK(hi >= lo);
    CHECK(std::isfinite(hi));
    // sanity band for the face product of the tetrahedron
    const auto [flo, fhi] = spectral_check(m.M_F, tet, 0, SpectralKind::F);
    CHECK(flo > 1e-3);
    CHECK(fhi < 1e3);
  }
  SUBCASE("conditioning regression over a perturbed mesh") {
    const PolyMesh m = generate_mesh(MeshKind::PerturbedHex, 4, 0.2, 1);
    const QuadratureWeights quad = build_quadrature(m);
    const MaterialSample mat = sample_material(m, make_problem("trig"));
    const auto forms = build_forms(m, quad, mat);
    double worst_f = 0.0;
    double worst_n = 0.0;
    for (int c = 0; c < m.n_cells(); ++c) {
      const auto [flo, fhi] = spectral_check(forms[static_cast<std::size_t>(c)].M_F, m, c,
                                             SpectralKind::F);
      const auto [nlo, nhi] = spectral_check(forms[static_cast<std::size_t>(c)].M_N, m, c,
                                             SpectralKind::N);
      worst_f = std::max(worst_f, fhi / flo);
      worst_n = std::max(worst_n, nhi / nlo);
    }
    // Regression baselines frozen from the first oracle run
    // (observed 13.26 and 7.24; 10% margin).
    CHECK(worst_f < 14.6);
    CHECK(worst_n < 8.0);
  }
}

TEST_CASE("sample_material rejects invalid tensors") {
  const PolyMesh cube = testing::make_unit_cube();
  ProblemSpec bad;
  bad.K = [](const Vec3&) {
    Mat3 K = Mat3::Identity();
    K(0, 0) = -1.0;  // indefinite
    return K;
  };
  CHECK_THROWS_AS(sample_material(cube, bad), SingularKTilde);

  ProblemSpec asym;
  asym.K = [](const Vec3&) {
    Mat3 K = Mat3::Identity();
    K(0, 1) = 0.3;  // not symmetric
    return K;
  };
  CHECK_THROWS_AS(sample_material(cube, asym), SingularKTilde);
}
