// Copyright (c) The polymfd Authors.
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>
#include <random>

#include "polymfd/assemble.hpp"
#include "polymfd/generate.hpp"
#include "polymfd/interp.hpp"
#include "polymfd/solve.hpp"
#include "oracles.hpp"
#include "test_helpers.hpp"

using namespace polymfd;

namespace {

struct Setup {
  PolyMesh mesh;
  QuadratureWeights quad;
  MaterialSample material;
  std::vector<LocalElementMatrices> forms;
  ProblemSpec spec;
};

Setup make_setup(MeshKind kind, int n, double delta, const ProblemSpec& spec,
                 const StabilizationConfig& cfg = {}) {
  Setup s{generate_mesh(kind, n, delta, 1), {}, {}, {}, spec};
  s.quad = build_quadrature(s.mesh);
  s.material = sample_material(s.mesh, spec);
  s.forms = build_forms(s.mesh, s.quad, s.material, cfg);
  return s;
}

Eigen::MatrixXd full_nodal_stiffness(const Setup& s) {
  Eigen::MatrixXd S = Eigen::MatrixXd::Zero(s.mesh.n_vertices(), s.mesh.n_vertices());
  for (int c = 0; c < s.mesh.n_cells(); ++c) {
    const Cell& cell = s.mesh.cells[static_cast<std::size_t>(c)];
    const Eigen::MatrixXd& M = s.forms[static_cast<std::size_t>(c)].M_N;
    for (std::size_t a = 0; a < cell.vertex_ids.size(); ++a) {
      for (std::size_t b = 0; b < cell.vertex_ids.size(); ++b) {
        S(cell.vertex_ids[a], cell.vertex_ids[b]) +=
            M(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b));
      }
    }
  }
  return S;
}

Mat3 full_spd() {
  Mat3 K;
  K << 2.0, 0.5, 0.0, 0.5, 1.0, 0.2, 0.0, 0.2, 3.0;
  return K;
}

}  // namespace

TEST_CASE("nodal stiffness equals the P1 FEM matrix on tetrahedra") {
  const Setup s = make_setup(MeshKind::Tet, 2, 0.0, make_problem("trig", full_spd()));
  const Eigen::MatrixXd mfd = full_nodal_stiffness(s);
  const Eigen::MatrixXd fem = testing::p1_stiffness_global(s.mesh, full_spd());
  CHECK((mfd - fem).cwiseAbs().maxCoeff() <= 1e-12);

  // constants lie in the kernel of the unrestricted operator
  const Eigen::VectorXd rowsums = mfd.rowwise().sum();
  for (Eigen::Index i = 0; i < rowsums.size(); ++i) {
    CHECK(std::abs(rowsums[i]) <= 1e-11 * mfd.row(i).cwiseAbs().maxCoeff());
  }
}

TEST_CASE("nodal patch test on a perturbed mesh") {
  for (const std::string tensor : {"identity", "diag10"}) {
    for (double scale : {0.5, 1.0, 4.0}) {
      const ProblemSpec spec = make_problem("linear", named_tensor(tensor));
      const Setup s =
          make_setup(MeshKind::PerturbedHex, 3, 0.2, spec, StabilizationConfig{scale, scale});
      const NodalSystem system = assemble_nodal(s.mesh, s.forms, s.quad, s.material, s.spec);
      CHECK(system.sys.spd);
      const NodalSolution sol = solve_nodal(s.mesh, system);
      const NodeField target = interp_node(spec.exact->u, s.mesh);
      CHECK((sol.u.data() - target.data()).cwiseAbs().maxCoeff() <= 1e-10);
    }
  }
}

TEST_CASE("nodal solver edge cases") {
  SUBCASE("zero data gives the zero solution") {
    ProblemSpec spec;
    spec.K = [](const Vec3&) { return Mat3::Identity(); };
    const Setup s = make_setup(MeshKind::Tet, 2, 0.0, spec);
    const NodalSolution sol =
        solve_nodal(s.mesh, assemble_nodal(s.mesh, s.forms, s.quad, s.material, s.spec));
    CHECK(sol.u.data().cwiseAbs().maxCoeff() == 0.0);
  }
  SUBCASE("meshes without interior vertices are rejected") {
    ProblemSpec spec;
    spec.K = [](const Vec3&) { return Mat3::Identity(); };
    const Setup s = make_setup(MeshKind::Tet, 1, 0.0, spec);
    CHECK_THROWS_AS(assemble_nodal(s.mesh, s.forms, s.quad, s.material, s.spec), EmptyInterior);
  }
}

TEST_CASE("mixed patch test recovers the linear solution") {
  for (const std::string tensor : {"identity", "diag10"}) {
    for (double scale : {0.5, 1.0, 4.0}) {
      const ProblemSpec spec = make_problem("linear", named_tensor(tensor));
      const Setup s =
          make_setup(MeshKind::PerturbedHex, 3, 0.2, spec, StabilizationConfig{scale, scale});
      const MixedSystem system = assemble_mixed(s.mesh, s.forms, s.spec);
      CHECK(system.sys.symmetric);
      const MixedSolution sol = solve_mixed(system);

      const FaceField flux_target = interp_face(spec.exact->flux, s.mesh);
      CHECK((sol.flux.data() - flux_target.data()).cwiseAbs().maxCoeff() <= 1e-9);

      const CellField u_avg = interp_cell(spec.exact->u, s.mesh);
      double volume = 0.0;
      double mean = 0.0;
      for (int c = 0; c < s.mesh.n_cells(); ++c) {
        volume += s.mesh.cells[static_cast<std::size_t>(c)].volume;
        mean += s.mesh.cells[static_cast<std::size_t>(c)].volume * u_avg[c];
      }
      mean /= volume;
      for (int c = 0; c < s.mesh.n_cells(); ++c) {
        CHECK(std::abs(sol.pressure[c] - (u_avg[c] - mean)) <= 1e-9);
      }

      double weighted = 0.0;
      for (int c = 0; c < s.mesh.n_cells(); ++c) {
        weighted += s.mesh.cells[static_cast<std::size_t>(c)].volume * sol.pressure[c];
      }
      CHECK(std::abs(weighted) <= 1e-10 * volume);
      CHECK(std::abs(sol.pin) <= 1e-10);
      // the acting multiplier carries the (nonzero) mean of the datum
      CHECK(std::abs(sol.multiplier - mean) <= 1e-9);
    }
  }
}

TEST_CASE("mixed solver properties") {
  SUBCASE("mean-zero pressure for a zero-mean source") {
    ProblemSpec spec;
    spec.K = [](const Vec3&) { return Mat3::Identity(); };
    spec.g = [](const Vec3& x) { return x[0] - 0.5; };
    const Setup s = make_setup(MeshKind::Hex, 2, 0.0, spec);
    const MixedSolution sol = solve_mixed(assemble_mixed(s.mesh, s.forms, s.spec));
    double weighted = 0.0;
    for (int c = 0; c < s.mesh.n_cells(); ++c) {
      weighted += s.mesh.cells[static_cast<std::size_t>(c)].volume * sol.pressure[c];
    }
    CHECK(std::abs(weighted) <= 1e-10);
    // the flux equation holds cell by cell: div^h F = -Pi_P g
    const CellField divF = discrete_div(sol.flux, s.mesh);
    const CellField g_avg = interp_cell(spec.g, s.mesh);
    for (int c = 0; c < s.mesh.n_cells(); ++c) {
      CHECK(divF[c] == doctest::Approx(-g_avg[c]).epsilon(1e-10));
    }
  }
  SUBCASE("zero data gives the zero solution") {
    ProblemSpec spec;
    spec.K = [](const Vec3&) { return Mat3::Identity(); };
    const Setup s = make_setup(MeshKind::Hex, 2, 0.0, spec);
    const MixedSolution sol = solve_mixed(assemble_mixed(s.mesh, s.forms, s.spec));
    CHECK(sol.flux.data().cwiseAbs().maxCoeff() <= 1e-14);
    CHECK(sol.pressure.data().cwiseAbs().maxCoeff() <= 1e-14);
  }
  SUBCASE("saddle-point inertia on a small mesh") {
    ProblemSpec spec;
    spec.K = [](const Vec3&) { return Mat3::Identity(); };
    const Setup s = make_setup(MeshKind::Hex, 2, 0.0, spec);
    const MixedSystem system = assemble_mixed(s.mesh, s.forms, s.spec);
    const Inertia inertia = dense_inertia(system.sys);
    CHECK(inertia.zero == 0);
    CHECK(inertia.negative == s.mesh.n_cells() + 1);
    CHECK(inertia.positive == s.mesh.n_faces() + 1);
  }
}

TEST_CASE("advective terms") {
  const Vec3 beta(1.0, 2.0, 0.0);
  SUBCASE("elemental advective value on a linear function") {
    ProblemSpec spec = make_problem("linear", Mat3::Identity(), beta);
    const Setup s = make_setup(MeshKind::Hex, 2, 0.0, spec);
    const NodeField u = interp_node([](const Vec3& x) { return x[0] + x[1]; }, s.mesh);
    for (int c = 0; c < s.mesh.n_cells(); ++c) {
      const Cell& cell = s.mesh.cells[static_cast<std::size_t>(c)];
      const Eigen::VectorXd r = s.forms[static_cast<std::size_t>(c)].A *
                                s.material.K[static_cast<std::size_t>(c)].llt().solve(beta) /
                                cell.volume;
      const double value = r.dot(local_node_values(s.mesh, c, u));
      CHECK(value == doctest::Approx(3.0).epsilon(1e-12));  // beta . grad(x + y)
    }
  }
  SUBCASE("vanishing advection reduces to pure diffusion") {
    const ProblemSpec diffusion = make_problem("trig");
    const Setup s = make_setup(MeshKind::Hex, 2, 0.0, diffusion);
    const NodalSystem a =
        assemble_advection(s.mesh, s.forms, s.quad, s.material, s.spec, {true, 1.0});
    const NodalSystem n = assemble_nodal(s.mesh, s.forms, s.quad, s.material, s.spec);
    const Eigen::MatrixXd diff = Eigen::MatrixXd(a.sys.A) - Eigen::MatrixXd(n.sys.A);
    CHECK(diff.cwiseAbs().maxCoeff() == 0.0);
    CHECK((a.sys.rhs - n.sys.rhs).cwiseAbs().maxCoeff() == 0.0);
  }
  SUBCASE("streamline-diffusion local consistency") {
    ProblemSpec spec = make_problem("linear", Mat3::Identity(), beta);
    const Setup s = make_setup(MeshKind::Hex, 2, 0.0, spec);
    const std::vector<std::pair<ScalarFn, Vec3>> linears = {
        {[](const Vec3& x) { return x[0]; }, Vec3(1, 0, 0)},
        {[](const Vec3& x) { return x[0] + x[1]; }, Vec3(1, 1, 0)},
        {[](const Vec3& x) { return 1.0 - x[1] + 3.0 * x[2]; }, Vec3(0, -1, 3)},
    };
    std::mt19937_64 rng(11);
    for (const auto& [p, grad_p] : linears) {
      const NodeField ph = interp_node(p, s.mesh);
      for (int c = 0; c < s.mesh.n_cells(); ++c) {
        const Cell& cell = s.mesh.cells[static_cast<std::size_t>(c)];
        Eigen::VectorXd v(static_cast<Eigen::Index>(cell.vertex_ids.size()));
        for (Eigen::Index i = 0; i < v.size(); ++i) {
          v[i] = 2.0 * (static_cast<double>(rng() >> 11) * 0x1p-53) - 1.0;
        }
        const Eigen::VectorXd r = s.forms[static_cast<std::size_t>(c)].A *
                                  s.material.K[static_cast<std::size_t>(c)].llt().solve(beta) /
                                  cell.volume;
        const double lhs =
            cell.volume * r.dot(local_node_values(s.mesh, c, ph)) * r.dot(v);
        // Independent route: (beta . grad p) sum_f (beta . n_f^P) sum_l v w_l
        double rhs = 0.0;
        for (const FaceRef& fr : cell.face_refs) {
          const Face& face = s.mesh.faces[static_cast<std::size_t>(fr.face)];
          const auto& w = s.quad.face[static_cast<std::size_t>(fr.face)];
          double face_sum = 0.0;
          for (std::size_t l = 0; l < face.vertex_loop.size(); ++l) {
            face_sum += w[static_cast<Eigen::Index>(l)] *
                        v[s.mesh.local_vertex(c, face.vertex_loop[l])];
          }
          rhs += beta.dot(fr.sign * face.normal) * face_sum;
        }
        rhs *= beta.dot(grad_p);
        CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
      }
    }
  }
  SUBCASE("advection-diffusion reproduces the linear patch solution") {
    ProblemSpec spec = make_problem("linear", Mat3::Identity(), beta);
    const Setup s = make_setup(MeshKind::PerturbedHex, 3, 0.2, spec);
    for (bool sd : {false, true}) {
      const NodalSystem system =
          assemble_advection(s.mesh, s.forms, s.quad, s.material, s.spec, {sd, 1.0});
      CHECK_FALSE(system.sys.spd);
      const NodalSolution sol = solve_nodal(s.mesh, system);
      const NodeField target = interp_node(spec.exact->u, s.mesh);
      CHECK((sol.u.data() - target.data()).cwiseAbs().maxCoeff() <= 1e-9);
    }
  }
}

TEST_CASE("solve_system") {
  SUBCASE("single unknown") {
    LinearSystem sys;
    sys.A.resize(1, 1);
    sys.A.insert(0, 0) = 2.0;
    sys.rhs = Eigen::VectorXd::Constant(1, 4.0);
    sys.symmetric = sys.spd = true;
    CHECK(solve_system(sys)[0] == doctest::Approx(2.0).epsilon(1e-15));
  }
  SUBCASE("singular matrix") {
    LinearSystem sys;
    sys.A.resize(3, 3);
    sys.rhs = Eigen::VectorXd::Ones(3);
    CHECK_THROWS_AS(solve_system(sys), SingularFactorization);
  }
  SUBCASE("conjugate gradients meets the residual target") {
    const ProblemSpec spec = make_problem("trig");
    const Setup s = make_setup(MeshKind::Tet, 4, 0.0, spec);
    const NodalSystem system = assemble_nodal(s.mesh, s.forms, s.quad, s.material, s.spec);
    SolverOptions opts;
    opts.type = SolverOptions::Type::CG;
    SolveInfo info;
    solve_system(system.sys, &info, opts);
    CHECK(info.method == "cg");
    CHECK(info.iterations > 0);
    CHECK(info.residual <= 1e-12);
  }
}

TEST_CASE("solutions are invariant under mesh relabeling") {
  const ProblemSpec spec = make_problem("trig");
  const PolyMesh mesh = generate_mesh(MeshKind::Hex, 2);

  // Reversal permutations of every entity class.
  const int nv = mesh.n_vertices();
  const int nf = mesh.n_faces();
  const int nc = mesh.n_cells();
  auto vperm = [nv](int v) { return nv - 1 - v; };
  auto fperm = [nf](int f) { return nf - 1 - f; };
  auto cperm = [nc](int c) { return nc - 1 - c; };

  std::vector<Vec3> verts(static_cast<std::size_t>(nv));
  for (int v = 0; v < nv; ++v) {
    verts[static_cast<std::size_t>(vperm(v))] = mesh.vertices[static_cast<std::size_t>(v)];
  }
  std::vector<std::vector<int>> loops(static_cast<std::size_t>(nf));
  for (int f = 0; f < nf; ++f) {
    std::vector<int> loop;
    for (int v : mesh.faces[static_cast<std::size_t>(f)].vertex_loop) {
      loop.push_back(vperm(v));
    }
    loops[static_cast<std::size_t>(fperm(f))] = std::move(loop);
  }
  std::vector<std::vector<int>> cells(static_cast<std::size_t>(nc));
  for (int c = 0; c < nc; ++c) {
    std::vector<int> refs;
    for (const FaceRef& fr : mesh.cells[static_cast<std::size_t>(c)].face_refs) {
      refs.push_back(fr.sign * (fperm(fr.face) + 1));
    }
    cells[static_cast<std::size_t>(cperm(c))] = std::move(refs);
  }
  const PolyMesh permuted = build_mesh(std::move(verts), loops, cells);
  REQUIRE(validate_mesh(permuted).ok());

  auto run = [&](const PolyMesh& m) {
    const QuadratureWeights quad = build_quadrature(m);
    const MaterialSample mat = sample_material(m, spec);
    const auto forms = build_forms(m, quad, mat);
    const NodalSolution nodal = solve_nodal(m, assemble_nodal(m, forms, quad, mat, spec));
    const MixedSolution mixed = solve_mixed(assemble_mixed(m, forms, spec));
    return std::pair{nodal, mixed};
  };
  const auto [nodal_a, mixed_a] = run(mesh);
  const auto [nodal_b, mixed_b] = run(permuted);

  const double u_scale = nodal_a.u.data().cwiseAbs().maxCoeff();
  for (int v = 0; v < nv; ++v) {
    CHECK(std::abs(nodal_a.u[v] - nodal_b.u[vperm(v)]) <= 1e-12 * u_scale);
  }
  const double f_scale = mixed_a.flux.data().cwiseAbs().maxCoeff();
  for (int f = 0; f < nf; ++f) {
    CHECK(std::abs(mixed_a.flux[f] - mixed_b.flux[fperm(f)]) <= 1e-11 * f_scale);
  }
  const double p_scale = std::max(1.0, mixed_a.pressure.data().cwiseAbs().maxCoeff());
  for (int c = 0; c < nc; ++c) {
    CHECK(std::abs(mixed_a.pressure[c] - mixed_b.pressure[cperm(c)]) <= 1e-12 * p_scale);
  }
}
