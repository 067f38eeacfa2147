// Copyright (c) The polymfd Authors.
// SPDX-License-Identifier: Apache-2.0

#include "polymfd/generate.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <random>

namespace polymfd {

MeshKind parse_mesh_kind(const std::string& name) {
  if (name == "tet") return MeshKind::Tet;
  if (name == "hex") return MeshKind::Hex;
  if (name == "perturbed-hex") return MeshKind::PerturbedHex;
  throw InvalidParam("unknown mesh kind '" + name + "' (expected tet|hex|perturbed-hex)");
}

std::string to_string(MeshKind kind) {
  switch (kind) {
    case MeshKind::Tet: return "tet";
    case MeshKind::Hex: return "hex";
    case MeshKind::PerturbedHex: return "perturbed-hex";
  }
  return "?";
}

namespace {

// Platform-stable uniform in [-1, 1): the distribution classes in <random>
// are implementation-defined, the raw engine output is not.
double symmetric_uniform(std::mt19937_64& rng) {
  const double u = static_cast<double>(rng() >> 11) * 0x1p-53;  // [0,1)
  return 2.0 * u - 1.0;
}

std::vector<Vec3> grid_vertices(int n, double delta, std::uint64_t seed) {
  const int m = n + 1;
  std::vector<Vec3> verts(static_cast<std::size_t>(m) * m * m);
  auto vid = [m](int i, int j, int k) {
    return static_cast<std::size_t>((k * m + j) * m + i);
  };
  for (int k = 0; k < m; ++k) {
    for (int j = 0; j < m; ++j) {
      for (int i = 0; i < m; ++i) {
        verts[vid(i, j, k)] =
            Vec3(static_cast<double>(i) / n, static_cast<double>(j) / n, static_cast<double>(k) / n);
      }
    }
  }
  if (delta > 0.0) {
    std::mt19937_64 rng(seed);
    // Draw three values per vertex in index order regardless of boundary
    // classification, so the stream (and the mesh) is reproducible.
    for (int k = 0; k < m; ++k) {
      for (int j = 0; j < m; ++j) {
        for (int i = 0; i < m; ++i) {
          Vec3 d(symmetric_uniform(rng), symmetric_uniform(rng), symmetric_uniform(rng));
          d *= delta / n;
          if (i == 0 || i == n) d[0] = 0.0;  // stay within the boundary facet
          if (j == 0 || j == n) d[1] = 0.0;
          if (k == 0 || k == n) d[2] = 0.0;
          verts[vid(i, j, k)] += d;
        }
      }
    }
  }
  return verts;
}

PolyMesh generate_hex(int n, double delta, std::uint64_t seed) {
  const int m = n + 1;
  auto vid = [m](int i, int j, int k) { return (k * m + j) * m + i; };
  std::vector<Vec3> verts = grid_vertices(n, delta, seed);

  // Grid quads with canonical loops oriented along the +axis normals.
  // axis 0: quad at (i, j..j+1, k..k+1), etc.
  std::vector<std::vector<int>> face_loops;
  std::vector<std::array<int, 2>> quad_faces;  // quad id -> 1 or 2 face ids (-1 unused)
  auto add_quad = [&](const std::array<int, 4>& loop) {
    std::array<int, 2> ids{-1, -1};
    std::vector<Vec3> pts(4);
    for (int t = 0; t < 4; ++t) {
      pts[static_cast<std::size_t>(t)] = verts[static_cast<std::size_t>(loop[t])];
    }
    bool planar = true;
    try {
      face_geometry(pts);
    } catch (const NonPlanarFace&) {
      planar = false;
    }
    if (planar) {
      ids[0] = static_cast<int>(face_loops.size());
      face_loops.push_back({loop[0], loop[1], loop[2], loop[3]});
    } else {
      // Perturbation bent the quad: split along the shorter diagonal. A
      // fixed mesh-wide diagonal would bias the triangle orientations.
      const double d02 = (pts[0] - pts[2]).squaredNorm();
      const double d13 = (pts[1] - pts[3]).squaredNorm();
      ids[0] = static_cast<int>(face_loops.size());
      ids[1] = ids[0] + 1;
      if (d02 <= d13) {
        face_loops.push_back({loop[0], loop[1], loop[2]});
        face_loops.push_back({loop[0], loop[2], loop[3]});
      } else {
        face_loops.push_back({loop[1], loop[2], loop[3]});
        face_loops.push_back({loop[1], loop[3], loop[0]});
      }
    }
    quad_faces.push_back(ids);
    return static_cast<int>(quad_faces.size()) - 1;
  };

  // Quad ids in axis-major order so cells can recover them by formula.
  std::vector<int> xq(static_cast<std::size_t>(m * n * n));
  std::vector<int> yq(static_cast<std::size_t>(m * n * n));
  std::vector<int> zq(static_cast<std::size_t>(m * n * n));
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < n; ++j) {
      for (int k = 0; k < n; ++k) {
        xq[static_cast<std::size_t>((i * n + j) * n + k)] = add_quad(
            {vid(i, j, k), vid(i, j + 1, k), vid(i, j + 1, k + 1), vid(i, j, k + 1)});
      }
    }
  }
  for (int j = 0; j < m; ++j) {
    for (int i = 0; i < n; ++i) {
      for (int k = 0; k < n; ++k) {
        yq[static_cast<std::size_t>((j * n + i) * n + k)] = add_quad(
            {vid(i, j, k), vid(i, j, k + 1), vid(i + 1, j, k + 1), vid(i + 1, j, k)});
      }
    }
  }
  for (int k = 0; k < m; ++k) {
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        zq[static_cast<std::size_t>((k * n + i) * n + j)] = add_quad(
            {vid(i, j, k), vid(i + 1, j, k), vid(i + 1, j + 1, k), vid(i, j + 1, k)});
      }
    }
  }

  std::vector<std::vector<int>> cell_faces(static_cast<std::size_t>(n) * n * n);
  auto push_quad = [&](std::vector<int>& cf, int quad, int sigma) {
    for (int fid : quad_faces[static_cast<std::size_t>(quad)]) {
      if (fid >= 0) {
        cf.push_back(sigma * (fid + 1));
      }
    }
  };
  for (int k = 0; k < n; ++k) {
    for (int j = 0; j < n; ++j) {
      for (int i = 0; i < n; ++i) {
        auto& cf = cell_faces[static_cast<std::size_t>((k * n + j) * n + i)];
        push_quad(cf, xq[static_cast<std::size_t>((i * n + j) * n + k)], -1);
        push_quad(cf, xq[static_cast<std::size_t>(((i + 1) * n + j) * n + k)], +1);
        push_quad(cf, yq[static_cast<std::size_t>((j * n + i) * n + k)], -1);
        push_quad(cf, yq[static_cast<std::size_t>(((j + 1) * n + i) * n + k)], +1);
        push_quad(cf, zq[static_cast<std::size_t>((k * n + i) * n + j)], -1);
        push_quad(cf, zq[static_cast<std::size_t>(((k + 1) * n + i) * n + j)], +1);
      }
    }
  }
  return build_mesh(std::move(verts), face_loops, cell_faces);
}

PolyMesh generate_tet(int n) {
  const int m = n + 1;
  auto vid = [m](int i, int j, int k) { return (k * m + j) * m + i; };
  std::vector<Vec3> verts = grid_vertices(n, 0.0, 0);

  // Kuhn split: one tetrahedron per axis permutation, all sharing the main
  // diagonal of the voxel.
  static const std::array<std::array<int, 3>, 6> perms = {
      {{0, 1, 2}, {0, 2, 1}, {1, 0, 2}, {1, 2, 0}, {2, 0, 1}, {2, 1, 0}}};

  std::vector<std::vector<std::vector<int>>> cell_loops;
  cell_loops.reserve(static_cast<std::size_t>(n) * n * n * 6);
  for (int k = 0; k < n; ++k) {
    for (int j = 0; j < n; ++j) {
      for (int i = 0; i < n; ++i) {
        for (const auto& perm : perms) {
          std::array<int, 3> at = {i, j, k};
          std::array<int, 4> tet;
          tet[0] = vid(at[0], at[1], at[2]);
          for (int s = 0; s < 3; ++s) {
            ++at[static_cast<std::size_t>(perm[static_cast<std::size_t>(s)])];
            tet[static_cast<std::size_t>(s + 1)] = vid(at[0], at[1], at[2]);
          }
          // Outward-oriented triangular faces: the loop's normal must point
          // away from the omitted vertex.
          std::vector<std::vector<int>> loops;
          for (int omit = 0; omit < 4; ++omit) {
            std::array<int, 3> tri;
            int t = 0;
            for (int s = 0; s < 4; ++s) {
              if (s != omit) {
                tri[static_cast<std::size_t>(t++)] = tet[static_cast<std::size_t>(s)];
              }
            }
            const Vec3& p = verts[static_cast<std::size_t>(tri[0])];
            const Vec3& q = verts[static_cast<std::size_t>(tri[1])];
            const Vec3& r = verts[static_cast<std::size_t>(tri[2])];
            const Vec3& w = verts[static_cast<std::size_t>(tet[static_cast<std::size_t>(omit)])];
            if ((q - p).cross(r - p).dot(w - p) > 0.0) {
              std::swap(tri[1], tri[2]);
            }
            loops.push_back({tri[0], tri[1], tri[2]});
          }
          cell_loops.push_back(std::move(loops));
        }
      }
    }
  }
  return mesh_from_cell_loops(std::move(verts), cell_loops);
}

}  // namespace

PolyMesh generate_mesh(MeshKind kind, int n, double delta, std::uint64_t seed) {
  if (n < 1) {
    throw InvalidParam("subdivision count must be >= 1");
  }
  if (!(delta >= 0.0 && delta < 0.5)) {
    throw InvalidParam("perturbation fraction must satisfy 0 <= delta < 0.5");
  }
  switch (kind) {
    case MeshKind::Tet:
      return generate_tet(n);
    case MeshKind::Hex:
      return generate_hex(n, 0.0, seed);
    case MeshKind::PerturbedHex:
      return generate_hex(n, delta, seed);
  }
  throw InvalidParam("unknown mesh kind");
}

}  // namespace polymfd
