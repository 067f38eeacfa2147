// Copyright (c) The polymfd Authors.
// SPDX-License-Identifier: Apache-2.0

#include "polymfd/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "polymfd/parallel.hpp"

namespace polymfd {

namespace {

double max_pairwise_distance(const std::vector<Vec3>& pts) {
  double d2 = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    for (std::size_t j = i + 1; j < pts.size(); ++j) {
      d2 = std::max(d2, (pts[i] - pts[j]).squaredNorm());
    }
  }
  return std::sqrt(d2);
}

std::vector<Vec3> loop_points(const std::vector<Vec3>& vertices, const std::vector<int>& loop) {
  std::vector<Vec3> pts;
  pts.reserve(loop.size());
  for (int v : loop) {
    pts.push_back(vertices[static_cast<std::size_t>(v)]);
  }
  return pts;
}

// Exact integral of x_k^2 over a triangle: edge-midpoint rule (degree 2).
double integrate_xk2_triangle(const Vec3& a, const Vec3& b, const Vec3& c, int k) {
  const double area = 0.5 * (b - a).cross(c - a).norm();
  auto sq = [](double t) { return t * t; };
  return area / 3.0 *
         (sq(0.5 * (a[k] + b[k])) + sq(0.5 * (b[k] + c[k])) + sq(0.5 * (c[k] + a[k])));
}

}  // namespace

int PolyMesh::local_vertex(int c, int v) const {
  const auto& ids = cells[static_cast<std::size_t>(c)].vertex_ids;
  auto it = std::lower_bound(ids.begin(), ids.end(), v);
  return (it != ids.end() && *it == v) ? static_cast<int>(it - ids.begin()) : -1;
}

FaceGeometry face_geometry(const std::vector<Vec3>& loop) {
  if (loop.size() < 3) {
    throw DegenerateFace("vertex loop has fewer than 3 vertices");
  }
  const double hf = max_pairwise_distance(loop);

  Vec3 anchor = Vec3::Zero();
  for (const Vec3& p : loop) {
    anchor += p;
  }
  anchor /= static_cast<double>(loop.size());

  // Fan about the vertex average; the signed area vector fixes the normal by
  // the right-hand rule on the loop.
  Vec3 area_vec = Vec3::Zero();
  for (std::size_t i = 0; i < loop.size(); ++i) {
    const Vec3& a = loop[i];
    const Vec3& b = loop[(i + 1) % loop.size()];
    area_vec += 0.5 * (a - anchor).cross(b - anchor);
  }
  const double area = area_vec.norm();
  if (!(area > 1e-14 * hf * hf)) {
    throw DegenerateFace("face area below 1e-14 * h_f^2");
  }
  const Vec3 normal = area_vec / area;

  double planarity = 0.0;
  for (const Vec3& p : loop) {
    planarity = std::max(planarity, std::abs((p - anchor).dot(normal)));
  }
  if (planarity > 1e-9 * hf) {
    std::ostringstream os;
    os << "out-of-plane deviation " << planarity << " exceeds 1e-9 * h_f = " << 1e-9 * hf;
    throw NonPlanarFace(os.str());
  }

  Vec3 centroid = Vec3::Zero();
  for (std::size_t i = 0; i < loop.size(); ++i) {
    const Vec3& a = loop[i];
    const Vec3& b = loop[(i + 1) % loop.size()];
    const double tri_area = 0.5 * (a - anchor).cross(b - anchor).dot(normal);
    centroid += tri_area * (anchor + a + b) / 3.0;
  }
  centroid /= area;

  return FaceGeometry{area, centroid, normal};
}

CellGeometry cell_geometry(const std::vector<Vec3>& vertices,
                           const std::vector<Face>& faces,
                           const std::vector<FaceRef>& face_refs) {
  Vec3 closedness = Vec3::Zero();
  double total_area = 0.0;
  for (const FaceRef& fr : face_refs) {
    const Face& f = faces[static_cast<std::size_t>(fr.face)];
    closedness += fr.sign * f.area * f.normal;
    total_area += f.area;
  }
  if (closedness.norm() > 1e-12 * total_area) {
    std::ostringstream os;
    os << "sum sigma |f| n_f = " << closedness.norm() << " (tolerance " << 1e-12 * total_area
       << ")";
    throw OpenSurface(os.str());
  }

  // Divergence theorem on x/3; x . n_f is constant over each planar face.
  double volume = 0.0;
  for (const FaceRef& fr : face_refs) {
    const Face& f = faces[static_cast<std::size_t>(fr.face)];
    volume += fr.sign * f.area * f.centroid.dot(f.normal) / 3.0;
  }
  if (!(volume > 0.0)) {
    std::ostringstream os;
    os << "cell volume " << volume << " not positive";
    throw NegativeVolume(os.str());
  }

  // |P| xbar_k = 1/2 \oint x_k^2 n_k dS, with the face integrals of x_k^2
  // evaluated exactly by the edge-midpoint rule on fan triangles.
  Vec3 centroid = Vec3::Zero();
  for (const FaceRef& fr : face_refs) {
    const Face& f = faces[static_cast<std::size_t>(fr.face)];
    for (int k = 0; k < 3; ++k) {
      const double nk = fr.sign * f.normal[k];
      if (nk == 0.0) {
        continue;
      }
      double second_moment = 0.0;
      for (std::size_t i = 0; i < f.vertex_loop.size(); ++i) {
        const Vec3& a = vertices[static_cast<std::size_t>(f.vertex_loop[i])];
        const Vec3& b =
            vertices[static_cast<std::size_t>(f.vertex_loop[(i + 1) % f.vertex_loop.size()])];
        second_moment += integrate_xk2_triangle(f.centroid, a, b, k);
      }
      centroid[k] += 0.5 * nk * second_moment;
    }
  }
  centroid /= volume;

  return CellGeometry{volume, centroid};
}

CellGeometry cell_geometry(const PolyMesh& mesh, int cell) {
  return cell_geometry(mesh.vertices, mesh.faces, mesh.cells[static_cast<std::size_t>(cell)].face_refs);
}

namespace {

// Shared tail of both builders: geometry, edges, incidence, boundary flags.
void finalize_mesh(PolyMesh& m) {
  for (Face& f : m.faces) {
    const auto pts = loop_points(m.vertices, f.vertex_loop);
    const FaceGeometry g = face_geometry(pts);
    f.area = g.area;
    f.centroid = g.centroid;
    f.normal = g.normal;
    f.diameter = max_pairwise_distance(pts);
  }

  // Edges: deduplicated over faces, oriented from the lower vertex index.
  std::map<std::pair<int, int>, int> edge_ids;
  std::vector<std::vector<int>> face_edges(m.faces.size());
  for (std::size_t fi = 0; fi < m.faces.size(); ++fi) {
    const auto& loop = m.faces[fi].vertex_loop;
    for (std::size_t i = 0; i < loop.size(); ++i) {
      int a = loop[i];
      int b = loop[(i + 1) % loop.size()];
      if (a == b) {
        throw InvalidParam("face loop repeats a vertex consecutively");
      }
      const std::pair<int, int> key{std::min(a, b), std::max(a, b)};
      auto [it, inserted] = edge_ids.try_emplace(key, static_cast<int>(m.edges.size()));
      if (inserted) {
        Edge e;
        e.v1 = key.first;
        e.v2 = key.second;
        e.length = (m.vertices[static_cast<std::size_t>(e.v2)] -
                    m.vertices[static_cast<std::size_t>(e.v1)])
                       .norm();
        m.edges.push_back(e);
      }
      face_edges[fi].push_back(it->second);
    }
  }

  m.face_cells.assign(m.faces.size(), {-1, -1});
  for (std::size_t ci = 0; ci < m.cells.size(); ++ci) {
    Cell& cell = m.cells[ci];

    std::vector<int> vids;
    std::vector<int> eids;
    for (const FaceRef& fr : cell.face_refs) {
      const auto fi = static_cast<std::size_t>(fr.face);
      vids.insert(vids.end(), m.faces[fi].vertex_loop.begin(), m.faces[fi].vertex_loop.end());
      eids.insert(eids.end(), face_edges[fi].begin(), face_edges[fi].end());

      auto& slots = m.face_cells[fi];
      if (fr.sign >= 0 && slots[0] < 0) {
        slots[0] = static_cast<int>(ci);
      } else if (slots[1] < 0) {
        slots[1] = static_cast<int>(ci);
      } else if (slots[0] < 0) {
        slots[0] = static_cast<int>(ci);
      }
      // Overfull incidence is reported by validate_mesh, not here.
    }
    std::sort(vids.begin(), vids.end());
    vids.erase(std::unique(vids.begin(), vids.end()), vids.end());
    std::sort(eids.begin(), eids.end());
    eids.erase(std::unique(eids.begin(), eids.end()), eids.end());
    cell.vertex_ids = std::move(vids);
    cell.edge_ids = std::move(eids);

    const CellGeometry g = cell_geometry(m.vertices, m.faces, cell.face_refs);
    cell.volume = g.volume;
    cell.centroid = g.centroid;

    std::vector<Vec3> pts;
    pts.reserve(cell.vertex_ids.size());
    for (int v : cell.vertex_ids) {
      pts.push_back(m.vertices[static_cast<std::size_t>(v)]);
    }
    cell.diameter = max_pairwise_distance(pts);
  }

  m.face_boundary.assign(m.faces.size(), 0);
  m.vertex_boundary.assign(m.vertices.size(), 0);
  m.edge_boundary.assign(m.edges.size(), 0);
  for (std::size_t fi = 0; fi < m.faces.size(); ++fi) {
    const int count = (m.face_cells[fi][0] >= 0 ? 1 : 0) + (m.face_cells[fi][1] >= 0 ? 1 : 0);
    if (count == 1) {
      m.face_boundary[fi] = 1;
      for (int v : m.faces[fi].vertex_loop) {
        m.vertex_boundary[static_cast<std::size_t>(v)] = 1;
      }
      for (int e : face_edges[fi]) {
        m.edge_boundary[static_cast<std::size_t>(e)] = 1;
      }
    }
  }

  m.h = 0.0;
  for (const Cell& c : m.cells) {
    m.h = std::max(m.h, c.diameter);
  }
}

}  // namespace

PolyMesh build_mesh(std::vector<Vec3> vertices,
                    const std::vector<std::vector<int>>& face_loops,
                    const std::vector<std::vector<int>>& cell_faces) {
  PolyMesh m;
  m.vertices = std::move(vertices);
  m.faces.resize(face_loops.size());
  for (std::size_t i = 0; i < face_loops.size(); ++i) {
    for (int v : face_loops[i]) {
      if (v < 0 || v >= m.n_vertices()) {
        throw InvalidParam("face vertex index out of range");
      }
    }
    m.faces[i].vertex_loop = face_loops[i];
  }
  m.cells.resize(cell_faces.size());
  for (std::size_t i = 0; i < cell_faces.size(); ++i) {
    for (int signed_ref : cell_faces[i]) {
      if (signed_ref == 0) {
        throw InvalidParam("cell face reference must be nonzero (1-based, signed)");
      }
      const int fi = std::abs(signed_ref) - 1;
      if (fi >= m.n_faces()) {
        throw InvalidParam("cell face index out of range");
      }
      m.cells[i].face_refs.push_back(FaceRef{fi, signed_ref > 0 ? 1 : -1});
    }
  }
  finalize_mesh(m);
  return m;
}

PolyMesh mesh_from_cell_loops(std::vector<Vec3> vertices,
                              const std::vector<std::vector<std::vector<int>>>& cell_loops) {
  PolyMesh m;
  m.vertices = std::move(vertices);

  // Deduplicate faces by vertex set; sigma = +1 when the cell's outward loop
  // matches the stored loop's cyclic order, -1 when it is its reversal.
  std::map<std::vector<int>, int> face_of_key;
  m.cells.resize(cell_loops.size());
  for (std::size_t ci = 0; ci < cell_loops.size(); ++ci) {
    for (const std::vector<int>& loop : cell_loops[ci]) {
      std::vector<int> key = loop;
      std::sort(key.begin(), key.end());
      auto [it, inserted] = face_of_key.try_emplace(key, static_cast<int>(m.faces.size()));
      int sign = 1;
      if (inserted) {
        Face f;
        f.vertex_loop = loop;
        m.faces.push_back(std::move(f));
      } else {
        const auto& stored = m.faces[static_cast<std::size_t>(it->second)].vertex_loop;
        const std::size_t n = stored.size();
        if (n != loop.size()) {
          throw InvalidParam("inconsistent face loops between cells");
        }
        const auto pos = std::find(stored.begin(), stored.end(), loop[0]);
        if (pos == stored.end()) {
          throw InvalidParam("inconsistent face loops between cells");
        }
        const std::size_t p = static_cast<std::size_t>(pos - stored.begin());
        if (stored[(p + 1) % n] == loop[1]) {
          sign = 1;
        } else if (stored[(p + n - 1) % n] == loop[1]) {
          sign = -1;
        } else {
          throw InvalidParam("face loops share vertices but not cyclic order");
        }
      }
      m.cells[ci].face_refs.push_back(FaceRef{it->second, sign});
    }
  }
  finalize_mesh(m);
  return m;
}

ValidationReport validate_mesh(const PolyMesh& mesh, bool use_threads) {
  ValidationReport report;
  const int nc = mesh.n_cells();

  std::vector<std::vector<std::string>> cell_violations(static_cast<std::size_t>(nc));
  std::vector<double> closedness(static_cast<std::size_t>(nc), 0.0);
  std::vector<double> second_moment(static_cast<std::size_t>(nc), 0.0);

  parallel_for(
      static_cast<std::size_t>(nc),
      [&](std::size_t ci) {
        const Cell& cell = mesh.cells[ci];
        auto& out = cell_violations[ci];
        std::ostringstream os;

        Vec3 closure = Vec3::Zero();
        Mat3 moment = Mat3::Zero();
        double total_area = 0.0;
        for (const FaceRef& fr : cell.face_refs) {
          const Face& f = mesh.faces[static_cast<std::size_t>(fr.face)];
          closure += fr.sign * f.area * f.normal;
          moment += fr.sign * f.area * f.centroid * f.normal.transpose();
          total_area += f.area;
        }
        closedness[ci] = closure.norm() / total_area;
        if (closedness[ci] > 1e-12) {
          os.str("");
          os << "cell " << ci << ": closedness defect " << closedness[ci];
          out.push_back(os.str());
        }

        second_moment[ci] =
            (moment - cell.volume * Mat3::Identity()).norm() / (cell.volume * std::sqrt(3.0));
        if (second_moment[ci] > 1e-10) {
          os.str("");
          os << "cell " << ci << ": second-moment defect " << second_moment[ci];
          out.push_back(os.str());
        }

        if (!(cell.volume > 0.0)) {
          os.str("");
          os << "cell " << ci << ": nonpositive volume " << cell.volume;
          out.push_back(os.str());
        }

        // Each edge of the cell's surface must be shared by exactly two of
        // its faces (combinatorially closed surface).
        std::map<std::pair<int, int>, int> edge_use;
        for (const FaceRef& fr : cell.face_refs) {
          const auto& loop = mesh.faces[static_cast<std::size_t>(fr.face)].vertex_loop;
          for (std::size_t i = 0; i < loop.size(); ++i) {
            int a = loop[i];
            int b = loop[(i + 1) % loop.size()];
            ++edge_use[{std::min(a, b), std::max(a, b)}];
          }
        }
        for (const auto& [e, count] : edge_use) {
          if (count != 2) {
            os.str("");
            os << "cell " << ci << ": edge (" << e.first << "," << e.second << ") used by "
               << count << " faces";
            out.push_back(os.str());
          }
        }
      },
      use_threads);

  for (std::size_t ci = 0; ci < static_cast<std::size_t>(nc); ++ci) {
    report.max_closedness = std::max(report.max_closedness, closedness[ci]);
    report.max_second_moment = std::max(report.max_second_moment, second_moment[ci]);
    report.violations.insert(report.violations.end(), cell_violations[ci].begin(),
                             cell_violations[ci].end());
    report.total_volume += mesh.cells[ci].volume;
  }

  // Conformity: incidence counts, opposite signs across interior faces,
  // boundary flags consistent with incidence.
  std::vector<int> incident_count(static_cast<std::size_t>(mesh.n_faces()), 0);
  std::vector<int> sign_sum(static_cast<std::size_t>(mesh.n_faces()), 0);
  for (int ci = 0; ci < nc; ++ci) {
    for (const FaceRef& fr : mesh.cells[static_cast<std::size_t>(ci)].face_refs) {
      ++incident_count[static_cast<std::size_t>(fr.face)];
      sign_sum[static_cast<std::size_t>(fr.face)] += fr.sign;
    }
  }
  for (int fi = 0; fi < mesh.n_faces(); ++fi) {
    const auto f = static_cast<std::size_t>(fi);
    std::ostringstream os;
    if (incident_count[f] < 1 || incident_count[f] > 2) {
      os << "face " << fi << ": incident to " << incident_count[f] << " cells";
      report.violations.push_back(os.str());
      continue;
    }
    if (incident_count[f] == 2 && sign_sum[f] != 0) {
      os << "face " << fi << ": interior face without opposite orientation signs";
      report.violations.push_back(os.str());
    }
    const bool is_boundary = incident_count[f] == 1;
    if (static_cast<bool>(mesh.face_boundary[f]) != is_boundary) {
      os << "face " << fi << ": boundary flag inconsistent with incidence count "
         << incident_count[f];
      report.violations.push_back(os.str());
    }
    if (!(mesh.faces[f].area > 0.0)) {
      os.str("");
      os << "face " << fi << ": nonpositive area";
      report.violations.push_back(os.str());
    }
  }
  for (int ei = 0; ei < mesh.n_edges(); ++ei) {
    if (!(mesh.edges[static_cast<std::size_t>(ei)].length > 0.0)) {
      std::ostringstream os;
      os << "edge " << ei << ": nonpositive length";
      report.violations.push_back(os.str());
    }
  }
  return report;
}

MeshQualityReport mesh_quality(const PolyMesh& mesh) {
  MeshQualityReport q;
  q.subtet_count.resize(mesh.cells.size(), 0);
  q.min_shape_ratio.resize(mesh.cells.size(), 1.0);

  auto tet_shape_ratio = [](const Vec3& a, const Vec3& b, const Vec3& c, const Vec3& d) {
    const double vol = std::abs((b - a).cross(c - a).dot(d - a)) / 6.0;
    const double sa = 0.5 * ((b - a).cross(c - a).norm() + (b - a).cross(d - a).norm() +
                             (c - a).cross(d - a).norm() + (c - b).cross(d - b).norm());
    const double r = 3.0 * vol / sa;  // inradius
    const double h = std::max({(b - a).norm(), (c - a).norm(), (d - a).norm(), (c - b).norm(),
                               (d - b).norm(), (d - c).norm()});
    return r / h;
  };

  for (std::size_t ci = 0; ci < mesh.cells.size(); ++ci) {
    const Cell& cell = mesh.cells[ci];
    int count = 0;
    double min_ratio = 1.0;
    for (const FaceRef& fr : cell.face_refs) {
      const Face& f = mesh.faces[static_cast<std::size_t>(fr.face)];
      q.min_face_ratio = std::min(q.min_face_ratio, f.diameter / cell.diameter);
      for (std::size_t i = 0; i < f.vertex_loop.size(); ++i) {
        const Vec3& a = mesh.vertices[static_cast<std::size_t>(f.vertex_loop[i])];
        const Vec3& b = mesh.vertices[static_cast<std::size_t>(
            f.vertex_loop[(i + 1) % f.vertex_loop.size()])];
        q.min_edge_ratio = std::min(q.min_edge_ratio, (a - b).norm() / f.diameter);
        min_ratio = std::min(min_ratio, tet_shape_ratio(cell.centroid, f.centroid, a, b));
        ++count;
      }
    }
    q.subtet_count[ci] = count;
    q.min_shape_ratio[ci] = min_ratio;
    q.max_subtets = std::max(q.max_subtets, count);
    q.min_shape = std::min(q.min_shape, min_ratio);
  }
  return q;
}

}  // namespace polymfd
