// Copyright (c) The polymfd Authors.
// SPDX-License-Identifier: Apache-2.0

#include "polymfd/mesh_io.hpp"

#include <cstdio>
#include <fstream>

#include <json.hpp>

namespace polymfd {

using nlohmann::json;

PolyMesh load_mesh(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw ParseError("cannot open mesh file '" + path + "'");
  }
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseError("in '" + path + "': " + e.what());
  }

  auto require = [&](const char* key) -> const json& {
    if (!doc.contains(key)) {
      throw ParseError("in '" + path + "': missing \"" + std::string(key) + "\" key");
    }
    return doc.at(key);
  };

  const json& version = require("version");
  if (!version.is_number_integer() || version.get<int>() != 1) {
    throw SchemaVersionMismatch("mesh file '" + path + "' has version " + version.dump() +
                                ", expected 1");
  }

  std::vector<Vec3> vertices;
  try {
    for (const auto& v : require("vertices")) {
      if (!v.is_array() || v.size() != 3) {
        throw ParseError("in '" + path + "': vertex entry is not a 3-array");
      }
      vertices.emplace_back(v[0].get<double>(), v[1].get<double>(), v[2].get<double>());
    }
    std::vector<std::vector<int>> face_loops;
    for (const auto& f : require("faces")) {
      face_loops.push_back(f.get<std::vector<int>>());
    }
    std::vector<std::vector<int>> cell_faces;
    for (const auto& c : require("cells")) {
      cell_faces.push_back(c.get<std::vector<int>>());
    }
    return build_mesh(std::move(vertices), face_loops, cell_faces);
  } catch (const json::exception& e) {
    throw ParseError("in '" + path + "': " + e.what());
  }
}

void save_mesh(const PolyMesh& mesh, const std::string& path) {
  json doc;
  doc["version"] = 1;
  json verts = json::array();
  for (const Vec3& v : mesh.vertices) {
    verts.push_back({v[0], v[1], v[2]});
  }
  doc["vertices"] = std::move(verts);
  json faces = json::array();
  for (const Face& f : mesh.faces) {
    faces.push_back(f.vertex_loop);
  }
  doc["faces"] = std::move(faces);
  json cells = json::array();
  for (const Cell& c : mesh.cells) {
    std::vector<int> refs;
    refs.reserve(c.face_refs.size());
    for (const FaceRef& fr : c.face_refs) {
      refs.push_back(fr.sign * (fr.face + 1));
    }
    cells.push_back(refs);
  }
  doc["cells"] = std::move(cells);

  std::ofstream out(path);
  if (!out) {
    throw ParseError("cannot open '" + path + "' for writing");
  }
  out << doc.dump(1) << "\n";
}

void export_vtk(const PolyMesh& mesh, const std::string& path,
                const std::map<std::string, NodeField>& point_data,
                const std::map<std::string, CellField>& cell_data) {
  std::ofstream out(path);
  if (!out) {
    throw ParseError("cannot open '" + path + "' for writing");
  }
  char buf[64];
  auto num = [&](double x) {
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return std::string(buf);
  };

  out << "# vtk DataFile Version 3.0\n"
      << "polymfd mesh\n"
      << "ASCII\n"
      << "DATASET UNSTRUCTURED_GRID\n";
  out << "POINTS " << mesh.n_vertices() << " double\n";
  for (const Vec3& v : mesh.vertices) {
    out << num(v[0]) << " " << num(v[1]) << " " << num(v[2]) << "\n";
  }

  // VTK_POLYHEDRON face-stream encoding:
  //   [stream length] nFaces (nPts v...) (nPts v...) ...
  std::size_t total = 0;
  for (const Cell& c : mesh.cells) {
    total += 2;  // stream length + face count
    for (const FaceRef& fr : c.face_refs) {
      total += 1 + mesh.faces[static_cast<std::size_t>(fr.face)].vertex_loop.size();
    }
  }
  out << "CELLS " << mesh.n_cells() << " " << total << "\n";
  for (const Cell& c : mesh.cells) {
    std::size_t len = 1;
    for (const FaceRef& fr : c.face_refs) {
      len += 1 + mesh.faces[static_cast<std::size_t>(fr.face)].vertex_loop.size();
    }
    out << len << " " << c.face_refs.size();
    for (const FaceRef& fr : c.face_refs) {
      const auto& loop = mesh.faces[static_cast<std::size_t>(fr.face)].vertex_loop;
      out << " " << loop.size();
      for (int v : loop) {
        out << " " << v;
      }
    }
    out << "\n";
  }
  out << "CELL_TYPES " << mesh.n_cells() << "\n";
  for (int i = 0; i < mesh.n_cells(); ++i) {
    out << "42\n";  // VTK_POLYHEDRON
  }

  if (!point_data.empty()) {
    out << "POINT_DATA " << mesh.n_vertices() << "\n";
    for (const auto& [name, field] : point_data) {
      out << "SCALARS " << name << " double 1\nLOOKUP_TABLE default\n";
      for (Eigen::Index i = 0; i < field.size(); ++i) {
        out << num(field[i]) << "\n";
      }
    }
  }
  if (!cell_data.empty()) {
    out << "CELL_DATA " << mesh.n_cells() << "\n";
    for (const auto& [name, field] : cell_data) {
      out << "SCALARS " << name << " double 1\nLOOKUP_TABLE default\n";
      for (Eigen::Index i = 0; i < field.size(); ++i) {
        out << num(field[i]) << "\n";
      }
    }
  }
}

}  // namespace polymfd
