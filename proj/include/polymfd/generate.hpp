// Copyright (c) The polymfd Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>

#include "polymfd/mesh.hpp"

namespace polymfd {

enum class MeshKind { Tet, Hex, PerturbedHex };

/// Parses "tet" | "hex" | "perturbed-hex". Throws InvalidParam.
MeshKind parse_mesh_kind(const std::string& name);
std::string to_string(MeshKind kind);

/// Structured generators on the unit cube with n subdivisions per axis.
///
/// tet uses the six-tetrahedra Kuhn split of each voxel. perturbed-hex
/// jitters each interior vertex by delta/n per axis (boundary vertices move
/// only within their boundary facet) and re-triangulates any quad that the
/// perturbation made non-planar. Deterministic for a fixed seed.
///
/// Requires n >= 1 and 0 <= delta < 0.5; throws InvalidParam otherwise.
PolyMesh generate_mesh(MeshKind kind, int n, double delta = 0.0, std::uint64_t seed = 0);

}  // namespace polymfd
