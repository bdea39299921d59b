// Copyright 2026 The dernet Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <iosfwd>
#include <string>

#include "core/net_topology.hpp"

namespace dernet {

// Plain-text mesh format. Sections start with a `*name` line:
//
//   *nodes      id x y z
//   *stretch    i j rest_length
//   *bend       i j k voronoi_length
//   *junctions  ids (any number per line)
//   *corners    6 ids
//   *pointmass  id kg
//
// `#` starts a comment. Floats are written with 17 significant digits so a
// save/load round trip is exact.

void write_mesh(std::ostream& out, const NetMesh& mesh);
void save_mesh(const NetMesh& mesh, const std::string& path);

/// Parses a mesh and derives lumped masses from `material`. Throws
/// ParseError (with line number) on malformed input and InvalidMeshError when
/// the parsed mesh violates an invariant.
NetMesh read_mesh(std::istream& in, const MaterialParams& material,
                  const std::string& source_name = "<stream>");
NetMesh load_mesh(const std::string& path, const MaterialParams& material);

}  // namespace dernet
