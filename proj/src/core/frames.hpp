// Copyright 2026 The dernet Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <iosfwd>
#include <string>

#include "core/integrator.hpp"

namespace dernet {

/// One CSV snapshot: header `id,x,y,z,vx,vy,vz`, one row per node, 17
/// significant digits.
void write_frame(std::ostream& out, const State& state);

/// Reads a frame written by write_frame. `t` is left at zero. Throws
/// ParseError with the line number.
State read_frame(std::istream& in, const std::string& source = "<frame>");
State load_frame(const std::string& path);

}  // namespace dernet
