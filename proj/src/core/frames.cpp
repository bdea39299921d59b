// Copyright 2026 The dernet Authors
// SPDX-License-Identifier: Apache-2.0

#include "core/frames.hpp"

#include <fmt/format.h>

#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <vector>

#include "core/error.hpp"

namespace dernet {

void write_frame(std::ostream& out, const State& state) {
  fmt::memory_buffer buf;
  fmt::format_to(std::back_inserter(buf), "id,x,y,z,vx,vy,vz\n");
  for (int i = 0; i < state.node_count(); ++i) {
    const Vec3 x = state.position(i);
    const Vec3 v = state.velocity(i);
    fmt::format_to(std::back_inserter(buf), "{},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g}\n", i,
                   x.x(), x.y(), x.z(), v.x(), v.y(), v.z());
  }
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
}

State read_frame(std::istream& in, const std::string& source) {
  std::string line;
  int line_no = 0;
  if (!std::getline(in, line)) throw ParseError(source, 1, "empty frame");
  ++line_no;
  if (line.rfind("id,x,y,z,vx,vy,vz", 0) != 0) throw ParseError(source, line_no, "bad frame header");
  std::vector<double> q, v;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    std::stringstream row(line);
    std::string cell;
    std::vector<double> cells;
    while (std::getline(row, cell, ',')) {
      try {
        std::size_t used = 0;
        cells.push_back(std::stod(cell, &used));
        if (used != cell.size() && cell.substr(used) != "\r") throw std::invalid_argument(cell);
      } catch (const std::logic_error&) {
        throw ParseError(source, line_no, "bad number '" + cell + "'");
      }
    }
    if (cells.size() != 7) throw ParseError(source, line_no, "expected 7 columns");
    if (cells[0] != static_cast<double>(q.size() / 3)) {
      throw ParseError(source, line_no, "node ids must be 0, 1, 2, ... in order");
    }
    q.insert(q.end(), cells.begin() + 1, cells.begin() + 4);
    v.insert(v.end(), cells.begin() + 4, cells.end());
  }
  State s;
  s.q = Eigen::Map<Eigen::VectorXd>(q.data(), static_cast<Eigen::Index>(q.size()));
  s.v = Eigen::Map<Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
  s.t = 0.0;
  return s;
}

State load_frame(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::io, "cannot open frame file '" + path + "'");
  return read_frame(in, path);
}

}  // namespace dernet
