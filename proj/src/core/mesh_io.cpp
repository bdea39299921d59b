// Copyright 2026 The dernet Authors
// SPDX-License-Identifier: Apache-2.0

#include "core/mesh_io.hpp"

#include <fmt/format.h>

#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "core/error.hpp"

namespace dernet {

namespace {

std::string fmt17(double v) { return fmt::format("{:.17g}", v); }

}  // namespace

void write_mesh(std::ostream& out, const NetMesh& mesh) {
  const MeshCounts c = mesh.counts();
  out << "# dernet mesh: " << c.nodes << " nodes, " << c.stretch
      << " stretch elements, " << c.bend << " bend elements\n";
  out << "*nodes\n";
  for (int i = 0; i < c.nodes; ++i) {
    const Vec3& x = mesh.nodes[i];
    out << i << ' ' << fmt17(x.x()) << ' ' << fmt17(x.y()) << ' ' << fmt17(x.z()) << '\n';
  }
  out << "*stretch\n";
  for (const auto& s : mesh.stretch) {
    out << s.i << ' ' << s.j << ' ' << fmt17(s.rest_length) << '\n';
  }
  out << "*bend\n";
  for (const auto& b : mesh.bend) {
    out << b.i << ' ' << b.j << ' ' << b.k << ' ' << fmt17(b.voronoi_length) << '\n';
  }
  if (!mesh.junction_nodes.empty()) {
    out << "*junctions\n";
    for (std::size_t n = 0; n < mesh.junction_nodes.size(); ++n) {
      out << mesh.junction_nodes[n] << ((n % 16 == 15 || n + 1 == mesh.junction_nodes.size()) ? '\n' : ' ');
    }
  }
  if (!mesh.corner_nodes.empty()) {
    out << "*corners\n";
    for (std::size_t n = 0; n < mesh.corner_nodes.size(); ++n) {
      out << mesh.corner_nodes[n] << (n + 1 == mesh.corner_nodes.size() ? '\n' : ' ');
    }
  }
  bool any_point_mass = false;
  for (double m : mesh.extra_point_mass) any_point_mass |= (m != 0.0);
  if (any_point_mass) {
    out << "*pointmass\n";
    for (std::size_t n = 0; n < mesh.extra_point_mass.size(); ++n) {
      if (mesh.extra_point_mass[n] != 0.0) out << n << ' ' << fmt17(mesh.extra_point_mass[n]) << '\n';
    }
  }
}

void save_mesh(const NetMesh& mesh, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::io, "cannot open mesh file for writing: " + path);
  write_mesh(out, mesh);
  if (!out) throw Error(ErrorCode::io, "failed writing mesh file: " + path);
}

namespace {

enum class Section { none, nodes, stretch, bend, junctions, corners, pointmass };

class LineReader {
 public:
  LineReader(std::istringstream&& fields, const std::string& source, int line)
      : fields_(std::move(fields)), source_(source), line_(line) {}

  int integer() {
    long long v;
    if (!(fields_ >> v)) fail("expected an integer");
    return static_cast<int>(v);
  }

  double real() {
    std::string token;
    if (!(fields_ >> token)) fail("expected a number");
    try {
      std::size_t used = 0;
      const double v = std::stod(token, &used);
      if (used != token.size()) fail("malformed number '" + token + "'");
      return v;
    } catch (const std::logic_error&) {
      fail("malformed number '" + token + "'");
    }
  }

  bool exhausted() {
    std::string rest;
    return !(fields_ >> rest);
  }

  void expect_end() {
    if (!exhausted()) fail("unexpected trailing fields");
  }

  [[noreturn]] void fail(const std::string& message) const {
    throw ParseError(source_, line_, message);
  }

 private:
  std::istringstream fields_;
  const std::string& source_;
  int line_;
};

}  // namespace

NetMesh read_mesh(std::istream& in, const MaterialParams& material,
                  const std::string& source_name) {
  NetMesh mesh;
  std::vector<std::pair<int, double>> point_masses;
  Section section = Section::none;
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto hash = raw.find('#');
    std::string line = raw.substr(0, hash);
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    line = line.substr(first);
    if (line[0] == '*') {
      std::string name = line.substr(1);
      name = name.substr(0, name.find_first_of(" \t\r"));
      if (name == "nodes") section = Section::nodes;
      else if (name == "stretch") section = Section::stretch;
      else if (name == "bend") section = Section::bend;
      else if (name == "junctions") section = Section::junctions;
      else if (name == "corners") section = Section::corners;
      else if (name == "pointmass") section = Section::pointmass;
      else throw ParseError(source_name, line_no, "unknown section '*" + name + "'");
      continue;
    }
    LineReader r(std::istringstream(line), source_name, line_no);
    switch (section) {
      case Section::none:
        r.fail("data before the first section header");
      case Section::nodes: {
        const int id = r.integer();
        if (id != mesh.node_count()) r.fail("node ids must be consecutive from 0");
        const double x = r.real(), y = r.real(), z = r.real();
        r.expect_end();
        mesh.nodes.emplace_back(x, y, z);
        break;
      }
      case Section::stretch: {
        StretchElement s;
        s.i = r.integer();
        s.j = r.integer();
        s.rest_length = r.real();
        r.expect_end();
        if (!(s.rest_length > 0.0)) r.fail("nonpositive rest length");
        if (s.i < 0 || s.j < 0 || s.i >= mesh.node_count() || s.j >= mesh.node_count()) {
          r.fail("stretch element references an unknown node");
        }
        mesh.stretch.push_back(s);
        break;
      }
      case Section::bend: {
        BendElement b;
        b.i = r.integer();
        b.j = r.integer();
        b.k = r.integer();
        b.voronoi_length = r.real();
        r.expect_end();
        if (!(b.voronoi_length > 0.0)) r.fail("nonpositive Voronoi length");
        for (int idx : {b.i, b.j, b.k}) {
          if (idx < 0 || idx >= mesh.node_count()) r.fail("bend element references an unknown node");
        }
        mesh.bend.push_back(b);
        break;
      }
      case Section::junctions:
      case Section::corners: {
        std::istringstream ids(line);
        std::string tok;
        while (ids >> tok) {
          long long v = -1;
          try {
            std::size_t used = 0;
            v = std::stoll(tok, &used);
            if (used != tok.size()) r.fail("expected a node id, got '" + tok + "'");
          } catch (const std::logic_error&) {
            r.fail("expected a node id, got '" + tok + "'");
          }
          if (v < 0 || v >= mesh.node_count()) r.fail("node id " + tok + " out of range");
          (section == Section::junctions ? mesh.junction_nodes : mesh.corner_nodes)
              .push_back(static_cast<int>(v));
        }
        break;
      }
      case Section::pointmass: {
        const int id = r.integer();
        const double kg = r.real();
        r.expect_end();
        if (id < 0 || id >= mesh.node_count()) r.fail("point mass references an unknown node");
        if (!(kg >= 0.0)) r.fail("negative point mass");
        point_masses.emplace_back(id, kg);
        break;
      }
    }
  }
  if (mesh.nodes.empty()) throw ParseError(source_name, line_no, "no *nodes section");
  mesh.extra_point_mass.assign(mesh.nodes.size(), 0.0);
  for (const auto& [id, kg] : point_masses) mesh.extra_point_mass[id] += kg;
  compute_lumped_masses(mesh, material);
  validate_mesh(mesh, material);
  return mesh;
}

NetMesh load_mesh(const std::string& path, const MaterialParams& material) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::io, "cannot open mesh file: " + path);
  return read_mesh(in, material, path);
}

}  // namespace dernet
