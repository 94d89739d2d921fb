#include <algorithm>
#include <charconv>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>

#include "afferentsim/mesh.hpp"

namespace afferentsim {

namespace {

constexpr const char* kMeshHeader = "afferentsim-mesh v1";

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::vector<int> nodes_where(const Mesh& mesh, int axis, double value, int order_axis) {
  std::vector<int> ids;
  const double tol = 1e-9 * std::max(1.0, std::abs(value));
  for (int n = 0; n < mesh.num_nodes(); ++n) {
    if (std::abs(mesh.nodes(n, axis) - value) <= tol) ids.push_back(n);
  }
  std::stable_sort(ids.begin(), ids.end(), [&](int a, int b) {
    return mesh.nodes(a, order_axis) < mesh.nodes(b, order_axis);
  });
  return ids;
}

}  // namespace

void write_mesh(std::ostream& out, const Mesh& mesh) {
  out << kMeshHeader << '\n';
  for (std::size_t m = 0; m < mesh.materials.size(); ++m) {
    const MaterialLayer& l = mesh.materials[m];
    out << "M " << m << ' ' << l.name << ' ' << format_double(l.elastic_modulus_mpa) << ' '
        << format_double(l.poisson_ratio) << ' ' << format_double(l.top_mm) << ' '
        << format_double(l.bottom_mm) << '\n';
  }
  for (int n = 0; n < mesh.num_nodes(); ++n) {
    out << "N " << n << ' ' << format_double(mesh.nodes(n, 0)) << ' '
        << format_double(mesh.nodes(n, 1)) << '\n';
  }
  for (int e = 0; e < mesh.num_elements(); ++e) {
    const auto& c = mesh.elements[e];
    out << "E " << e << ' ' << c[0] << ' ' << c[1] << ' ' << c[2] << ' ' << c[3] << ' '
        << mesh.element_material[e] << '\n';
  }
  for (const auto& [type, node] : mesh.afferent_nodes) {
    out << "A " << to_string(type) << ' ' << node << '\n';
  }
}

Mesh read_mesh(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kMeshHeader) {
    throw ValidationError("mesh", "missing 'afferentsim-mesh v1' header");
  }
  Mesh mesh;
  std::vector<Eigen::RowVector2d> nodes;
  int line_no = 1;
  const auto fail = [&](const std::string& what) {
    throw ValidationError("mesh:" + std::to_string(line_no), what);
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream fields(line);
    char tag = 0;
    fields >> tag;
    if (tag == 'M') {
      std::size_t id;
      MaterialLayer l;
      fields >> id >> l.name >> l.elastic_modulus_mpa >> l.poisson_ratio >> l.top_mm >> l.bottom_mm;
      if (!fields || id != mesh.materials.size()) fail("bad material record");
      mesh.materials.push_back(l);
    } else if (tag == 'N') {
      std::size_t id;
      double x, y;
      fields >> id >> x >> y;
      if (!fields || id != nodes.size()) fail("bad node record");
      nodes.emplace_back(x, y);
    } else if (tag == 'E') {
      std::size_t id;
      std::array<int, 4> c;
      int material;
      fields >> id >> c[0] >> c[1] >> c[2] >> c[3] >> material;
      if (!fields || id != mesh.elements.size()) fail("bad element record");
      for (int n : c) {
        if (n < 0 || n >= static_cast<int>(nodes.size())) fail("element references unknown node");
      }
      if (material < 0 || material >= static_cast<int>(mesh.materials.size())) {
        fail("element references unknown material");
      }
      mesh.elements.push_back(c);
      mesh.element_material.push_back(material);
    } else if (tag == 'A') {
      std::string type;
      int node;
      fields >> type >> node;
      if (!fields || node < 0 || node >= static_cast<int>(nodes.size())) fail("bad afferent record");
      mesh.afferent_nodes[parse_afferent(type)] = node;
    } else {
      fail("unknown record tag");
    }
  }
  if (nodes.empty() || mesh.elements.empty()) {
    throw ValidationError("mesh", "no nodes or elements");
  }
  mesh.nodes.resize(static_cast<Eigen::Index>(nodes.size()), 2);
  for (std::size_t n = 0; n < nodes.size(); ++n) mesh.nodes.row(n) = nodes[n];

  const double top = mesh.nodes.col(1).maxCoeff();
  const double bottom = mesh.nodes.col(1).minCoeff();
  const double left = mesh.nodes.col(0).minCoeff();
  const double right = mesh.nodes.col(0).maxCoeff();
  mesh.surface_nodes = nodes_where(mesh, 1, top, 0);
  mesh.bottom_nodes = nodes_where(mesh, 1, bottom, 0);
  mesh.left_nodes = nodes_where(mesh, 0, left, 1);
  mesh.right_nodes = nodes_where(mesh, 0, right, 1);
  std::reverse(mesh.left_nodes.begin(), mesh.left_nodes.end());
  std::reverse(mesh.right_nodes.begin(), mesh.right_nodes.end());
  check_element_jacobians(mesh);
  return mesh;
}

}  // namespace afferentsim
