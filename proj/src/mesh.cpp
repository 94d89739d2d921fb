#include "afferentsim/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "afferentsim/quad4.hpp"

namespace afferentsim {

std::vector<MaterialLayer> fingertip_material_table() {
  return {
      {"stratum_corneum", 2.000, 0.30, 0.0, 0.0},
      {"epidermis", 2.000, 0.30, 0.0, 0.0},
      {"dermis", 0.050, 0.48, 0.0, 0.0},
      {"subcutaneous", 0.024, 0.40, 0.0, 0.0},
      {"bone", 1.700e4, 0.30, 0.0, 0.0},
      {"nail", 1.700e2, 0.30, 0.0, 0.0},
  };
}

std::vector<MaterialLayer> stack_layers(const std::vector<MaterialLayer>& table,
                                        const std::vector<double>& thickness_mm) {
  if (table.size() < thickness_mm.size()) {
    throw ValidationError("materials", "fewer materials than layer thicknesses");
  }
  std::vector<MaterialLayer> layers;
  double depth = 0.0;
  for (std::size_t i = 0; i < thickness_mm.size(); ++i) {
    MaterialLayer layer = table[i];
    layer.top_mm = depth;
    depth += thickness_mm[i];
    layer.bottom_mm = depth;
    layers.push_back(layer);
  }
  return layers;
}

std::vector<MaterialLayer> default_skin_layers() {
  auto table = fingertip_material_table();
  table.resize(4);
  return stack_layers(table, GeometrySpec{}.layer_thickness_mm);
}

double GeometrySpec::depth_mm() const {
  double depth = 0.0;
  for (double t : layer_thickness_mm) depth += t;
  return depth;
}

double GeometrySpec::centerline() const {
  return centerline_x_mm < 0.0 ? 0.5 * domain_width_mm : centerline_x_mm;
}

void GeometrySpec::validate() const {
  if (!(domain_width_mm > 0.0)) {
    throw ValidationError("domain_width_mm", "must be > 0");
  }
  if (layer_thickness_mm.empty()) {
    throw ValidationError("layer_thickness_mm", "at least one layer required");
  }
  if (!(surface_element_mm > 0.0)) {
    throw ValidationError("surface_element_mm", "must be > 0");
  }
  if (surface_element_mm > domain_width_mm) {
    throw ValidationError("surface_element_mm", "exceeds the domain width");
  }
  for (std::size_t i = 0; i < layer_thickness_mm.size(); ++i) {
    const std::string field = "layer_thickness_mm[" + std::to_string(i) + "]";
    if (!(layer_thickness_mm[i] > 0.0)) throw ValidationError(field, "must be > 0");
    if (surface_element_mm > layer_thickness_mm[i] * (1.0 + 1e-12)) {
      throw ValidationError(field, "thinner than surface_element_mm");
    }
  }
  if (!(coarsening >= 1.0)) throw ValidationError("coarsening", "must be >= 1");
  if (!(growth_ratio >= 1.0)) throw ValidationError("growth_ratio", "must be >= 1");
  if (centerline_x_mm > domain_width_mm) {
    throw ValidationError("centerline_x_mm", "outside the domain");
  }
  for (AfferentType type : kAllAfferents) {
    const auto it = afferent_depth_mm.find(type);
    const std::string field = "afferent_depth_mm." + std::string(to_string(type));
    if (it == afferent_depth_mm.end()) throw ValidationError(field, "missing");
    if (!(it->second >= 0.0)) throw ValidationError(field, "must be >= 0");
  }
}

namespace {

// Rows inside one layer: heights previous * q^i for i = 1..n, summing to the
// layer thickness. Picks the fewest rows whose ratio stays within the growth
// target and whose last row stays under the cap.
std::vector<double> grade_layer(double thickness, double previous, double growth, double cap) {
  const auto total = [&](double q, int n) {
    double sum = 0.0;
    double h = previous;
    for (int i = 0; i < n; ++i) {
      h *= q;
      sum += h;
    }
    return sum;
  };
  const auto solve_ratio = [&](int n) {
    double lo = 1.0;
    double hi = 2.0;
    while (total(hi, n) < thickness) hi *= 2.0;
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (lo + hi);
      (total(mid, n) < thickness ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
  };

  const int max_rows = static_cast<int>(std::floor(thickness / previous + 1e-9));
  if (max_rows < 1) return {thickness};

  int rows = 0;
  for (int n = 1; n <= max_rows; ++n) {
    const double q = solve_ratio(n);
    if (q <= growth * (1.0 + 1e-12) && previous * std::pow(q, n) <= cap * (1.0 + 1e-12)) {
      rows = n;
      break;
    }
  }
  if (rows == 0) {
    // No graded split fits; fall back to equal rows under the cap.
    const int n = static_cast<int>(std::ceil(thickness / cap - 1e-9));
    return std::vector<double>(n, thickness / n);
  }
  const double q = solve_ratio(rows);
  std::vector<double> heights;
  double h = previous;
  double sum = 0.0;
  for (int i = 0; i < rows; ++i) {
    h *= q;
    heights.push_back(h);
    sum += h;
  }
  // Absorb bisection round-off so interfaces land exactly.
  heights.back() += thickness - sum;
  return heights;
}

}  // namespace

Eigen::Matrix<double, 4, 2> Mesh::element_coordinates(int element) const {
  Eigen::Matrix<double, 4, 2> xy;
  for (int a = 0; a < 4; ++a) xy.row(a) = nodes.row(elements[element][a]);
  return xy;
}

Eigen::Vector2d Mesh::centroid(int element) const {
  return element_coordinates(element).colwise().mean().transpose();
}

std::map<AfferentType, int> locate_afferent_nodes(const Mesh& mesh,
                                                  const std::map<AfferentType, double>& depths_mm,
                                                  double centerline_x_mm) {
  std::map<AfferentType, int> found;
  for (const auto& [type, depth] : depths_mm) {
    const Eigen::RowVector2d target(centerline_x_mm, -depth);
    int best = -1;
    double best_d2 = std::numeric_limits<double>::infinity();
    for (int n = 0; n < mesh.num_nodes(); ++n) {
      const double d2 = (mesh.nodes.row(n) - target).squaredNorm();
      if (d2 < best_d2) {
        best_d2 = d2;
        best = n;
      }
    }
    found[type] = best;
  }
  return found;
}

void check_element_jacobians(const Mesh& mesh) {
  for (int e = 0; e < mesh.num_elements(); ++e) {
    if (!(quad4::min_gauss_jacobian<double>(mesh.element_coordinates(e)) > 0.0)) {
      throw NumericalError("inverted element " + std::to_string(e) +
                           ": non-positive Jacobian at a Gauss point");
    }
  }
}

Mesh build_mesh(const GeometrySpec& spec, const std::vector<MaterialLayer>& materials) {
  spec.validate();
  if (materials.size() != spec.layer_thickness_mm.size()) {
    throw ValidationError("materials", "expected one material per layer thickness");
  }
  double depth = 0.0;
  for (std::size_t i = 0; i < materials.size(); ++i) {
    const MaterialLayer& m = materials[i];
    const std::string field = "materials[" + std::to_string(i) + "]";
    if (!(m.elastic_modulus_mpa > 0.0)) {
      throw ValidationError(field + ".elastic_modulus_mpa", "must be > 0");
    }
    if (!(m.poisson_ratio >= 0.0 && m.poisson_ratio < 0.5)) {
      throw ValidationError(field + ".poisson_ratio", "must lie in [0, 0.5)");
    }
    const double tol = 1e-9 * std::max(1.0, spec.depth_mm());
    if (std::abs(m.top_mm - depth) > tol ||
        std::abs(m.thickness_mm() - spec.layer_thickness_mm[i]) > tol) {
      throw ValidationError(field, "depth range does not tile the geometry layers");
    }
    depth = m.bottom_mm;
  }

  const double s = spec.surface_element_mm;
  const double cap = s * spec.coarsening;
  const int cols = static_cast<int>(std::floor(spec.domain_width_mm / s + 1e-9));
  const double width = spec.domain_width_mm / cols;

  // Row interfaces as depths below the surface, with each row's layer.
  std::vector<double> interface_depth = {0.0};
  std::vector<int> row_layer;
  double previous = s;
  for (std::size_t l = 0; l < materials.size(); ++l) {
    const auto heights = grade_layer(spec.layer_thickness_mm[l], previous, spec.growth_ratio, cap);
    for (std::size_t i = 0; i < heights.size(); ++i) {
      interface_depth.push_back(i + 1 == heights.size() ? materials[l].bottom_mm
                                                        : interface_depth.back() + heights[i]);
      row_layer.push_back(static_cast<int>(l));
    }
    previous = heights.back();
  }
  const int rows = static_cast<int>(row_layer.size());
  for (int r = 0; r < rows; ++r) {
    const double h = interface_depth[r + 1] - interface_depth[r];
    if (h > cap * (1.0 + 1e-9)) {
      throw ValidationError("coarsening", "layer " + materials[row_layer[r]].name +
                                              " cannot be graded under the size cap");
    }
  }

  Mesh mesh;
  mesh.materials = materials;
  const int stride = cols + 1;
  mesh.nodes.resize(static_cast<Eigen::Index>(stride) * (rows + 1), 2);
  for (int r = 0; r <= rows; ++r) {
    for (int c = 0; c <= cols; ++c) {
      const int id = r * stride + c;
      mesh.nodes(id, 0) = c == cols ? spec.domain_width_mm : c * width;
      mesh.nodes(id, 1) = -interface_depth[r];
    }
  }
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      const int top_left = r * stride + c;
      const int bottom_left = (r + 1) * stride + c;
      mesh.elements.push_back({bottom_left, bottom_left + 1, top_left + 1, top_left});
      mesh.element_material.push_back(row_layer[r]);
    }
  }
  for (int c = 0; c <= cols; ++c) {
    mesh.surface_nodes.push_back(c);
    mesh.bottom_nodes.push_back(rows * stride + c);
  }
  for (int r = 0; r <= rows; ++r) {
    mesh.left_nodes.push_back(r * stride);
    mesh.right_nodes.push_back(r * stride + cols);
  }

  check_element_jacobians(mesh);
  mesh.afferent_nodes = locate_afferent_nodes(mesh, spec.afferent_depth_mm, spec.centerline());
  return mesh;
}

std::string mesh_to_string(const Mesh& mesh) {
  std::ostringstream out;
  write_mesh(out, mesh);
  return out.str();
}

}  // namespace afferentsim
