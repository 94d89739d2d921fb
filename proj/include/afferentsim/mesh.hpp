#ifndef AFFERENTSIM_MESH_HPP
#define AFFERENTSIM_MESH_HPP

#include <array>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "afferentsim/types.hpp"

namespace afferentsim {

/// One horizontal tissue layer. Depths are measured downwards from the skin
/// surface, so `top_mm < bottom_mm`.
struct MaterialLayer {
  std::string name;
  double elastic_modulus_mpa = 0.0;
  double poisson_ratio = 0.0;
  double top_mm = 0.0;
  double bottom_mm = 0.0;

  double thickness_mm() const { return bottom_mm - top_mm; }
};

/// Elastic constants of the fingertip tissues (stratum corneum, epidermis,
/// dermis, subcutaneous tissue, bone, nail). Depth ranges are left at zero.
std::vector<MaterialLayer> fingertip_material_table();

/// The four soft layers stacked with the default thicknesses
/// (0.2 / 0.5 / 1.5 / 5.8 mm). Bone is the fixed bottom boundary; the nail is
/// not part of the cross-section.
std::vector<MaterialLayer> default_skin_layers();

/// Stacks the named layers from the surface down with the given thicknesses.
std::vector<MaterialLayer> stack_layers(const std::vector<MaterialLayer>& table,
                                        const std::vector<double>& thickness_mm);

struct GeometrySpec {
  double domain_width_mm = 20.0;
  std::vector<double> layer_thickness_mm = {0.2, 0.5, 1.5, 5.8};
  double surface_element_mm = 0.1;
  /// Largest element height as a multiple of the surface element size.
  double coarsening = 4.5;
  /// Target growth ratio between consecutive element rows.
  double growth_ratio = 1.2;
  /// Horizontal position of the indenter centerline; negative means the
  /// middle of the domain.
  double centerline_x_mm = -1.0;
  std::map<AfferentType, double> afferent_depth_mm = {
      {AfferentType::SA, 0.75}, {AfferentType::RA, 0.75}, {AfferentType::PC, 3.0}};

  double depth_mm() const;
  double centerline() const;
  /// Throws ValidationError naming the offending field.
  void validate() const;
};

/// Structured quadrilateral mesh of the layered cross-section. x runs across
/// the finger, y points up with the skin surface at y = 0 and the bone at
/// y = -depth.
struct Mesh {
  Eigen::Matrix<double, Eigen::Dynamic, 2> nodes;
  /// Counterclockwise node ids per element.
  std::vector<std::array<int, 4>> elements;
  std::vector<int> element_material;
  std::vector<MaterialLayer> materials;

  /// Top-boundary node ids ordered by x.
  std::vector<int> surface_nodes;
  std::vector<int> bottom_nodes;
  std::vector<int> left_nodes;
  std::vector<int> right_nodes;
  std::map<AfferentType, int> afferent_nodes;

  int num_nodes() const { return static_cast<int>(nodes.rows()); }
  int num_elements() const { return static_cast<int>(elements.size()); }
  Eigen::Matrix<double, 4, 2> element_coordinates(int element) const;
  Eigen::Vector2d centroid(int element) const;
};

/// Builds a graded mesh: uniform columns of `surface_element_mm`, rows that
/// start at the surface size and grow with depth up to `coarsening` times it,
/// with layer interfaces on row boundaries.
Mesh build_mesh(const GeometrySpec& spec, const std::vector<MaterialLayer>& materials);

/// Node nearest to (centerline_x, -depth) for each afferent type; ties go to
/// the lowest node id.
std::map<AfferentType, int> locate_afferent_nodes(
    const Mesh& mesh, const std::map<AfferentType, double>& depths_mm,
    double centerline_x_mm);

/// Throws NumericalError if any element has a non-positive Jacobian
/// determinant at a 2x2 Gauss point.
void check_element_jacobians(const Mesh& mesh);

/// Plain-text mesh file (`afferentsim-mesh v1`).
void write_mesh(std::ostream& out, const Mesh& mesh);
std::string mesh_to_string(const Mesh& mesh);
Mesh read_mesh(std::istream& in);

}  // namespace afferentsim

#endif  // AFFERENTSIM_MESH_HPP
