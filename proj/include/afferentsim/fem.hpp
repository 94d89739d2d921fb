#ifndef AFFERENTSIM_FEM_HPP
#define AFFERENTSIM_FEM_HPP

#include <cmath>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <tuple>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>

#include "afferentsim/mesh.hpp"
#include "afferentsim/types.hpp"

namespace afferentsim {

/// Plane-strain stress state; tau_yz = tau_zx = 0 and sigma_zz follows from
/// the in-plane normals.
template <typename Scalar>
struct StressTensor2D {
  Scalar xx{0};
  Scalar yy{0};
  Scalar zz{0};
  Scalar xy{0};

  static StressTensor2D plane_strain(Scalar xx, Scalar yy, Scalar xy, Scalar poisson) {
    return {xx, yy, poisson * (xx + yy), xy};
  }

  StressTensor2D operator+(const StressTensor2D& o) const {
    return {xx + o.xx, yy + o.yy, zz + o.zz, xy + o.xy};
  }
  StressTensor2D operator*(Scalar s) const { return {xx * s, yy * s, zz * s, xy * s}; }
};

/// Equivalent (von Mises) stress, same units as the tensor.
template <typename Scalar>
Scalar von_mises(const StressTensor2D<Scalar>& t) {
  using std::sqrt;
  const Scalar a = t.xx - t.yy;
  const Scalar b = t.yy - t.zz;
  const Scalar c = t.zz - t.xx;
  return sqrt(Scalar(0.5) * (a * a + b * b + c * c + Scalar(6) * t.xy * t.xy));
}

using Stress = StressTensor2D<double>;

/// Two displacement DOFs per node: 2n is x, 2n+1 is y.
inline int dof_x(int node) { return 2 * node; }
inline int dof_y(int node) { return 2 * node + 1; }

struct StiffnessSystem {
  Eigen::SparseMatrix<double> matrix;  // N/mm for mm / MPa input
  int num_dofs() const { return static_cast<int>(matrix.rows()); }
};

/// Global stiffness of bilinear quads with 2x2 Gauss quadrature and
/// per-element plane-strain elasticity. Throws NumericalError on an inverted
/// element.
StiffnessSystem assemble_stiffness(const Mesh& mesh);

struct Constraint {
  int dof;
  double value;  // mm
};

/// Prescribed displacements, sorted by dof with no duplicates.
using ConstraintSet = std::vector<Constraint>;

/// Sorts and merges; a later entry for the same dof wins.
ConstraintSet merge_constraints(const ConstraintSet& base, const ConstraintSet& overrides);

/// Solves K u = f with prescribed displacements eliminated. Factorizations
/// are cached by the set of constrained dofs, so repeated solves with the
/// same constrained dofs but different values only back-substitute.
class ConstrainedSolver {
 public:
  explicit ConstrainedSolver(const StiffnessSystem& system);
  ConstrainedSolver(StiffnessSystem&&) = delete;
  ~ConstrainedSolver();
  ConstrainedSolver(ConstrainedSolver&&) noexcept;

  /// `forces` defaults to zero. Throws NumericalError when the reduced
  /// system is singular or the free-dof residual exceeds 1e-8 relative.
  Eigen::VectorXd solve(const ConstraintSet& constraints,
                        const Eigen::VectorXd* forces = nullptr);

  /// Responses to a unit value on each of `unit_dofs` while every other
  /// dof in `constraints` stays at zero. Columns follow `unit_dofs`.
  Eigen::MatrixXd unit_responses(const ConstraintSet& constraints,
                                 const std::vector<int>& unit_dofs);

  std::size_t cached_factorizations() const;

 private:
  struct Factorization;
  const Factorization& factorization(const ConstraintSet& constraints);

  const StiffnessSystem* system_;
  std::map<std::vector<int>, std::unique_ptr<Factorization>> cache_;
};

Eigen::VectorXd solve_step(const StiffnessSystem& system, const ConstraintSet& constraints,
                           const Eigen::VectorXd* forces = nullptr);

/// Nodal stresses in Pa: Gauss-point stresses extrapolated to the element
/// corners, averaged over the elements sharing each node.
std::vector<Stress> recover_stress(const Mesh& mesh, const Eigen::VectorXd& displacements);

/// Recovered stress at a single node, identical to recover_stress()[node].
Stress nodal_stress(const Mesh& mesh, const Eigen::VectorXd& displacements, int node);

/// Fixed bottom (bone) plus horizontal rollers on the lateral sides.
ConstraintSet support_constraints(const Mesh& mesh);

/// Circular indenter tip. Displacements are positive into the skin.
struct IndenterShape {
  double diameter_mm = 1.0;
  double center_x_mm = 10.0;
};

/// Prescribed vertical displacements of the surface nodes the indenter
/// penetrates at depth `depth_mm` below the undeformed surface. Horizontal
/// motion is left free.
ConstraintSet contact_active_set(const Mesh& mesh, const IndenterShape& shape, double depth_mm);

struct IndenterSpec {
  double diameter_mm = 1.0;
  double center_x_mm = 10.0;
  double pre_indentation_mm = 0.0;
  double dt_ms = kDefaultDtMs;
  std::vector<double> displacement_trace_mm;

  IndenterShape shape() const { return {diameter_mm, center_x_mm}; }
  void validate() const;
};

/// von Mises stress history at one sampling node.
struct StressTrace {
  AfferentType afferent = AfferentType::SA;
  int node = -1;
  double dt_ms = kDefaultDtMs;
  Signal values;  // Pa
};

/// Surface deflection (positive downwards) sampled at fixed spacing.
struct DeflectionProfile {
  std::vector<double> x_mm;
  std::vector<double> deflection_mm;
};

struct IndentationResult {
  std::map<AfferentType, StressTrace> traces;
  std::vector<DeflectionProfile> deflections;  // one per step when requested
};

struct IndentationOptions {
  bool record_deflection = false;
  double deflection_spacing_mm = 0.5;
};

/// Quasi-static indentation driver bound to one mesh. For each distinct
/// active set it caches the linear map from the prescribed contact
/// displacements to the sampled quantities, so a time step costs one small
/// matrix-vector product once its active set has been seen. The contact set
/// of each step satisfies the frictionless contact conditions: no node
/// penetrates the tip and no contact node carries a tensile reaction.
class IndentationEngine {
 public:
  explicit IndentationEngine(Mesh mesh, IndentationOptions options = {});
  ~IndentationEngine();

  IndentationResult run(const IndenterSpec& indenter);

  /// Full displacement field for a static indentation depth (direct solve).
  Eigen::VectorXd solve_depth(const IndenterShape& shape, double depth_mm);

  const Mesh& mesh() const { return mesh_; }
  const StiffnessSystem& system() const { return system_; }
  std::size_t cached_active_sets() const { return influence_.size(); }

  /// Surface positions at which deflection is sampled for a centerline.
  std::vector<double> deflection_stations(double center_x_mm) const;

 private:
  struct Influence;
  const Influence& influence(const ConstraintSet& contact, const IndenterShape& shape);
  /// Contact set at equilibrium: starts from the geometric set and
  /// alternates between releasing nodes the indenter would pull on and
  /// adding nodes that penetrate the tip in the deformed state.
  const Influence& resolve_contact(const IndenterShape& shape, double depth_mm,
                                   ConstraintSet& contact);

  Mesh mesh_;
  IndentationOptions options_;
  StiffnessSystem system_;
  ConstraintSet supports_;
  ConstrainedSolver solver_;
  std::map<std::tuple<std::vector<int>, std::int64_t, std::int64_t>, std::unique_ptr<Influence>>
      influence_;
};

IndentationResult run_indentation(const Mesh& mesh, const IndenterSpec& indenter,
                                  IndentationOptions options = {});

/// Surface deflection from a displacement field, linearly interpolated along
/// the surface at the given stations.
DeflectionProfile surface_deflection(const Mesh& mesh, const Eigen::VectorXd& displacements,
                                     const std::vector<double>& stations_mm);

}  // namespace afferentsim

#endif  // AFFERENTSIM_FEM_HPP
