#include "afferentsim/fem.hpp"

#include <algorithm>
#include <sstream>

#include "afferentsim/quad4.hpp"

namespace afferentsim {

namespace {

constexpr double kMpaToPa = 1e6;

Eigen::Matrix<double, 8, 1> element_displacements(const Mesh& mesh, const Eigen::VectorXd& u,
                                                  int element) {
  Eigen::Matrix<double, 8, 1> ue;
  for (int a = 0; a < 4; ++a) {
    const int n = mesh.elements[element][a];
    ue(2 * a) = u(dof_x(n));
    ue(2 * a + 1) = u(dof_y(n));
  }
  return ue;
}

// Stress at the four corners of one element, MPa.
std::array<Stress, 4> element_corner_stress(const Mesh& mesh, const Eigen::VectorXd& u,
                                            int element) {
  const MaterialLayer& mat = mesh.materials[mesh.element_material[element]];
  const Eigen::Matrix3d d =
      quad4::plane_strain_elasticity<double>(mat.elastic_modulus_mpa, mat.poisson_ratio);
  const auto xy = mesh.element_coordinates(element);
  const auto ue = element_displacements(mesh, u, element);
  const auto gp = quad4::gauss_points<double>();

  Eigen::Matrix<double, 4, 3> gauss_stress;
  for (int g = 0; g < 4; ++g) {
    double det_j;
    const auto b = quad4::strain_displacement<double>(xy, gp(g, 0), gp(g, 1), det_j);
    gauss_stress.row(g) = (d * (b * ue)).transpose();
  }
  static const Eigen::Matrix4d extrapolate = quad4::gauss_to_corner_extrapolation<double>();
  const Eigen::Matrix<double, 4, 3> corner = extrapolate * gauss_stress;

  std::array<Stress, 4> out;
  for (int a = 0; a < 4; ++a) {
    out[a] = Stress::plane_strain(corner(a, 0), corner(a, 1), corner(a, 2), mat.poisson_ratio);
  }
  return out;
}

}  // namespace

StiffnessSystem assemble_stiffness(const Mesh& mesh) {
  const int ndof = 2 * mesh.num_nodes();
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(static_cast<std::size_t>(mesh.num_elements()) * 64);
  quad4::ElementMatrix<double> ke;
  for (int e = 0; e < mesh.num_elements(); ++e) {
    const MaterialLayer& mat = mesh.materials[mesh.element_material[e]];
    const Eigen::Matrix3d d =
        quad4::plane_strain_elasticity<double>(mat.elastic_modulus_mpa, mat.poisson_ratio);
    if (!quad4::element_stiffness<double>(mesh.element_coordinates(e), d, ke)) {
      throw NumericalError("singular element " + std::to_string(e) +
                           ": non-positive Jacobian determinant");
    }
    int dofs[8];
    for (int a = 0; a < 4; ++a) {
      dofs[2 * a] = dof_x(mesh.elements[e][a]);
      dofs[2 * a + 1] = dof_y(mesh.elements[e][a]);
    }
    for (int i = 0; i < 8; ++i) {
      for (int j = 0; j < 8; ++j) triplets.emplace_back(dofs[i], dofs[j], ke(i, j));
    }
  }
  StiffnessSystem system;
  system.matrix.resize(ndof, ndof);
  system.matrix.setFromTriplets(triplets.begin(), triplets.end());
  return system;
}

ConstraintSet merge_constraints(const ConstraintSet& base, const ConstraintSet& overrides) {
  std::map<int, double> merged;
  for (const Constraint& c : base) merged[c.dof] = c.value;
  for (const Constraint& c : overrides) merged[c.dof] = c.value;
  ConstraintSet out;
  out.reserve(merged.size());
  for (const auto& [dof, value] : merged) out.push_back({dof, value});
  return out;
}

struct ConstrainedSolver::Factorization {
  std::vector<int> free_dofs;
  std::vector<int> fixed_dofs;
  Eigen::SparseMatrix<double> k_ff;
  Eigen::SparseMatrix<double> k_fc;
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt;
};

ConstrainedSolver::ConstrainedSolver(const StiffnessSystem& system) : system_(&system) {}
ConstrainedSolver::~ConstrainedSolver() = default;
ConstrainedSolver::ConstrainedSolver(ConstrainedSolver&&) noexcept = default;

std::size_t ConstrainedSolver::cached_factorizations() const { return cache_.size(); }

const ConstrainedSolver::Factorization& ConstrainedSolver::factorization(
    const ConstraintSet& constraints) {
  std::vector<int> fixed;
  fixed.reserve(constraints.size());
  for (const Constraint& c : constraints) fixed.push_back(c.dof);
  if (!std::is_sorted(fixed.begin(), fixed.end()) ||
      std::adjacent_find(fixed.begin(), fixed.end()) != fixed.end()) {
    throw ValidationError("constraints", "must be sorted by dof without duplicates");
  }
  const auto found = cache_.find(fixed);
  if (found != cache_.end()) return *found->second;

  const int ndof = system_->num_dofs();
  auto fac = std::make_unique<Factorization>();
  std::vector<int> index(ndof, -1);  // free index, or -(fixed index) - 2
  for (std::size_t i = 0; i < fixed.size(); ++i) {
    if (fixed[i] < 0 || fixed[i] >= ndof) {
      throw ValidationError("constraints", "dof " + std::to_string(fixed[i]) + " out of range");
    }
    index[fixed[i]] = -static_cast<int>(i) - 2;
  }
  for (int d = 0; d < ndof; ++d) {
    if (index[d] == -1) {
      index[d] = static_cast<int>(fac->free_dofs.size());
      fac->free_dofs.push_back(d);
    }
  }
  fac->fixed_dofs = fixed;

  const int nf = static_cast<int>(fac->free_dofs.size());
  const int nc = static_cast<int>(fixed.size());
  std::vector<Eigen::Triplet<double>> ff;
  std::vector<Eigen::Triplet<double>> fc;
  ff.reserve(system_->matrix.nonZeros());
  const auto& k = system_->matrix;
  for (int col = 0; col < k.outerSize(); ++col) {
    for (Eigen::SparseMatrix<double>::InnerIterator it(k, col); it; ++it) {
      const int r = index[it.row()];
      const int c = index[it.col()];
      if (r < 0) continue;
      if (c >= 0) {
        ff.emplace_back(r, c, it.value());
      } else {
        fc.emplace_back(r, -c - 2, it.value());
      }
    }
  }
  fac->k_ff.resize(nf, nf);
  fac->k_ff.setFromTriplets(ff.begin(), ff.end());
  fac->k_fc.resize(nf, nc);
  fac->k_fc.setFromTriplets(fc.begin(), fc.end());

  if (nf > 0) {
    fac->ldlt.compute(fac->k_ff);
    bool singular = fac->ldlt.info() != Eigen::Success;
    if (!singular) {
      const Eigen::VectorXd pivots = fac->ldlt.vectorD();
      const double scale = pivots.cwiseAbs().maxCoeff();
      singular = !(pivots.minCoeff() > 1e-12 * scale);
    }
    if (singular) {
      std::ostringstream msg;
      msg << "singular reduced stiffness with " << nc << " constrained dofs {";
      for (int i = 0; i < std::min(nc, 12); ++i) msg << (i ? "," : "") << fixed[i];
      if (nc > 12) msg << ",...";
      msg << "}; rigid-body modes not removed";
      throw NumericalError(msg.str());
    }
  }
  auto [it, inserted] = cache_.emplace(std::move(fixed), std::move(fac));
  return *it->second;
}

Eigen::VectorXd ConstrainedSolver::solve(const ConstraintSet& constraints,
                                         const Eigen::VectorXd* forces) {
  const Factorization& fac = factorization(constraints);
  const int ndof = system_->num_dofs();
  if (forces && forces->size() != ndof) {
    throw ValidationError("forces", "size does not match the number of dofs");
  }
  Eigen::VectorXd prescribed(constraints.size());
  for (std::size_t i = 0; i < constraints.size(); ++i) prescribed(i) = constraints[i].value;

  Eigen::VectorXd rhs = -(fac.k_fc * prescribed);
  if (forces) {
    for (std::size_t i = 0; i < fac.free_dofs.size(); ++i) rhs(i) += (*forces)(fac.free_dofs[i]);
  }
  Eigen::VectorXd u = Eigen::VectorXd::Zero(ndof);
  for (std::size_t i = 0; i < constraints.size(); ++i) u(constraints[i].dof) = prescribed(i);
  if (fac.free_dofs.empty()) return u;

  const Eigen::VectorXd free = fac.ldlt.solve(rhs);
  const double rhs_norm = rhs.norm();
  if (rhs_norm > 0.0) {
    const double residual = (fac.k_ff * free - rhs).norm() / rhs_norm;
    if (!(residual <= 1e-8)) {
      throw NumericalError("solve did not converge: relative residual " +
                           std::to_string(residual));
    }
  }
  for (std::size_t i = 0; i < fac.free_dofs.size(); ++i) u(fac.free_dofs[i]) = free(i);
  return u;
}

Eigen::MatrixXd ConstrainedSolver::unit_responses(const ConstraintSet& constraints,
                                                  const std::vector<int>& unit_dofs) {
  const Factorization& fac = factorization(constraints);
  const int ndof = system_->num_dofs();
  const int m = static_cast<int>(unit_dofs.size());
  Eigen::MatrixXd rhs(fac.free_dofs.size(), m);
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(ndof, m);
  for (int j = 0; j < m; ++j) {
    const auto pos = std::lower_bound(fac.fixed_dofs.begin(), fac.fixed_dofs.end(), unit_dofs[j]);
    if (pos == fac.fixed_dofs.end() || *pos != unit_dofs[j]) {
      throw ValidationError("unit_dofs", "dof " + std::to_string(unit_dofs[j]) +
                                             " is not constrained");
    }
    rhs.col(j) = -fac.k_fc.col(static_cast<int>(pos - fac.fixed_dofs.begin()));
    out(unit_dofs[j], j) = 1.0;
  }
  if (fac.free_dofs.empty()) return out;
  const Eigen::MatrixXd free = fac.ldlt.solve(rhs);
  for (std::size_t i = 0; i < fac.free_dofs.size(); ++i) out.row(fac.free_dofs[i]) = free.row(i);
  return out;
}

Eigen::VectorXd solve_step(const StiffnessSystem& system, const ConstraintSet& constraints,
                           const Eigen::VectorXd* forces) {
  ConstrainedSolver solver(system);
  return solver.solve(constraints, forces);
}

std::vector<Stress> recover_stress(const Mesh& mesh, const Eigen::VectorXd& displacements) {
  std::vector<Stress> sum(mesh.num_nodes());
  std::vector<int> count(mesh.num_nodes(), 0);
  for (int e = 0; e < mesh.num_elements(); ++e) {
    const auto corner = element_corner_stress(mesh, displacements, e);
    for (int a = 0; a < 4; ++a) {
      const int n = mesh.elements[e][a];
      sum[n] = sum[n] + corner[a];
      ++count[n];
    }
  }
  for (int n = 0; n < mesh.num_nodes(); ++n) {
    if (count[n] > 0) sum[n] = sum[n] * (kMpaToPa / count[n]);
  }
  return sum;
}

Stress nodal_stress(const Mesh& mesh, const Eigen::VectorXd& displacements, int node) {
  Stress sum;
  int count = 0;
  for (int e = 0; e < mesh.num_elements(); ++e) {
    for (int a = 0; a < 4; ++a) {
      if (mesh.elements[e][a] != node) continue;
      sum = sum + element_corner_stress(mesh, displacements, e)[a];
      ++count;
    }
  }
  return count > 0 ? sum * (kMpaToPa / count) : sum;
}

ConstraintSet support_constraints(const Mesh& mesh) {
  ConstraintSet c;
  for (int n : mesh.left_nodes) c.push_back({dof_x(n), 0.0});
  for (int n : mesh.right_nodes) c.push_back({dof_x(n), 0.0});
  for (int n : mesh.bottom_nodes) {
    c.push_back({dof_x(n), 0.0});
    c.push_back({dof_y(n), 0.0});
  }
  return merge_constraints(c, {});
}

ConstraintSet contact_active_set(const Mesh& mesh, const IndenterShape& shape, double depth_mm) {
  const double r = 0.5 * shape.diameter_mm;
  const double surface_y = mesh.nodes(mesh.surface_nodes.front(), 1);
  ConstraintSet c;
  for (int n : mesh.surface_nodes) {
    const double dx = mesh.nodes(n, 0) - shape.center_x_mm;
    if (std::abs(dx) > r) continue;
    const double tip = surface_y - depth_mm + r - std::sqrt(r * r - dx * dx);
    const double gap = tip - mesh.nodes(n, 1);
    if (gap <= 0.0) c.push_back({dof_y(n), gap});
  }
  std::sort(c.begin(), c.end(), [](const Constraint& a, const Constraint& b) {
    return a.dof < b.dof;
  });
  return c;
}

DeflectionProfile surface_deflection(const Mesh& mesh, const Eigen::VectorXd& displacements,
                                     const std::vector<double>& stations_mm) {
  DeflectionProfile p;
  const auto& s = mesh.surface_nodes;
  for (double x : stations_mm) {
    auto it = std::lower_bound(s.begin(), s.end(), x,
                               [&](int n, double v) { return mesh.nodes(n, 0) < v; });
    double value;
    if (it == s.begin()) {
      value = displacements(dof_y(s.front()));
    } else if (it == s.end()) {
      value = displacements(dof_y(s.back()));
    } else {
      const int right = *it;
      const int left = *(it - 1);
      const double x0 = mesh.nodes(left, 0);
      const double x1 = mesh.nodes(right, 0);
      const double t = x1 > x0 ? (x - x0) / (x1 - x0) : 0.0;
      value = (1.0 - t) * displacements(dof_y(left)) + t * displacements(dof_y(right));
    }
    p.x_mm.push_back(x);
    p.deflection_mm.push_back(0.0 - value);
  }
  return p;
}

}  // namespace afferentsim
