#include <algorithm>
#include <cmath>
#include <set>

#include "afferentsim/fem.hpp"

namespace afferentsim {

void IndenterSpec::validate() const {
  if (!(diameter_mm > 0.0)) throw ValidationError("indenter.diameter_mm", "must be > 0");
  if (!(dt_ms > 0.0)) throw ValidationError("indenter.dt_ms", "must be > 0");
  if (displacement_trace_mm.empty()) {
    throw ValidationError("indenter.displacement_trace_mm", "must not be empty");
  }
  if (!std::isfinite(pre_indentation_mm)) {
    throw ValidationError("indenter.pre_indentation_mm", "must be finite");
  }
  for (double v : displacement_trace_mm) {
    if (!std::isfinite(v)) {
      throw ValidationError("indenter.displacement_trace_mm", "non-finite sample");
    }
  }
}

struct IndentationEngine::Influence {
  // Rows: 4 stress components (Pa) per afferent node, then deflection
  // stations (mm). Columns: contact dofs in ConstraintSet order.
  Eigen::MatrixXd map;
  // Vertical reaction at each contact dof.
  Eigen::MatrixXd reaction;
  // Vertical displacement of every surface node under the tip footprint.
  std::vector<int> candidates;
  Eigen::MatrixXd candidate_uy;
};

namespace {

double tip_height(const IndenterShape& shape, double surface_y, double depth_mm, double x) {
  const double r = 0.5 * shape.diameter_mm;
  const double dx = x - shape.center_x_mm;
  return surface_y - depth_mm + r - std::sqrt(std::max(0.0, r * r - dx * dx));
}

}  // namespace

IndentationEngine::IndentationEngine(Mesh mesh, IndentationOptions options)
    : mesh_(std::move(mesh)),
      options_(options),
      system_(assemble_stiffness(mesh_)),
      supports_(support_constraints(mesh_)),
      solver_(system_) {}

IndentationEngine::~IndentationEngine() = default;

std::vector<double> IndentationEngine::deflection_stations(double center_x_mm) const {
  const double lo = mesh_.nodes(mesh_.surface_nodes.front(), 0);
  const double hi = mesh_.nodes(mesh_.surface_nodes.back(), 0);
  const double step = options_.deflection_spacing_mm;
  const long first = static_cast<long>(std::ceil((lo - center_x_mm) / step - 1e-9));
  const long last = static_cast<long>(std::floor((hi - center_x_mm) / step + 1e-9));
  std::vector<double> x;
  for (long k = first; k <= last; ++k) x.push_back(center_x_mm + k * step);
  return x;
}

const IndentationEngine::Influence& IndentationEngine::influence(const ConstraintSet& contact,
                                                                 const IndenterShape& shape) {
  std::vector<int> dofs;
  for (const Constraint& c : contact) dofs.push_back(c.dof);
  auto key = std::make_tuple(dofs, std::llround(shape.center_x_mm * 1e9),
                             std::llround(shape.diameter_mm * 1e9));
  const auto found = influence_.find(key);
  if (found != influence_.end()) return *found->second;

  const Eigen::MatrixXd unit =
      solver_.unit_responses(merge_constraints(supports_, contact), dofs);
  const auto stations = options_.record_deflection ? deflection_stations(shape.center_x_mm)
                                                   : std::vector<double>{};
  const int stress_rows = 4 * static_cast<int>(mesh_.afferent_nodes.size());
  auto inf = std::make_unique<Influence>();
  const double r = 0.5 * shape.diameter_mm;
  for (int n : mesh_.surface_nodes) {
    if (std::abs(mesh_.nodes(n, 0) - shape.center_x_mm) <= r) inf->candidates.push_back(n);
  }
  inf->map.resize(stress_rows + static_cast<int>(stations.size()), unit.cols());
  inf->reaction.resize(unit.cols(), unit.cols());
  inf->candidate_uy.resize(static_cast<int>(inf->candidates.size()), unit.cols());
  for (int j = 0; j < unit.cols(); ++j) {
    const Eigen::VectorXd u = unit.col(j);
    int row = 0;
    for (const auto& [type, node] : mesh_.afferent_nodes) {
      const Stress s = nodal_stress(mesh_, u, node);
      inf->map(row++, j) = s.xx;
      inf->map(row++, j) = s.yy;
      inf->map(row++, j) = s.zz;
      inf->map(row++, j) = s.xy;
    }
    if (!stations.empty()) {
      const DeflectionProfile p = surface_deflection(mesh_, u, stations);
      for (std::size_t i = 0; i < stations.size(); ++i) inf->map(row++, j) = p.deflection_mm[i];
    }
    for (int i = 0; i < unit.cols(); ++i) {
      inf->reaction(i, j) = system_.matrix.col(dofs[i]).dot(u);
    }
    for (std::size_t i = 0; i < inf->candidates.size(); ++i) {
      inf->candidate_uy(static_cast<int>(i), j) = u(dof_y(inf->candidates[i]));
    }
  }
  auto [it, inserted] = influence_.emplace(std::move(key), std::move(inf));
  return *it->second;
}

const IndentationEngine::Influence& IndentationEngine::resolve_contact(const IndenterShape& shape,
                                                                       double depth_mm,
                                                                       ConstraintSet& contact) {
  const double surface_y = mesh_.nodes(mesh_.surface_nodes.front(), 1);
  contact = contact_active_set(mesh_, shape, depth_mm);
  std::set<std::vector<int>> visited;
  for (int iteration = 0; iteration < 100; ++iteration) {
    const Influence& inf = influence(contact, shape);
    if (contact.empty()) return inf;
    Eigen::VectorXd prescribed(contact.size());
    for (std::size_t i = 0; i < contact.size(); ++i) prescribed(i) = contact[i].value;
    const Eigen::VectorXd reaction = inf.reaction * prescribed;
    const Eigen::VectorXd uy = inf.candidate_uy * prescribed;
    const double force_tol = 1e-10 * std::max(1e-300, reaction.cwiseAbs().maxCoeff());
    const double gap_tol = 1e-12 * std::max(1.0, std::abs(depth_mm));

    std::vector<int> active;
    for (std::size_t i = 0; i < contact.size(); ++i) {
      // Keep nodes the indenter pushes on; a positive reaction would pull.
      if (reaction(static_cast<Eigen::Index>(i)) <= force_tol) active.push_back(contact[i].dof / 2);
    }
    for (std::size_t i = 0; i < inf.candidates.size(); ++i) {
      const int n = inf.candidates[i];
      const bool in_set = std::any_of(contact.begin(), contact.end(),
                                      [&](const Constraint& c) { return c.dof == dof_y(n); });
      if (in_set) continue;
      const double tip = tip_height(shape, surface_y, depth_mm, mesh_.nodes(n, 0));
      if (mesh_.nodes(n, 1) + uy(static_cast<Eigen::Index>(i)) > tip + gap_tol) {
        active.push_back(n);
      }
    }
    std::sort(active.begin(), active.end());
    ConstraintSet next;
    for (int n : active) {
      next.push_back(
          {dof_y(n), tip_height(shape, surface_y, depth_mm, mesh_.nodes(n, 0)) - mesh_.nodes(n, 1)});
    }
    const bool same = next.size() == contact.size() &&
                      std::equal(next.begin(), next.end(), contact.begin(),
                                 [](const Constraint& a, const Constraint& b) { return a.dof == b.dof; });
    if (same) return inf;
    std::vector<int> dofs;
    for (const Constraint& c : contact) dofs.push_back(c.dof);
    visited.insert(dofs);
    std::vector<int> next_dofs;
    for (const Constraint& c : next) next_dofs.push_back(c.dof);
    if (visited.count(next_dofs)) {
      throw NumericalError("contact active set cycles at depth " + std::to_string(depth_mm) +
                           " mm");
    }
    contact = std::move(next);
  }
  throw NumericalError("contact active set did not converge at depth " +
                       std::to_string(depth_mm) + " mm");
}

IndentationResult IndentationEngine::run(const IndenterSpec& indenter) {
  indenter.validate();
  const auto steps = static_cast<Eigen::Index>(indenter.displacement_trace_mm.size());
  const IndenterShape shape = indenter.shape();

  IndentationResult result;
  for (const auto& [type, node] : mesh_.afferent_nodes) {
    result.traces[type] = StressTrace{type, node, indenter.dt_ms, Signal::Zero(steps)};
  }
  const auto stations = options_.record_deflection ? deflection_stations(shape.center_x_mm)
                                                   : std::vector<double>{};

  for (Eigen::Index k = 0; k < steps; ++k) {
    const double depth = indenter.pre_indentation_mm + indenter.displacement_trace_mm[k];
    Eigen::VectorXd sampled = Eigen::VectorXd::Zero(
        4 * static_cast<int>(mesh_.afferent_nodes.size()) + static_cast<int>(stations.size()));
    try {
      ConstraintSet contact;
      const Influence& inf = resolve_contact(shape, depth, contact);
      if (!contact.empty()) {
        Eigen::VectorXd prescribed(contact.size());
        for (std::size_t i = 0; i < contact.size(); ++i) prescribed(i) = contact[i].value;
        sampled = inf.map * prescribed;
      }
    } catch (const NumericalError& e) {
      throw NumericalError("step " + std::to_string(k) + ": " + e.what());
    }
    int row = 0;
    for (auto& [type, trace] : result.traces) {
      const Stress s{sampled(row), sampled(row + 1), sampled(row + 2), sampled(row + 3)};
      trace.values(k) = von_mises(s);
      row += 4;
    }
    if (options_.record_deflection) {
      DeflectionProfile p;
      p.x_mm = stations;
      p.deflection_mm.resize(stations.size());
      for (std::size_t i = 0; i < stations.size(); ++i) p.deflection_mm[i] = 0.0 + sampled(row++);
      result.deflections.push_back(std::move(p));
    }
  }
  return result;
}

Eigen::VectorXd IndentationEngine::solve_depth(const IndenterShape& shape, double depth_mm) {
  ConstraintSet contact;
  resolve_contact(shape, depth_mm, contact);
  return solver_.solve(merge_constraints(supports_, contact));
}

IndentationResult run_indentation(const Mesh& mesh, const IndenterSpec& indenter,
                                  IndentationOptions options) {
  IndentationEngine engine(mesh, options);
  return engine.run(indenter);
}

}  // namespace afferentsim
