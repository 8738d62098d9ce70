#include "shellhom/macro.hpp"

#include <Eigen/Geometry>

#include <algorithm>
#include <cmath>
#include <string>

#include "shellhom/errors.hpp"

namespace shellhom {

int RepresentativeLattice::size() const {
  int n = 1;
  for (int k = 0; k < 2; ++k)
    if (axes[k] >= 0) n *= static_cast<int>(grid[k].size());
  return n;
}

std::vector<Vec3> RepresentativeLattice::points() const {
  std::vector<Vec3> pts;
  const int n0 = axes[0] >= 0 ? static_cast<int>(grid[0].size()) : 1;
  const int n1 = axes[1] >= 0 ? static_cast<int>(grid[1].size()) : 1;
  for (int a = 0; a < n0; ++a)
    for (int b = 0; b < n1; ++b) {
      Vec3 p = base;
      if (axes[0] >= 0) p[axes[0]] = grid[0][a];
      if (axes[1] >= 0) p[axes[1]] = grid[1][b];
      pts.push_back(p);
    }
  return pts;
}

namespace {

// clamped piecewise-linear location: segment index and fraction
std::pair<int, double> locate(const std::vector<double>& g, double x) {
  const int n = static_cast<int>(g.size());
  if (n == 1 || x <= g.front()) return {0, 0.0};
  if (x >= g.back()) return {n - 2, 1.0};
  int l = 0;
  while (l + 2 < n && x >= g[l + 1]) ++l;
  return {l, (x - g[l]) / (g[l + 1] - g[l])};
}

}  // namespace

int RepresentativeLattice::nearest(const Vec3& alpha) const {
  int idx[4];
  double w[4];
  const int n = weights(alpha, idx, w);
  int best = idx[0];
  double bw = w[0];
  for (int k = 1; k < n; ++k)
    if (w[k] > bw) {
      bw = w[k];
      best = idx[k];
    }
  return best;
}

int RepresentativeLattice::weights(const Vec3& alpha, int idx[4],
                                   double w[4]) const {
  int seg[2] = {0, 0};
  double frac[2] = {0.0, 0.0};
  int nvals[2] = {1, 1};
  for (int k = 0; k < 2; ++k) {
    if (axes[k] < 0) continue;
    if (grid[k].empty()) throw ConfigError("representative lattice is empty");
    nvals[k] = static_cast<int>(grid[k].size());
    const auto [s, f] = locate(grid[k], alpha[axes[k]]);
    seg[k] = s;
    frac[k] = f;
  }
  const int stride = nvals[1];
  int n = 0;
  for (int da = 0; da < 2; ++da) {
    const double wa =
        (axes[0] < 0 || nvals[0] == 1) ? (da ? 0.0 : 1.0)
                                       : (da ? frac[0] : 1.0 - frac[0]);
    if (wa == 0.0) continue;
    for (int db = 0; db < 2; ++db) {
      const double wb =
          (axes[1] < 0 || nvals[1] == 1) ? (db ? 0.0 : 1.0)
                                         : (db ? frac[1] : 1.0 - frac[1]);
      if (wb == 0.0) continue;
      const int ia = std::min(seg[0] + da, nvals[0] - 1);
      const int ib = std::min(seg[1] + db, nvals[1] - 1);
      idx[n] = ia * stride + ib;
      w[n] = wa * wb;
      ++n;
    }
  }
  return n;
}

RepresentativeLattice select_representative_points(const LameModel& model,
                                                   const TetMesh& macro_mesh,
                                                   int count_per_axis) {
  if (count_per_axis < 1)
    throw ConfigError("representative count must be >= 1");
  if (macro_mesh.n_nodes() == 0) throw ConfigError("macro mesh is empty");
  Vec3 lo = macro_mesh.nodes[0], hi = macro_mesh.nodes[0];
  for (const auto& p : macro_mesh.nodes) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  RepresentativeLattice lat;
  lat.base = 0.5 * (lo + hi);
  std::vector<int> varying;
  if (std::holds_alternative<CylindricalMetric>(model)) {
    varying = {2};
  } else if (!is_plate(model)) {
    // doubly curved and custom metrics sample both in-surface curvature
    // coordinates
    varying = {0, 2};
  }
  auto linspace = [&](int ax) {
    std::vector<double> g(count_per_axis);
    for (int k = 0; k < count_per_axis; ++k)
      g[k] = count_per_axis == 1
                 ? 0.5 * (lo[ax] + hi[ax])
                 : lo[ax] + (hi[ax] - lo[ax]) * k / (count_per_axis - 1.0);
    return g;
  };
  for (size_t k = 0; k < varying.size(); ++k) {
    lat.axes[k] = varying[k];
    lat.grid[k] = linspace(varying[k]);
  }
  return lat;
}

void RepresentativeSet::validate() const {
  if (cells.empty()) throw ConfigError("representative set has no entries");
  if (static_cast<int>(cells.size()) != lattice.size())
    throw ConfigError("representative set has " +
                      std::to_string(cells.size()) + " entries, lattice has " +
                      std::to_string(lattice.size()) + " points");
  const auto pts = lattice.points();
  for (size_t k = 0; k < cells.size(); ++k)
    if ((cells[k].alpha_I - pts[k]).norm() > 1e-9)
      throw ConfigError("representative entry " + std::to_string(k) +
                        " is not at its lattice point");
}

ElasticTensor RepresentativeSet::effective_tensor(const Vec3& alpha) const {
  validate();
  int idx[4];
  double w[4];
  const int n = lattice.weights(alpha, idx, w);
  ElasticTensor out;
  for (int k = 0; k < n; ++k)
    for (int p = 0; p < 6; ++p)
      for (int q = 0; q < 6; ++q)
        out(p, q) += w[k] * cells[idx[k]].C_hat(p, q);
  return out;
}

const CellSolutionSet& RepresentativeSet::nearest_cell(
    const Vec3& alpha) const {
  validate();
  return cells[lattice.nearest(alpha)];
}

std::vector<double> macro_load(const TetMesh& mesh, const LameModel& model,
                               const MacroProblem& problem) {
  if (!problem.element_force.empty() &&
      problem.element_force.size() != static_cast<size_t>(mesh.n_tets()))
    throw ConfigError("per-element force table does not match the mesh");
  std::vector<double> load(3 * mesh.n_nodes(), 0.0);

  // body force: int f v H dOmega with centroid H
  for (int e = 0; e < mesh.n_tets(); ++e) {
    const Vec3 f = problem.element_force.empty() ? problem.body_force
                                                 : problem.element_force[e];
    if (f == Vec3::Zero()) continue;
    const MetricSample m = lame_eval(model, mesh.tet_centroid(e));
    const double q = 0.25 * mesh.tet_volume(e) * m.Hprod;
    for (int a = 0; a < 4; ++a)
      for (int c = 0; c < 3; ++c) load[3 * mesh.tets[e][a] + c] += q * f[c];
  }

  // tractions: int sigma v (H/H_n) ds over tagged faces; the face with
  // constant alpha_n has physical area element (H/H_n) d(alpha) since the
  // H_n stretch acts normal to it
  for (const auto& ft : mesh.face_tags) {
    const FaceCondition& fc = problem.faces[ft.tag];
    if (fc.kind != FaceCondition::Traction) continue;
    const Vec3& p0 = mesh.nodes[ft.nodes[0]];
    const Vec3& p1 = mesh.nodes[ft.nodes[1]];
    const Vec3& p2 = mesh.nodes[ft.nodes[2]];
    const double area = 0.5 * (p1 - p0).cross(p2 - p0).norm();
    const Vec3 centroid = (p0 + p1 + p2) / 3.0;
    const MetricSample m = lame_eval(model, centroid);
    const double hface = m.Hprod / m.H[ft.tag / 2];
    const double q = area * hface / 3.0;
    for (int v : ft.nodes)
      for (int c = 0; c < 3; ++c) load[3 * v + c] += q * fc.value[c];
  }
  return load;
}

Constraints boundary_constraints(const TetMesh& mesh,
                                 const MacroProblem& problem) {
  Constraints bc;
  for (const auto& ft : mesh.face_tags) {
    const FaceCondition& fc = problem.faces[ft.tag];
    if (fc.kind != FaceCondition::Dirichlet) continue;
    for (int v : ft.nodes)
      for (int c = 0; c < 3; ++c) {
        if (!fc.fix[c]) continue;
        bc.dirichlet.push_back({v, c, fc.value[c]});
      }
  }
  return bc;
}

MacroSolution solve_homogenized(const TetMesh& mesh,
                                const RepresentativeSet& reps,
                                const LameModel& model,
                                const MacroProblem& problem,
                                const SolveOptions& opts) {
  reps.validate();
  Constraints bc = boundary_constraints(mesh, problem);
  if (bc.dirichlet.empty())
    throw ConfigError(
        "macro boundary conditions do not constrain any displacement; rigid "
        "motions are unconstrained");
  // corner nodes shared by faces with conflicting values fail in make_dof_map
  const DofMap dm = make_dof_map(mesh, bc);

  // interpolated tensor per element; constant lattices collapse to one entry
  std::vector<ElasticTensor> C_elem;
  if (reps.cells.size() == 1) {
    C_elem.push_back(reps.cells[0].C_hat);
  } else {
    C_elem.reserve(mesh.n_tets());
    for (int e = 0; e < mesh.n_tets(); ++e)
      C_elem.push_back(reps.effective_tensor(mesh.tet_centroid(e)));
  }
  const AssembledSystem sys = assemble_stiffness(
      mesh,
      [&](int e) -> const ElasticTensor& {
        return C_elem[C_elem.size() == 1 ? 0 : e];
      },
      model, StrainMode::Macro, Vec3::Zero(), dm, true);

  const std::vector<double> load = macro_load(mesh, model, problem);
  MacroSolution sol;
  sol.u0 = solve_displacement(sys, reduce_load(dm, load), mesh, dm, bc, opts,
                              &sol.stats);
  sol.e0star = macro_strain_e0star(mesh, sol.u0, model);
  macro_strain_gradient(mesh, model, sol.e0star, sol.grad_e0star,
                        sol.gradient_boundary);
  return sol;
}

std::vector<Strain6> macro_strain_e0star(const TetMesh& mesh,
                                         const NodalField& u0,
                                         const LameModel& model) {
  return element_strain(mesh, u0, model, StrainMode::Macro);
}

void macro_strain_gradient(const TetMesh& mesh, const LameModel& model,
                           const std::vector<Strain6>& e0star,
                           std::vector<std::array<Strain6, 3>>& grad,
                           std::vector<char>& boundary_flag) {
  const int nn = mesh.n_nodes();
  const int ne = mesh.n_tets();
  if (e0star.size() != static_cast<size_t>(ne))
    throw ConfigError("strain field does not match the mesh");

  // volume-weighted nodal average of the element values
  std::vector<std::array<double, 6>> nodal(nn, {0, 0, 0, 0, 0, 0});
  std::vector<double> wsum(nn, 0.0);
  for (int e = 0; e < ne; ++e) {
    const double v = mesh.tet_volume(e);
    for (int a = 0; a < 4; ++a) {
      wsum[mesh.tets[e][a]] += v;
      for (int q = 0; q < 6; ++q)
        nodal[mesh.tets[e][a]][q] += v * e0star[e][q];
    }
  }
  for (int v = 0; v < nn; ++v)
    for (int q = 0; q < 6; ++q) nodal[v][q] /= wsum[v];

  std::vector<char> on_boundary(nn, 0);
  for (const auto& ft : mesh.face_tags)
    for (int v : ft.nodes) on_boundary[v] = 1;

  grad.assign(ne, {});
  boundary_flag.assign(ne, 0);
  for (int e = 0; e < ne; ++e) {
    const ElementGeometry geo = element_geometry(mesh, e);
    const MetricSample m = lame_eval(model, mesh.tet_centroid(e));
    const auto& t = mesh.tets[e];
    for (int a = 0; a < 4; ++a)
      if (on_boundary[t[a]]) boundary_flag[e] = 1;
    for (int q = 0; q < 6; ++q) {
      Vec3 g = Vec3::Zero();
      for (int a = 0; a < 4; ++a) g += nodal[t[a]][q] * geo.grad[a];
      for (int j = 0; j < 3; ++j) grad[e][j][q] = g[j] / m.H[j];
    }
  }
}

}  // namespace shellhom
