#include "shellhom/twoscale.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <set>
#include <thread>

#include "shellhom/errors.hpp"
#include "shellhom/fem.hpp"

namespace shellhom {

Vec3 map_to_cell(const Vec3& alpha, double epsilon) {
  if (!(epsilon > 0.0)) throw ConfigError("scale parameter must be positive");
  Vec3 beta;
  for (int i = 0; i < 3; ++i) {
    const double x = alpha[i] / epsilon;
    double b = x - std::floor(x);
    if (b >= 1.0) b = 0.0;  // frac can round up to 1 just below an integer
    beta[i] = b;
  }
  return beta;
}

MeshInterpolant::MeshInterpolant(const TetMesh& mesh) : mesh_(mesh) {
  if (mesh.n_tets() == 0) throw ConfigError("interpolation mesh is empty");
  lo_ = hi_ = mesh.nodes[0];
  for (const auto& p : mesh.nodes) {
    lo_ = lo_.cwiseMin(p);
    hi_ = hi_.cwiseMax(p);
  }
  tol_ = 1e-10 * std::max(1.0, (hi_ - lo_).norm());
  const int target = std::max(
      1, static_cast<int>(std::cbrt(static_cast<double>(mesh.n_tets()) / 6.0)));
  for (int ax = 0; ax < 3; ++ax)
    nb_[ax] = hi_[ax] - lo_[ax] > tol_ ? target : 1;
  bins_.assign(static_cast<size_t>(nb_[0]) * nb_[1] * nb_[2], {});

  auto clampi = [](int v, int n) { return std::min(std::max(v, 0), n - 1); };
  for (int e = 0; e < mesh.n_tets(); ++e) {
    Vec3 elo = mesh.nodes[mesh.tets[e][0]], ehi = elo;
    for (int a = 1; a < 4; ++a) {
      elo = elo.cwiseMin(mesh.nodes[mesh.tets[e][a]]);
      ehi = ehi.cwiseMax(mesh.nodes[mesh.tets[e][a]]);
    }
    int ib[3][2];
    for (int ax = 0; ax < 3; ++ax) {
      const double w = (hi_[ax] - lo_[ax]) / nb_[ax];
      ib[ax][0] = w > 0 ? clampi(static_cast<int>((elo[ax] - lo_[ax] - tol_) / w),
                                 nb_[ax])
                        : 0;
      ib[ax][1] = w > 0 ? clampi(static_cast<int>((ehi[ax] - lo_[ax] + tol_) / w),
                                 nb_[ax])
                        : 0;
    }
    for (int i = ib[0][0]; i <= ib[0][1]; ++i)
      for (int j = ib[1][0]; j <= ib[1][1]; ++j)
        for (int k = ib[2][0]; k <= ib[2][1]; ++k)
          bins_[i + nb_[0] * (j + static_cast<size_t>(nb_[1]) * k)].push_back(e);
  }
}

int MeshInterpolant::bin_of(const Vec3& p) const {
  int idx[3];
  for (int ax = 0; ax < 3; ++ax) {
    const double w = (hi_[ax] - lo_[ax]) / nb_[ax];
    int i = w > 0 ? static_cast<int>((p[ax] - lo_[ax]) / w) : 0;
    idx[ax] = std::min(std::max(i, 0), nb_[ax] - 1);
  }
  return idx[0] + nb_[0] * (idx[1] + static_cast<size_t>(nb_[1]) * idx[2]);
}

int MeshInterpolant::locate(const Vec3& p, double bary[4]) const {
  auto try_element = [&](int e, double tol) -> bool {
    const auto& t = mesh_.tets[e];
    Eigen::Matrix3d J;
    for (int a = 0; a < 3; ++a)
      J.col(a) = mesh_.nodes[t[a + 1]] - mesh_.nodes[t[0]];
    const Vec3 lam = J.partialPivLu().solve(p - mesh_.nodes[t[0]]);
    const double l0 = 1.0 - lam.sum();
    if (l0 < -tol || lam[0] < -tol || lam[1] < -tol || lam[2] < -tol)
      return false;
    bary[0] = l0;
    for (int a = 0; a < 3; ++a) bary[a + 1] = lam[a];
    return true;
  };
  for (int e : bins_[bin_of(p)])
    if (try_element(e, 1e-10)) return e;
  // looser pass over the same candidates catches points pinched between
  // bins by roundoff before declaring them outside
  for (int e : bins_[bin_of(p)])
    if (try_element(e, 1e-7)) return e;
  throw ConfigError("evaluation point outside the macro mesh");
}

namespace {

// trilinear value of a periodic nodal field on the structured cell grid
void cell_value(const NodalField& f, int n, const Vec3& beta, double out[3]) {
  const int side = n + 1;
  int i0[3];
  double t[3];
  for (int ax = 0; ax < 3; ++ax) {
    const double x = beta[ax] * n;
    int i = static_cast<int>(std::floor(x));
    i = std::min(std::max(i, 0), n - 1);
    i0[ax] = i;
    t[ax] = x - i;
  }
  out[0] = out[1] = out[2] = 0.0;
  for (int dk = 0; dk < 2; ++dk)
    for (int dj = 0; dj < 2; ++dj)
      for (int di = 0; di < 2; ++di) {
        const double w = (di ? t[0] : 1.0 - t[0]) * (dj ? t[1] : 1.0 - t[1]) *
                         (dk ? t[2] : 1.0 - t[2]);
        if (w == 0.0) continue;
        const int node =
            (i0[0] + di) + side * ((i0[1] + dj) + side * (i0[2] + dk));
        for (int c = 0; c < 3; ++c) out[c] += w * f[3 * node + c];
      }
}

}  // namespace

TwoScaleField reconstruct(const TetMesh& macro_mesh, const MacroSolution& macro,
                          const RepresentativeSet& reps, const LameModel& model,
                          double epsilon, int order, const TetMesh& eval_mesh,
                          int threads) {
  (void)model;
  if (order < 0 || order > 2)
    throw ConfigError("reconstruction order must be 0, 1 or 2");
  if (!(epsilon > 0.0)) throw ConfigError("scale parameter must be positive");
  reps.validate();
  if (macro.u0.size() != static_cast<size_t>(3 * macro_mesh.n_nodes()) ||
      macro.e0star.size() != static_cast<size_t>(macro_mesh.n_tets()))
    throw ConfigError("macro solution does not match the macro mesh");
  if (order == 2 && macro.grad_e0star.size() != macro.e0star.size())
    throw ConfigError("macro solution is missing strain gradients");
  for (const auto& cell : reps.cells)
    if (order >= 1 && cell.subdivisions < 1)
      throw ConfigError("cell functions are not on a structured cell grid");

  const MeshInterpolant interp(macro_mesh);
  const int nn = eval_mesh.n_nodes();

  TwoScaleField out;
  out.mesh = eval_mesh;
  out.epsilon = epsilon;
  out.order = order;
  out.u0_interp.assign(3 * nn, 0.0);
  out.u1eps.assign(3 * nn, 0.0);
  out.u2eps.assign(3 * nn, 0.0);

  auto run = [&](int begin, int end) {
    double bary[4];
    for (int v = begin; v < end; ++v) {
      const Vec3& alpha = eval_mesh.nodes[v];
      const int e = interp.locate(alpha, bary);
      const auto& t = macro_mesh.tets[e];
      double u[3] = {0, 0, 0};
      for (int a = 0; a < 4; ++a)
        for (int c = 0; c < 3; ++c) u[c] += bary[a] * macro.u0[3 * t[a] + c];
      for (int c = 0; c < 3; ++c) out.u0_interp[3 * v + c] = u[c];

      if (order >= 1) {
        const CellSolutionSet& cell = reps.nearest_cell(alpha);
        const Vec3 beta = map_to_cell(alpha, epsilon);
        const Strain6& e0 = macro.e0star[e];
        double n1[3], corr1[3] = {0, 0, 0};
        for (int q = 0; q < 6; ++q) {
          if (e0[q] == 0.0) continue;
          cell_value(cell.N1[q], cell.subdivisions, beta, n1);
          for (int c = 0; c < 3; ++c) corr1[c] += kPairWeight[q] * n1[c] * e0[q];
        }
        for (int c = 0; c < 3; ++c)
          out.u1eps[3 * v + c] = u[c] + epsilon * corr1[c];

        if (order == 2) {
          double val[3], corr2[3] = {0, 0, 0};
          const auto& g = macro.grad_e0star[e];
          for (int j = 0; j < 3; ++j)
            for (int q = 0; q < 6; ++q) {
              if (g[j][q] == 0.0) continue;
              cell_value(cell.N2[j][q], cell.subdivisions, beta, val);
              for (int c = 0; c < 3; ++c)
                corr2[c] += kPairWeight[q] * val[c] * g[j][q];
            }
          for (int q = 0; q < 6; ++q) {
            if (e0[q] == 0.0) continue;
            cell_value(cell.W[q], cell.subdivisions, beta, val);
            for (int c = 0; c < 3; ++c)
              corr2[c] += kPairWeight[q] * val[c] * e0[q];
          }
          for (int c = 0; c < 3; ++c)
            out.u2eps[3 * v + c] =
                out.u1eps[3 * v + c] + epsilon * epsilon * corr2[c];
        }
      }
    }
  };

  const int nt = std::max(1, std::min(threads, nn));
  if (nt == 1) {
    run(0, nn);
  } else {
    std::vector<std::thread> pool;
    const int chunk = (nn + nt - 1) / nt;
    for (int k = 0; k < nt; ++k)
      pool.emplace_back(run, k * chunk, std::min(nn, (k + 1) * chunk));
    for (auto& th : pool) th.join();
  }

  if (order < 1) out.u1eps = out.u0_interp;
  if (order < 2) out.u2eps = out.u1eps;
  return out;
}

void reconstruct_strain(TwoScaleField& field, const LameModel& model,
                        int min_per_period,
                        std::vector<std::string>* warnings) {
  if (field.u2eps.size() != static_cast<size_t>(3 * field.mesh.n_nodes()))
    throw ConfigError("reconstructed field does not match its mesh");
  if (warnings && field.epsilon > 0.0) {
    for (int ax = 0; ax < 3; ++ax) {
      // structured resolution estimate from the distinct node coordinates
      std::set<long long> levels;
      double lo = field.mesh.nodes[0][ax], hi = lo;
      for (const auto& p : field.mesh.nodes) {
        lo = std::min(lo, p[ax]);
        hi = std::max(hi, p[ax]);
      }
      const double span = hi - lo;
      if (span <= 0.0) continue;
      for (const auto& p : field.mesh.nodes)
        levels.insert(std::llround((p[ax] - lo) / span * 1e12));
      const double div = static_cast<double>(levels.size()) - 1.0;
      const double per_period = div * field.epsilon / span;
      if (per_period + 1e-9 < min_per_period)
        warnings->push_back(
            "evaluation mesh resolves a period on axis " +
            std::to_string(ax + 1) + " with only " +
            std::to_string(per_period) + " elements (minimum " +
            std::to_string(min_per_period) + ")");
    }
  }
  field.strain2eps =
      element_strain(field.mesh, field.u2eps, model, StrainMode::Macro);
}

void reconstruct_stress(TwoScaleField& field, const PhaseGeometry& phase,
                        const MaterialTable& materials) {
  if (field.strain2eps.size() != static_cast<size_t>(field.mesh.n_tets()))
    throw ConfigError("reconstructed strain is missing; compute it first");
  const int top = max_phase(phase);
  if (top >= static_cast<int>(materials.size()))
    throw ConfigError("phase " + std::to_string(top) +
                      " has no material entry");
  field.stress2eps.assign(field.mesh.n_tets(), Strain6{});
  for (int e = 0; e < field.mesh.n_tets(); ++e) {
    const Vec3 beta = map_to_cell(field.mesh.tet_centroid(e), field.epsilon);
    const int tag = classify_phase(phase, beta);
    field.mesh.material_tag[e] = tag;
    field.stress2eps[e] = contract(materials[tag].C, field.strain2eps[e]);
  }
}

std::array<int, 3> recommended_eval_divisions(
    const std::array<std::array<double, 2>, 3>& range, double epsilon,
    int per_period) {
  if (!(epsilon > 0.0)) throw ConfigError("scale parameter must be positive");
  std::array<int, 3> div;
  for (int ax = 0; ax < 3; ++ax) {
    const double span = range[ax][1] - range[ax][0];
    if (!(span > 0.0))
      throw ConfigError("degenerate domain extent on axis " +
                        std::to_string(ax + 1));
    const double periods = span / epsilon;
    div[ax] = std::max(1, static_cast<int>(std::ceil(periods * per_period)));
  }
  return div;
}

}  // namespace shellhom
