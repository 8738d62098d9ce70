#include "shellhom/fem.hpp"

#include <Eigen/LU>
#include <algorithm>
#include <cmath>
#include <map>
#include <string>

#include "shellhom/errors.hpp"

namespace shellhom {

DofMap make_dof_map(const TetMesh& mesh, const Constraints& bc) {
  const int nn = mesh.n_nodes();
  DofMap dm;
  dm.root.resize(nn);
  if (bc.periodic) {
    dm.root = resolve_periodic_masters(mesh);
  } else {
    for (int v = 0; v < nn; ++v) dm.root[v] = v;
  }
  // Dirichlet values keyed by root dof; equal repeats are fine, different
  // values on one dof are a conflict
  std::map<int, double> fixed;
  for (const auto& d : bc.dirichlet) {
    if (d.node < 0 || d.node >= nn || d.comp < 0 || d.comp > 2)
      throw ConfigError("dirichlet constraint references invalid dof");
    const int g = 3 * dm.root[d.node] + d.comp;
    auto [it, inserted] = fixed.emplace(g, d.value);
    if (!inserted && it->second != d.value)
      throw ConfigError("conflicting dirichlet values on node " +
                        std::to_string(d.node) + " component " +
                        std::to_string(d.comp));
  }
  dm.red.assign(3 * nn, -1);
  dm.fixed.assign(3 * nn, 0.0);
  int next = 0;
  for (int v = 0; v < nn; ++v) {
    if (dm.root[v] != v) continue;
    for (int c = 0; c < 3; ++c) {
      const int g = 3 * v + c;
      auto it = fixed.find(g);
      if (it != fixed.end())
        dm.fixed[g] = it->second;
      else
        dm.red[g] = next++;
    }
  }
  for (int v = 0; v < nn; ++v) {
    if (dm.root[v] == v) continue;
    for (int c = 0; c < 3; ++c) {
      dm.red[3 * v + c] = dm.red[3 * dm.root[v] + c];
      dm.fixed[3 * v + c] = dm.fixed[3 * dm.root[v] + c];
    }
  }
  dm.n_reduced = next;
  return dm;
}

ElementGeometry element_geometry(const TetMesh& mesh, int e) {
  const auto& t = mesh.tets[e];
  Eigen::Matrix3d J;
  for (int k = 0; k < 3; ++k)
    J.row(k) = (mesh.nodes[t[k + 1]] - mesh.nodes[t[0]]).transpose();
  const double det = J.determinant();
  if (!(det > 0.0))
    throw NumericError("degenerate tet " + std::to_string(e) +
                       " (signed volume " + std::to_string(det / 6.0) + ")");
  ElementGeometry g;
  g.volume = det / 6.0;
  const Eigen::Matrix3d Jinv = J.inverse();
  // gradients of the barycentric shape functions
  for (int a = 1; a <= 3; ++a) g.grad[a] = Jinv.col(a - 1);
  g.grad[0] = -(g.grad[1] + g.grad[2] + g.grad[3]);
  return g;
}

ElementB element_B(const TetMesh& mesh, int e, const LameModel& model,
                   StrainMode mode, const Vec3& alpha_I) {
  const ElementGeometry geo = element_geometry(mesh, e);
  MetricSample m;
  double cc[3][3] = {};  // c_ij = dH_i/dalpha_j / (H_i H_j); zero in micro mode
  if (mode == StrainMode::Micro) {
    m = lame_eval(model, alpha_I);
  } else {
    m = lame_eval(model, mesh.tet_centroid(e));
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) cc[i][j] = m.dH[i][j] / (m.H[i] * m.H[j]);
  }
  const double s[3] = {1.0 / m.H[0], 1.0 / m.H[1], 1.0 / m.H[2]};

  ElementB eb;
  eb.volume = geo.volume;
  // cell problems average over plain dQ; macro integrals carry H dOmega
  eb.Hweight = (mode == StrainMode::Micro) ? 1.0 : m.Hprod;
  for (auto& row : eb.B)
    for (double& x : row) x = 0.0;
  for (int a = 0; a < 4; ++a) {
    const Vec3& g = geo.grad[a];
    for (int p = 0; p < 6; ++p) {
      const int i = kPairIndex[p][0], j = kPairIndex[p][1];
      if (i == j) {
        eb.B[p][3 * a + i] += s[i] * g[i];
        for (int k = 0; k < 3; ++k)
          if (k != i) eb.B[p][3 * a + k] += cc[i][k] * 0.25;
      } else {
        eb.B[p][3 * a + j] += 0.5 * (s[i] * g[i] - cc[j][i] * 0.25);
        eb.B[p][3 * a + i] += 0.5 * (s[j] * g[j] - cc[i][j] * 0.25);
      }
    }
  }
  return eb;
}

static void element_stiffness(const ElementB& eb, const ElasticTensor& C,
                              double Ke[12][12]) {
  // K_e = V H (B_eng)^T C B_eng with engineering rows w_p B_p
  double CB[6][12];
  for (int p = 0; p < 6; ++p)
    for (int d = 0; d < 12; ++d) {
      double acc = 0.0;
      for (int q = 0; q < 6; ++q)
        acc += C(p, q) * kPairWeight[q] * eb.B[q][d];
      CB[p][d] = acc * kPairWeight[p];
    }
  const double w = eb.volume * eb.Hweight;
  for (int r = 0; r < 12; ++r)
    for (int d = 0; d < 12; ++d) {
      double acc = 0.0;
      for (int p = 0; p < 6; ++p) acc += eb.B[p][r] * CB[p][d];
      Ke[r][d] = w * acc;
    }
}

AssembledSystem assemble_stiffness(const TetMesh& mesh,
                                   const MaterialTable& materials,
                                   const LameModel& model, StrainMode mode,
                                   const Vec3& alpha_I, const DofMap& dm) {
  // material sanity per used tag
  {
    std::vector<char> seen;
    for (int e = 0; e < mesh.n_tets(); ++e) {
      const int tag = mesh.material_tag[e];
      if (tag < 0 || tag >= static_cast<int>(materials.size()))
        throw ConfigError("material id " + std::to_string(tag) +
                          " used by the mesh has no table entry");
      if (tag >= static_cast<int>(seen.size())) seen.resize(tag + 1, 0);
      if (!seen[tag]) {
        seen[tag] = 1;
        if (mandel_eigenvalues(materials[tag].C)[0] <= 0.0)
          throw ConfigError("material id " + std::to_string(tag) +
                            " is not positive definite on strains");
      }
    }
  }
  return assemble_stiffness(
      mesh,
      [&](int e) -> const ElasticTensor& {
        return materials[mesh.material_tag[e]].C;
      },
      model, mode, alpha_I, dm, false);
}

AssembledSystem assemble_stiffness(const TetMesh& mesh,
                                   const TensorProvider& C_of,
                                   const LameModel& model, StrainMode mode,
                                   const Vec3& alpha_I, const DofMap& dm,
                                   bool check_definite) {
  // symmetric sparsity pattern from root-node adjacency
  std::vector<std::pair<int, int>> pairs;
  pairs.reserve(static_cast<size_t>(mesh.n_tets()) * 16);
  for (const auto& t : mesh.tets)
    for (int a = 0; a < 4; ++a)
      for (int b = 0; b < 4; ++b)
        pairs.emplace_back(dm.root[t[a]], dm.root[t[b]]);
  std::sort(pairs.begin(), pairs.end());
  pairs.erase(std::unique(pairs.begin(), pairs.end()), pairs.end());

  Eigen::SparseMatrix<double> K(dm.n_reduced, dm.n_reduced);
  {
    // column counts, then sorted insertion per column (pattern symmetric)
    Eigen::VectorXi counts = Eigen::VectorXi::Zero(dm.n_reduced);
    for (const auto& [vi, vj] : pairs)
      for (int ci = 0; ci < 3; ++ci) {
        const int r = dm.red[3 * vi + ci];
        if (r < 0) continue;
        for (int cj = 0; cj < 3; ++cj)
          if (dm.red[3 * vj + cj] >= 0) ++counts[dm.red[3 * vj + cj]];
      }
    K.reserve(counts);
    for (const auto& [vi, vj] : pairs)
      for (int cj = 0; cj < 3; ++cj) {
        const int col = dm.red[3 * vj + cj];
        if (col < 0) continue;
        for (int ci = 0; ci < 3; ++ci) {
          const int r = dm.red[3 * vi + ci];
          if (r >= 0) K.insert(r, col) = 0.0;
        }
      }
    K.makeCompressed();
  }

  Eigen::VectorXd rhs_fixed = Eigen::VectorXd::Zero(dm.n_reduced);
  double Ke[12][12];
  for (int e = 0; e < mesh.n_tets(); ++e) {
    const ElasticTensor& C = C_of(e);
    if (check_definite && mandel_eigenvalues(C)[0] <= 0.0)
      throw NumericError("stiffness at element " + std::to_string(e) +
                         " is not positive definite on strains");
    const ElementB eb = element_B(mesh, e, model, mode, alpha_I);
    element_stiffness(eb, C, Ke);
    const auto& t = mesh.tets[e];
    int gdof[12];
    for (int a = 0; a < 4; ++a)
      for (int c = 0; c < 3; ++c) gdof[3 * a + c] = 3 * t[a] + c;
    for (int r = 0; r < 12; ++r) {
      const int ri = dm.red[gdof[r]];
      if (ri < 0) continue;
      for (int d = 0; d < 12; ++d) {
        const int cj = dm.red[gdof[d]];
        if (cj >= 0)
          K.coeffRef(ri, cj) += Ke[r][d];
        else
          rhs_fixed[ri] -= Ke[r][d] * dm.fixed[gdof[d]];
      }
    }
  }
  return {std::move(K), std::move(rhs_fixed)};
}

Eigen::VectorXd reduce_load(const DofMap& dm, const std::vector<double>& load) {
  Eigen::VectorXd r = Eigen::VectorXd::Zero(dm.n_reduced);
  for (size_t g = 0; g < load.size(); ++g)
    if (dm.red[g] >= 0) r[dm.red[g]] += load[g];
  return r;
}

std::vector<double> lumped_volumes(const TetMesh& mesh) {
  std::vector<double> w(mesh.n_nodes(), 0.0);
  for (int e = 0; e < mesh.n_tets(); ++e) {
    const double q = mesh.tet_volume(e) * 0.25;
    for (int a = 0; a < 4; ++a) w[mesh.tets[e][a]] += q;
  }
  return w;
}

namespace {

struct Deflation {
  // per-component constant kernel vectors and weighted-mean vectors on the
  // reduced dofs
  std::vector<int> comp;            // reduced dof -> component
  Eigen::VectorXd weight;           // reduced dof -> merged lumped volume
  double total = 0.0;               // sum of weights of one component

  void project_kernel(Eigen::VectorXd& r) const {
    double sum[3] = {0, 0, 0};
    long cnt[3] = {0, 0, 0};
    for (int i = 0; i < r.size(); ++i) {
      sum[comp[i]] += r[i];
      ++cnt[comp[i]];
    }
    for (int i = 0; i < r.size(); ++i) r[i] -= sum[comp[i]] / cnt[comp[i]];
  }
};

}  // namespace

std::vector<double> solve_displacement(const AssembledSystem& sys,
                                       const Eigen::VectorXd& rhs,
                                       const TetMesh& mesh, const DofMap& dm,
                                       const Constraints& bc,
                                       const SolveOptions& opts,
                                       SolveStats* stats) {
  const int n = dm.n_reduced;
  Eigen::VectorXd b = rhs + sys.rhs_fixed;
  SolveStats local;
  SolveStats& st = stats ? *stats : local;

  Deflation defl;
  if (bc.zero_mean) {
    defl.comp.resize(n);
    defl.weight = Eigen::VectorXd::Zero(n);
    const std::vector<double> lv = lumped_volumes(mesh);
    for (int v = 0; v < mesh.n_nodes(); ++v)
      for (int c = 0; c < 3; ++c) {
        const int r = dm.red[3 * v + c];
        if (r < 0)
          throw ConfigError("zero-mean constraint cannot combine with "
                            "dirichlet on the same component");
        defl.comp[r] = c;
        defl.weight[r] += lv[v];
      }
    defl.total = 0.0;
    for (int i = 0; i < n; ++i)
      if (defl.comp[i] == 0) defl.total += defl.weight[i];
    // KKT consistency correction: remove the kernel-inconsistent part of the
    // load along the weighted-mean profile and log its multiplier
    for (int c = 0; c < 3; ++c) {
      double kb = 0.0;
      for (int i = 0; i < n; ++i)
        if (defl.comp[i] == c) kb += b[i];
      const double lambda = kb / defl.total;
      st.mean_correction[c] = lambda;
      for (int i = 0; i < n; ++i)
        if (defl.comp[i] == c) b[i] -= lambda * defl.weight[i];
    }
  }

  Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
  const double bnorm = b.norm();
  if (bnorm > 0.0) {
    Eigen::VectorXd diag(n);
    for (int i = 0; i < n; ++i) {
      const double d = sys.K.coeff(i, i);
      diag[i] = (d > 0.0) ? 1.0 / d : 1.0;
    }
    const long cap = opts.max_iter > 0 ? opts.max_iter : 50L * std::max(n, 1);
    Eigen::VectorXd r = b;
    if (bc.zero_mean) defl.project_kernel(r);
    Eigen::VectorXd z = diag.asDiagonal() * r;
    if (bc.zero_mean) defl.project_kernel(z);
    Eigen::VectorXd p = z, q(n);
    double rz = r.dot(z);
    double rel = r.norm() / bnorm;
    long it = 0;
    while (rel > opts.tol) {
      if (it++ >= cap)
        throw NumericError(
            "conjugate gradient stalled: relative residual " +
            std::to_string(rel) + " after " + std::to_string(cap) +
            " iterations");
      q.noalias() = sys.K * p;
      const double pq = p.dot(q);
      if (!(pq > 0.0))
        throw NumericError("conjugate gradient hit a non-positive direction");
      const double alpha = rz / pq;
      x += alpha * p;
      r -= alpha * q;
      if (bc.zero_mean) defl.project_kernel(r);
      rel = r.norm() / bnorm;
      z = diag.asDiagonal() * r;
      if (bc.zero_mean) defl.project_kernel(z);
      const double rz_new = r.dot(z);
      p = z + (rz_new / rz) * p;
      rz = rz_new;
    }
    st.iterations = static_cast<int>(it);
    st.rel_residual = rel;
  }

  if (bc.zero_mean) {
    // shift to volume-weighted zero mean per component
    for (int c = 0; c < 3; ++c) {
      double mx = 0.0;
      for (int i = 0; i < n; ++i)
        if (defl.comp[i] == c) mx += defl.weight[i] * x[i];
      const double shift = mx / defl.total;
      for (int i = 0; i < n; ++i)
        if (defl.comp[i] == c) x[i] -= shift;
    }
  }

  std::vector<double> u(3 * mesh.n_nodes());
  for (size_t g = 0; g < u.size(); ++g)
    u[g] = (dm.red[g] >= 0) ? x[dm.red[g]] : dm.fixed[g];
  return u;
}

std::vector<Strain6> element_strain(const TetMesh& mesh,
                                    const std::vector<double>& u,
                                    const LameModel& model, StrainMode mode,
                                    const Vec3& alpha_I) {
  std::vector<Strain6> out(mesh.n_tets());
  for (int e = 0; e < mesh.n_tets(); ++e) {
    const ElementB eb = element_B(mesh, e, model, mode, alpha_I);
    const auto& t = mesh.tets[e];
    Strain6 s{};
    for (int p = 0; p < 6; ++p) {
      double acc = 0.0;
      for (int a = 0; a < 4; ++a)
        for (int c = 0; c < 3; ++c)
          acc += eb.B[p][3 * a + c] * u[3 * t[a] + c];
      s[p] = acc;
    }
    out[e] = s;
  }
  return out;
}

Eigen::Matrix3d element_grad(const TetMesh& mesh, int e,
                             const std::vector<double>& u) {
  const ElementGeometry geo = element_geometry(mesh, e);
  Eigen::Matrix3d G = Eigen::Matrix3d::Zero();
  const auto& t = mesh.tets[e];
  for (int a = 0; a < 4; ++a)
    for (int j = 0; j < 3; ++j) G.row(j) += u[3 * t[a] + j] * geo.grad[a].transpose();
  return G;
}

double strain_energy(const TetMesh& mesh, const MaterialTable& materials,
                     const LameModel& model, StrainMode mode,
                     const Vec3& alpha_I, const std::vector<double>& u) {
  double acc = 0.0;
  for (int e = 0; e < mesh.n_tets(); ++e) {
    const ElementB eb = element_B(mesh, e, model, mode, alpha_I);
    const auto& t = mesh.tets[e];
    Strain6 s{};
    for (int p = 0; p < 6; ++p)
      for (int a = 0; a < 4; ++a)
        for (int c = 0; c < 3; ++c)
          s[p] += eb.B[p][3 * a + c] * u[3 * t[a] + c];
    acc += eb.volume * eb.Hweight *
           double_contract(materials[mesh.material_tag[e]].C, s, s);
  }
  return acc;
}

}  // namespace shellhom
