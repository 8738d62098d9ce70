#include "shellhom/cell.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <mutex>
#include <string>
#include <thread>

#include "shellhom/errors.hpp"

namespace shellhom {

namespace {

// run fn(0..ncases) on up to `threads` workers; any exception is rethrown
// after the pool drains
void parallel_cases(int ncases, int threads, const std::function<void(int)>& fn) {
  if (threads <= 1 || ncases <= 1) {
    for (int i = 0; i < ncases; ++i) fn(i);
    return;
  }
  const int nw = std::min(threads, ncases);
  std::exception_ptr first_error;
  std::mutex mu;
  std::vector<std::thread> pool;
  pool.reserve(nw);
  for (int w = 0; w < nw; ++w)
    pool.emplace_back([&, w]() {
      for (int i = w; i < ncases; i += nw) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lk(mu);
          if (!first_error) first_error = std::current_exception();
        }
      }
    });
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace

CellSolver::CellSolver(const TetMesh& mesh, const MaterialTable& materials,
                       const LameModel& model, const Vec3& alpha_I)
    : mesh_(mesh),
      materials_(materials),
      model_(model),
      alpha_I_(alpha_I),
      metric_(lame_eval(model, alpha_I)) {
  if (mesh_.periodic.empty())
    throw ConfigError("cell mesh has no periodic pairing");
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      cc_[i][j] = metric_.dH[i][j] / (metric_.H[i] * metric_.H[j]);
  bc_.periodic = true;
  bc_.zero_mean = true;
  dm_ = make_dof_map(mesh_, bc_);
  sys_ = assemble_stiffness(mesh_, materials_, model_, StrainMode::Micro,
                            alpha_I_, dm_);
  volume_ = mesh_.total_volume();
  for (int e = 0; e < mesh_.n_tets(); ++e)
    c_scale_ = std::max(c_scale_, max_abs(materials_[mesh_.material_tag[e]].C));
}

NodalField CellSolver::solve_case(const std::vector<double>& load,
                                  SolveStats* stats) {
  const Eigen::VectorXd rhs = reduce_load(dm_, load);
  return solve_displacement(sys_, rhs, mesh_, dm_, bc_, {}, stats);
}

N1Set CellSolver::solve_first_order(int threads) {
  N1Set out;
  parallel_cases(6, threads, [&](int q) {
    // load: -int C_ijmn psi~_j(v_i) dQ for the unit macro strain (mn) = q
    std::vector<double> load(3 * mesh_.n_nodes(), 0.0);
    for (int e = 0; e < mesh_.n_tets(); ++e) {
      const ElementB eb =
          element_B(mesh_, e, model_, StrainMode::Micro, alpha_I_);
      const ElasticTensor& C = materials_[mesh_.material_tag[e]].C;
      const auto& t = mesh_.tets[e];
      for (int a = 0; a < 4; ++a)
        for (int i = 0; i < 3; ++i) {
          double acc = 0.0;
          for (int p = 0; p < 6; ++p)
            acc += kPairWeight[p] * C(p, q) * eb.B[p][3 * a + i];
          load[3 * t[a] + i] -= eb.volume * acc;
        }
    }
    out[q] = solve_case(load, nullptr);
  });
  have_strains_ = false;
  return out;
}

void CellSolver::ensure_strains(const N1Set& N1) {
  if (have_strains_) return;
  for (int q = 0; q < 6; ++q)
    strains1_[q] =
        element_strain(mesh_, N1[q], model_, StrainMode::Micro, alpha_I_);
  have_strains_ = true;
}

ElasticTensor CellSolver::homogenized_tensor(const N1Set& N1, double* asymmetry,
                                             bool strict) {
  ensure_strains(N1);
  ElasticTensor raw;
  for (int e = 0; e < mesh_.n_tets(); ++e) {
    const double v = mesh_.tet_volume(e);
    const ElasticTensor& C = materials_[mesh_.material_tag[e]].C;
    for (int q = 0; q < 6; ++q) {
      const Strain6 corr = contract(C, strains1_[q][e]);
      for (int p = 0; p < 6; ++p) raw(p, q) += v * (C(p, q) + corr[p]);
    }
  }
  raw *= 1.0 / volume_;
  const double rel_asym = major_asymmetry(raw) / std::max(max_abs(raw), 1e-300);
  if (asymmetry) *asymmetry = rel_asym;
  if (strict && rel_asym > 1e-6)
    throw NumericError(
        "homogenized tensor asymmetry " + std::to_string(rel_asym) +
        " exceeds 1e-6; refine the cell mesh or relax strict mode");
  return symmetrized(raw);
}

DField CellSolver::compute_D(const N1Set& N1) const {
  return shellhom::compute_D(mesh_, model_, alpha_I_, N1);
}

N2Set CellSolver::solve_second_order_N2(const N1Set& N1,
                                        const ElasticTensor& C_hat,
                                        int threads,
                                        double* max_mean_correction) {
  ensure_strains(N1);
  const double s[3] = {1.0 / metric_.H[0], 1.0 / metric_.H[1],
                       1.0 / metric_.H[2]};
  N2Set out;
  double worst = 0.0;
  std::mutex mu;
  parallel_cases(18, threads, [&](int case_id) {
    const int j = case_id / 6, q = case_id % 6;
    std::vector<double> load(3 * mesh_.n_nodes(), 0.0);
    double total[3] = {0.0, 0.0, 0.0};
    for (int e = 0; e < mesh_.n_tets(); ++e) {
      const ElementGeometry geo = element_geometry(mesh_, e);
      const ElasticTensor& C = materials_[mesh_.material_tag[e]].C;
      const auto& t = mesh_.tets[e];
      // T_iqmn over pairs: C - C_hat + C : strain(N1)
      const Strain6 corr = contract(C, strains1_[q][e]);
      double T6[6];
      for (int p = 0; p < 6; ++p) T6[p] = C(p, q) - C_hat(p, q) + corr[p];
      double Nbar[3];
      for (int c = 0; c < 3; ++c)
        Nbar[c] = 0.25 * (N1[q][3 * t[0] + c] + N1[q][3 * t[1] + c] +
                          N1[q][3 * t[2] + c] + N1[q][3 * t[3] + c]);
      for (int a = 0; a < 4; ++a)
        for (int i = 0; i < 3; ++i) {
          const double Ti = T6[kPairOf[i][j]];
          double acc = geo.volume * 0.25 * Ti;
          // - int C_ilkj N_k psi~_l(v_i)
          for (int l = 0; l < 3; ++l) {
            double G = 0.0;
            for (int k = 0; k < 3; ++k) G += C.at(i, l, k, j) * Nbar[k];
            acc -= geo.volume * G * s[l] * geo.grad[a][l];
          }
          load[3 * t[a] + i] += acc;
          total[i] += geo.volume * 0.25 * Ti;
        }
    }
    for (int i = 0; i < 3; ++i)
      if (std::fabs(total[i]) > 1e-8 * c_scale_ * volume_)
        throw NumericError("second-order cell load (j=" + std::to_string(j + 1) +
                           ", mn case " + std::to_string(q) +
                           ") violates solvability: cell average " +
                           std::to_string(total[i]));
    SolveStats stats;
    out[j][q] = solve_case(load, &stats);
    const double corr = std::max({std::fabs(stats.mean_correction[0]),
                                  std::fabs(stats.mean_correction[1]),
                                  std::fabs(stats.mean_correction[2])});
    std::lock_guard<std::mutex> lk(mu);
    worst = std::max(worst, corr);
  });
  if (max_mean_correction) *max_mean_correction = worst;
  return out;
}

WSet CellSolver::solve_second_order_W(const N1Set& N1,
                                      const ElasticTensor& C_hat,
                                      const DField& D, int threads,
                                      double* max_mean_correction) {
  ensure_strains(N1);
  const double s[3] = {1.0 / metric_.H[0], 1.0 / metric_.H[1],
                       1.0 / metric_.H[2]};
  // m_j = (1/H) d(H/H_j)/dalpha_j at the frozen metric
  double m[3];
  for (int j = 0; j < 3; ++j) {
    m[j] = 0.0;
    for (int k = 0; k < 3; ++k)
      if (k != j) m[j] += cc_[k][j];
  }
  WSet out;
  double worst = 0.0;
  std::mutex mu;
  parallel_cases(6, threads, [&](int q) {
    std::vector<double> load(3 * mesh_.n_nodes(), 0.0);
    double total[3] = {0.0, 0.0, 0.0};
    for (int e = 0; e < mesh_.n_tets(); ++e) {
      const ElementGeometry geo = element_geometry(mesh_, e);
      const ElasticTensor& C = materials_[mesh_.material_tag[e]].C;
      const auto& t = mesh_.tets[e];
      const Strain6 corr = contract(C, strains1_[q][e]);
      double T6[6];
      for (int p = 0; p < 6; ++p) T6[p] = C(p, q) - C_hat(p, q) + corr[p];
      // G~_ij = C_ijkl D_klmn, element-constant
      Strain6 Dcol;
      for (int p = 0; p < 6; ++p) Dcol[p] = D[e][p][q];
      const Strain6 G = contract(C, Dcol);
      for (int a = 0; a < 4; ++a)
        for (int i = 0; i < 3; ++i) {
          double F = 0.0;
          for (int j = 0; j < 3; ++j) {
            F += m[j] * T6[kPairOf[i][j]];
            if (j != i) {
              F += cc_[i][j] * T6[kPairOf[i][j]];
              F -= cc_[j][i] * T6[kPairOf[j][j]];
            }
          }
          double acc = geo.volume * 0.25 * F;
          for (int j = 0; j < 3; ++j)
            acc -= geo.volume * G[kPairOf[i][j]] * s[j] * geo.grad[a][j];
          load[3 * t[a] + i] += acc;
          total[i] += geo.volume * 0.25 * F;
        }
    }
    for (int i = 0; i < 3; ++i)
      if (std::fabs(total[i]) > 1e-8 * c_scale_ * volume_)
        throw NumericError("second-order W load (mn case " + std::to_string(q) +
                           ") violates solvability: cell average " +
                           std::to_string(total[i]));
    SolveStats stats;
    out[q] = solve_case(load, &stats);
    const double corr = std::max({std::fabs(stats.mean_correction[0]),
                                  std::fabs(stats.mean_correction[1]),
                                  std::fabs(stats.mean_correction[2])});
    std::lock_guard<std::mutex> lk(mu);
    worst = std::max(worst, corr);
  });
  if (max_mean_correction) *max_mean_correction = worst;
  return out;
}

CellSolutionSet CellSolver::solve_all(int threads, bool strict) {
  CellSolutionSet set;
  set.alpha_I = alpha_I_;
  set.metric = metric_;
  set.subdivisions = structured_subdivisions(mesh_);
  set.N1 = solve_first_order(threads);
  set.C_hat = homogenized_tensor(set.N1, &set.asymmetry, strict);
  set.D = compute_D(set.N1);
  double corr_n2 = 0.0, corr_w = 0.0;
  set.N2 = solve_second_order_N2(set.N1, set.C_hat, threads, &corr_n2);
  set.W = solve_second_order_W(set.N1, set.C_hat, set.D, threads, &corr_w);
  set.max_mean_correction = std::max(corr_n2, corr_w);
  return set;
}

N1Set solve_first_order(const TetMesh& cell, const MaterialTable& materials,
                        const LameModel& model, const Vec3& alpha_I) {
  CellSolver solver(cell, materials, model, alpha_I);
  return solver.solve_first_order();
}

ElasticTensor homogenized_tensor(const TetMesh& cell,
                                 const MaterialTable& materials,
                                 const LameModel& model, const Vec3& alpha_I,
                                 const N1Set& N1, double* asymmetry,
                                 bool strict) {
  CellSolver solver(cell, materials, model, alpha_I);
  return solver.homogenized_tensor(N1, asymmetry, strict);
}

DField compute_D(const TetMesh& cell, const LameModel& model,
                 const Vec3& alpha_I, const N1Set& N1) {
  return compute_D(cell, lame_eval(model, alpha_I), N1);
}

DField compute_D(const TetMesh& cell, const MetricSample& metric,
                 const N1Set& N1) {
  // the D assembly does not need the stiffness; build the couplings directly
  double cc[3][3];
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      cc[i][j] = metric.dH[i][j] / (metric.H[i] * metric.H[j]);
  DField D(cell.n_tets());
  for (int e = 0; e < cell.n_tets(); ++e) {
    const auto& t = cell.tets[e];
    for (int q = 0; q < 6; ++q) {
      double Nbar[3];
      for (int c = 0; c < 3; ++c)
        Nbar[c] = 0.25 * (N1[q][3 * t[0] + c] + N1[q][3 * t[1] + c] +
                          N1[q][3 * t[2] + c] + N1[q][3 * t[3] + c]);
      for (int p = 0; p < 6; ++p) {
        const int k = kPairIndex[p][0], l = kPairIndex[p][1];
        double d = 0.0;
        if (k == l) {
          for (int j = 0; j < 3; ++j)
            if (j != k) d += cc[k][j] * Nbar[j];
        } else {
          d = -0.5 * (cc[l][k] * Nbar[l] + cc[k][l] * Nbar[k]);
        }
        D[e][p][q] = d;
      }
    }
  }
  return D;
}

}  // namespace shellhom
