#include "shellhom/oracle.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <cstdio>

#include "shellhom/cell.hpp"
#include "shellhom/errors.hpp"
#include "shellhom/twoscale.hpp"

namespace shellhom {

namespace {

void check_fractions(
    const std::vector<std::pair<ElasticTensor, double>>& layers) {
  if (layers.empty()) throw ConfigError("layer list is empty");
  double sum = 0.0;
  for (const auto& [C, f] : layers) {
    (void)C;
    if (f < 0.0) throw ConfigError("negative layer fraction");
    sum += f;
  }
  if (std::fabs(sum - 1.0) > 1e-12)
    throw ConfigError("layer fractions must sum to 1");
}

// pair-index permutation induced by swapping the layering axis with axis 3
std::array<int, 6> pair_permutation(int axis) {
  switch (axis) {
    case 0:
      return {2, 1, 0, 4, 3, 5};  // swap axes 1 and 3
    case 1:
      return {0, 2, 1, 5, 4, 3};  // swap axes 2 and 3
    case 2:
      return {0, 1, 2, 3, 4, 5};
    default:
      throw ConfigError("layering axis must be 0, 1 or 2");
  }
}

ElasticTensor permute_pairs(const ElasticTensor& C,
                            const std::array<int, 6>& perm) {
  ElasticTensor out;
  for (int p = 0; p < 6; ++p)
    for (int q = 0; q < 6; ++q) out(p, q) = C(perm[p], perm[q]);
  return out;
}

}  // namespace

ElasticTensor layered_effective_tensor(
    const std::vector<std::pair<ElasticTensor, double>>& layers, int axis) {
  check_fractions(layers);
  const auto perm = pair_permutation(axis);

  // With the normal along axis 3, the tractions (33, 23, 13) and in-plane
  // strains (11, 22, 12) are continuous across layers. Writing the Voigt
  // matrix in blocks over T = {11,22,12} and N = {33,23,13},
  //   sigma_N = C_NT e_T + C_NN e_N,  sigma_T = C_TT e_T + C_TN e_N,
  // and averaging at fixed sigma_N, e_T yields the block formulas below.
  const int Tix[3] = {0, 1, 3};
  const int Nix[3] = {2, 4, 5};

  Eigen::Matrix3d invNN = Eigen::Matrix3d::Zero();    // <C_NN^{-1}>
  Eigen::Matrix3d invNN_NT = Eigen::Matrix3d::Zero(); // <C_NN^{-1} C_NT>
  Eigen::Matrix3d TT = Eigen::Matrix3d::Zero();       // <C_TT>
  Eigen::Matrix3d schur = Eigen::Matrix3d::Zero();    // <C_TN C_NN^{-1} C_NT>

  for (const auto& [C0, f] : layers) {
    const ElasticTensor C = permute_pairs(C0, perm);
    Eigen::Matrix3d cTT, cTN, cNT, cNN;
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c) {
        cTT(r, c) = C(Tix[r], Tix[c]);
        cTN(r, c) = C(Tix[r], Nix[c]);
        cNT(r, c) = C(Nix[r], Tix[c]);
        cNN(r, c) = C(Nix[r], Nix[c]);
      }
    const Eigen::Matrix3d inv = cNN.inverse();
    invNN += f * inv;
    invNN_NT += f * (inv * cNT);
    TT += f * cTT;
    schur += f * (cTN * inv * cNT);
  }

  const Eigen::Matrix3d effNN = invNN.inverse();
  const Eigen::Matrix3d effNT = effNN * invNN_NT;
  const Eigen::Matrix3d effTT =
      TT - schur + invNN_NT.transpose() * effNN * invNN_NT;

  ElasticTensor out;
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) {
      out(Tix[r], Tix[c]) = effTT(r, c);
      out(Nix[r], Nix[c]) = effNN(r, c);
      out(Nix[r], Tix[c]) = effNT(r, c);
      out(Tix[r], Nix[c]) = effNT(c, r);
    }
  return permute_pairs(out, perm);  // the swap is its own inverse
}

ElasticTensor voigt_average(
    const std::vector<std::pair<ElasticTensor, double>>& phases) {
  check_fractions(phases);
  ElasticTensor out;
  for (const auto& [C, f] : phases)
    for (int p = 0; p < 6; ++p)
      for (int q = 0; q < 6; ++q) out(p, q) += f * C(p, q);
  return out;
}

ElasticTensor reuss_average(
    const std::vector<std::pair<ElasticTensor, double>>& phases) {
  check_fractions(phases);
  ElasticTensor acc;
  for (const auto& [C, f] : phases) {
    const ElasticTensor S = inverse(C);
    for (int p = 0; p < 6; ++p)
      for (int q = 0; q < 6; ++q) acc(p, q) += f * S(p, q);
  }
  return inverse(acc);
}

namespace {

FieldNorms accumulate_norms(const TetMesh& mesh,
                            const std::vector<double>& vals,
                            const LameModel& model, StrainMode mode,
                            const Vec3& alpha_I) {
  double l2 = 0.0, h1 = 0.0;
  std::array<double, 3> s_frozen = {1, 1, 1};
  if (mode == StrainMode::Micro) s_frozen = micro_scale_factors(model, alpha_I);
  for (int e = 0; e < mesh.n_tets(); ++e) {
    const ElementGeometry g = element_geometry(mesh, e);
    double hw = 1.0;
    std::array<double, 3> s = s_frozen;
    if (mode == StrainMode::Macro) {
      const MetricSample m = lame_eval(model, mesh.tet_centroid(e));
      hw = m.Hprod;
      for (int j = 0; j < 3; ++j) s[j] = 1.0 / m.H[j];
    }
    for (int i = 0; i < 3; ++i) {
      // exact integral of the squared linear interpolant:
      // int_T u^2 = V/20 [ (sum_a u_a)^2 + sum_a u_a^2 ]
      double sum = 0.0, sq = 0.0;
      Vec3 grad = Vec3::Zero();
      for (int a = 0; a < 4; ++a) {
        const double ua = vals[3 * mesh.tets[e][a] + i];
        sum += ua;
        sq += ua * ua;
        grad += ua * g.grad[a];
      }
      l2 += hw * g.volume / 20.0 * (sum * sum + sq);
      for (int j = 0; j < 3; ++j) {
        const double psi = s[j] * grad[j];
        h1 += hw * g.volume * psi * psi;
      }
    }
  }
  return {std::sqrt(l2), std::sqrt(h1)};
}

}  // namespace

FieldNorms field_norms(const TetMesh& mesh, const std::vector<double>& u,
                       const LameModel& model, StrainMode mode,
                       const Vec3& alpha_I) {
  if (u.size() != static_cast<size_t>(3 * mesh.n_nodes()))
    throw ConfigError("field size does not match the mesh");
  return accumulate_norms(mesh, u, model, mode, alpha_I);
}

FieldNorms difference_norms(const TetMesh& mesh, const std::vector<double>& a,
                            const std::vector<double>& b,
                            const LameModel& model, StrainMode mode,
                            const Vec3& alpha_I) {
  if (a.size() != b.size() ||
      a.size() != static_cast<size_t>(3 * mesh.n_nodes()))
    throw ConfigError("field size does not match the mesh");
  std::vector<double> d(a.size());
  for (size_t k = 0; k < a.size(); ++k) d[k] = a[k] - b[k];
  return accumulate_norms(mesh, d, model, mode, alpha_I);
}

std::array<int, 3> period_counts(const MacroDomain& dom, double epsilon) {
  if (!(epsilon > 0.0)) throw ConfigError("scale parameter must be positive");
  std::array<int, 3> periods;
  for (int ax = 0; ax < 3; ++ax) {
    const double span = dom.range[ax][1] - dom.range[ax][0];
    if (!(span > 0.0))
      throw ConfigError("degenerate domain extent on axis " +
                        std::to_string(ax + 1));
    const double x = span / epsilon;
    const long long k = std::llround(x);
    if (k < 1 || std::fabs(x - double(k)) > 1e-9 * std::max(1.0, x))
      throw ConfigError("scale parameter " + std::to_string(epsilon) +
                        " does not tile axis " + std::to_string(ax + 1) +
                        " with whole periods (" + std::to_string(x) + ")");
    periods[ax] = static_cast<int>(k);
  }
  return periods;
}

DnsResult dns_solve(const MacroDomain& dom, const LameModel& model,
                    double epsilon, const PhaseGeometry& phase,
                    const MaterialTable& materials,
                    const MacroProblem& problem, int resolution,
                    const SolveOptions& opts) {
  if (resolution < 1)
    throw ConfigError("resolution must be at least one element per period");
  const auto periods = period_counts(dom, epsilon);
  if (max_phase(phase) >= static_cast<int>(materials.size()))
    throw ConfigError("phase " + std::to_string(max_phase(phase)) +
                      " has no material entry");

  DnsResult out;
  for (int ax = 0; ax < 3; ++ax) out.divisions[ax] = periods[ax] * resolution;
  if (resolution < 4)
    out.warnings.push_back("direct solve resolves a period with only " +
                           std::to_string(resolution) +
                           " elements per axis (minimum 4 recommended)");
  out.mesh = generate_macro_mesh(dom, out.divisions);
  if (3 * out.mesh.n_nodes() > 500000)
    out.warnings.push_back("direct solve has " +
                           std::to_string(3 * out.mesh.n_nodes()) +
                           " unknowns, beyond the intended budget of 500000");

  // the periodic fine-scale material: phase of the wrapped centroid
  for (int e = 0; e < out.mesh.n_tets(); ++e) {
    const Vec3 c = out.mesh.tet_centroid(e);
    Vec3 beta;
    for (int ax = 0; ax < 3; ++ax) {
      const double x = c[ax] / epsilon;
      double b = x - std::floor(x);
      if (b >= 1.0) b = 0.0;
      beta[ax] = b;
    }
    out.mesh.material_tag[e] = classify_phase(phase, beta);
  }

  const Constraints bc = boundary_constraints(out.mesh, problem);
  if (bc.dirichlet.empty())
    throw ConfigError(
        "boundary conditions do not constrain any displacement; rigid "
        "motions are unconstrained");
  const DofMap dm = make_dof_map(out.mesh, bc);
  const AssembledSystem sys = assemble_stiffness(
      out.mesh, materials, model, StrainMode::Macro, Vec3::Zero(), dm);
  const std::vector<double> load = macro_load(out.mesh, model, problem);
  out.u = solve_displacement(sys, reduce_load(dm, load), out.mesh, dm, bc,
                             opts, &out.stats);
  return out;
}

std::vector<ConvergenceRow> convergence_study(
    const ConvergenceFixture& fixture, const std::vector<double>& epsilons,
    std::vector<std::string>* warnings) {
  if (epsilons.empty()) throw ConfigError("no scales to study");

  // homogenized pipeline, shared by every scale
  const TetMesh macro_mesh =
      generate_macro_mesh(fixture.domain, fixture.macro_divisions);
  const TetMesh cell =
      generate_unit_cell_mesh(fixture.cell_subdivisions, fixture.phase);
  RepresentativeSet reps;
  reps.lattice = select_representative_points(fixture.model, macro_mesh,
                                              fixture.representative_count);
  for (const Vec3& p : reps.lattice.points()) {
    CellSolver solver(cell, fixture.materials, fixture.model, p);
    reps.cells.push_back(solver.solve_all(fixture.threads));
  }
  const MacroSolution mac = solve_homogenized(macro_mesh, reps, fixture.model,
                                              fixture.problem, fixture.solve);

  std::vector<ConvergenceRow> rows;
  for (const double eps : epsilons) {
    DnsResult dns =
        dns_solve(fixture.domain, fixture.model, eps, fixture.phase,
                  fixture.materials, fixture.problem, fixture.dns_resolution,
                  fixture.solve);
    if (warnings)
      warnings->insert(warnings->end(), dns.warnings.begin(),
                       dns.warnings.end());
    ConvergenceRow row;
    row.epsilon = eps;
    row.dof = 3L * dns.mesh.n_nodes();
    for (int order = 0; order <= 2; ++order) {
      const TwoScaleField f =
          reconstruct(macro_mesh, mac, reps, fixture.model, eps, order,
                      dns.mesh, fixture.threads);
      const FieldNorms err = difference_norms(dns.mesh, dns.u, f.u2eps,
                                              fixture.model, StrainMode::Macro);
      row.l2[order] = err.l2;
      row.h1[order] = err.h1_semi;
    }
    rows.push_back(std::move(row));
  }

  for (size_t r = 1; r < rows.size(); ++r) {
    const double le = std::log(rows[r - 1].epsilon / rows[r].epsilon);
    if (le == 0.0) continue;
    for (int k = 0; k < 3; ++k) {
      if (rows[r - 1].l2[k] > 0.0 && rows[r].l2[k] > 0.0)
        rows[r].rate_l2[k] = std::log(rows[r - 1].l2[k] / rows[r].l2[k]) / le;
      if (rows[r - 1].h1[k] > 0.0 && rows[r].h1[k] > 0.0)
        rows[r].rate_h1[k] = std::log(rows[r - 1].h1[k] / rows[r].h1[k]) / le;
    }
  }
  return rows;
}

std::string convergence_csv(const std::vector<ConvergenceRow>& rows) {
  std::string out =
      "epsilon,dof,l2_order0,l2_order1,l2_order2,h1_order0,h1_order1,"
      "h1_order2,rate_l2_order0,rate_l2_order1,rate_l2_order2,rate_h1_order0,"
      "rate_h1_order1,rate_h1_order2\n";
  char buf[64];
  auto num = [&](double v) {
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    out += buf;
  };
  for (size_t r = 0; r < rows.size(); ++r) {
    const ConvergenceRow& row = rows[r];
    num(row.epsilon);
    out += "," + std::to_string(row.dof);
    for (int k = 0; k < 3; ++k) (out += ","), num(row.l2[k]);
    for (int k = 0; k < 3; ++k) (out += ","), num(row.h1[k]);
    for (int k = 0; k < 3; ++k) {
      out += ",";
      if (r > 0) num(row.rate_l2[k]);
    }
    for (int k = 0; k < 3; ++k) {
      out += ",";
      if (r > 0) num(row.rate_h1[k]);
    }
    out += "\n";
  }
  return out;
}

}  // namespace shellhom
