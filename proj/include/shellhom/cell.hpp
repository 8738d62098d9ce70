#pragma once
// First- and second-order periodic cell problems at a representative macro
// point alpha_I, with the metric frozen there. Load-case ordering is fixed
// everywhere: strain pairs (mn) in {11,22,33,12,23,13}, gradient direction
// j in {1,2,3}; archives record fields in that order.
//
// All cell solves share one assembled operator; the 6 + 18 + 6 load cases
// are independent and may run on a thread pool, with results written to
// case-indexed slots so the output is schedule-independent.

#include <array>
#include <vector>

#include "shellhom/fem.hpp"

namespace shellhom {

using NodalField = std::vector<double>;  // 3*n_nodes, dof = 3*node+comp
using N1Set = std::array<NodalField, 6>;
using N2Set = std::array<std::array<NodalField, 6>, 3>;  // [j][mn]
using WSet = std::array<NodalField, 6>;
// per-element D_klmn, rows (kl), cols (mn)
using DField = std::vector<std::array<std::array<double, 6>, 6>>;

struct CellSolutionSet {
  Vec3 alpha_I = Vec3::Zero();
  MetricSample metric;
  int subdivisions = 0;
  N1Set N1;
  DField D;
  N2Set N2;
  WSet W;
  ElasticTensor C_hat;
  double asymmetry = 0.0;        // relative major asymmetry of raw C_hat
  double max_mean_correction = 0.0;  // largest logged solvability projection
};

class CellSolver {
 public:
  // mesh must outlive the solver and carry full periodic pairing
  CellSolver(const TetMesh& mesh, const MaterialTable& materials,
             const LameModel& model, const Vec3& alpha_I);

  N1Set solve_first_order(int threads = 1);
  ElasticTensor homogenized_tensor(const N1Set& N1, double* asymmetry = nullptr,
                                   bool strict = false);
  DField compute_D(const N1Set& N1) const;
  N2Set solve_second_order_N2(const N1Set& N1, const ElasticTensor& C_hat,
                              int threads = 1,
                              double* max_mean_correction = nullptr);
  WSet solve_second_order_W(const N1Set& N1, const ElasticTensor& C_hat,
                            const DField& D, int threads = 1,
                            double* max_mean_correction = nullptr);

  // the whole ladder in order, returning a complete solution set
  CellSolutionSet solve_all(int threads = 1, bool strict = false);

  const TetMesh& mesh() const { return mesh_; }
  const MetricSample& metric() const { return metric_; }

 private:
  NodalField solve_case(const std::vector<double>& load, SolveStats* stats);
  void ensure_strains(const N1Set& N1);

  const TetMesh& mesh_;
  MaterialTable materials_;
  LameModel model_;
  Vec3 alpha_I_;
  MetricSample metric_;
  double cc_[3][3];  // c_ij = dH_i/dalpha_j / (H_i H_j) at alpha_I
  Constraints bc_;
  DofMap dm_;
  AssembledSystem sys_;
  double volume_ = 0.0;
  double c_scale_ = 0.0;  // max |C| over used phases, solvability scale
  std::array<std::vector<Strain6>, 6> strains1_;  // micro strains of N1
  bool have_strains_ = false;
};

// contract-level conveniences (assemble on each call)
N1Set solve_first_order(const TetMesh& cell, const MaterialTable& materials,
                        const LameModel& model, const Vec3& alpha_I);
ElasticTensor homogenized_tensor(const TetMesh& cell,
                                 const MaterialTable& materials,
                                 const LameModel& model, const Vec3& alpha_I,
                                 const N1Set& N1, double* asymmetry = nullptr,
                                 bool strict = false);
DField compute_D(const TetMesh& cell, const LameModel& model,
                 const Vec3& alpha_I, const N1Set& N1);
DField compute_D(const TetMesh& cell, const MetricSample& metric,
                 const N1Set& N1);

}  // namespace shellhom
