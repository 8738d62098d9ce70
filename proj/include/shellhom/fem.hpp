#pragma once
// Linear-tet FEM core for curvilinear elasticity. Strains come in two modes:
//   Micro: frozen-metric cell derivatives, e_ij = (s_i d_i u_j + s_j d_j u_i)/2
//          with s_i = 1/H_i(alpha_I) and no metric-coupling terms.
//   Macro: the full curvilinear strain with H evaluated at element centroids,
//          e_ii = psi_i(u_i) + sum_{j != i} c_ij u_j,
//          e_ij = (psi_i(u_j) + psi_j(u_i) - c_ji u_j - c_ij u_i)/2,
//          where psi_i = (1/H_i) d/dalpha_i and c_ij = dH_i/dalpha_j/(H_i H_j).
// One-point (centroid) quadrature everywhere; linear-tet strains are element
// constants, so only the metric weight and coupling terms are approximated.
//
// Degrees of freedom interleave as dof = 3*node + component. Displacement
// fields are flat vectors of length 3*n_nodes in that layout.

#include <Eigen/Sparse>
#include <array>
#include <functional>
#include <optional>
#include <vector>

#include "shellhom/curvilinear.hpp"
#include "shellhom/mesh.hpp"
#include "shellhom/tensor.hpp"

namespace shellhom {

enum class StrainMode { Micro, Macro };

struct DirichletBC {
  int node;
  int comp;
  double value;
};

struct Constraints {
  std::vector<DirichletBC> dirichlet;
  bool periodic = false;   // master-slave elimination of mesh.periodic
  bool zero_mean = false;  // volume-weighted zero mean per component
};

// full-dof -> reduced numbering; slaves follow their root master
struct DofMap {
  std::vector<int> red;      // size 3n; reduced id or -1 if fixed
  std::vector<double> fixed; // size 3n; Dirichlet value where red == -1
  std::vector<int> root;     // size n; periodic root node (identity if none)
  int n_reduced = 0;
};

DofMap make_dof_map(const TetMesh& mesh, const Constraints& bc);

struct ElementGeometry {
  std::array<Vec3, 4> grad;  // shape-function gradients, constant per tet
  double volume;
};

ElementGeometry element_geometry(const TetMesh& mesh, int e);

// 6x12 strain-displacement matrix in tensor components plus the metric
// weight Hprod used in the stiffness integrand
struct ElementB {
  double B[6][12];
  double volume;
  double Hweight;
};

ElementB element_B(const TetMesh& mesh, int e, const LameModel& model,
                   StrainMode mode, const Vec3& alpha_I);

struct AssembledSystem {
  Eigen::SparseMatrix<double> K;  // reduced, symmetric
  Eigen::VectorXd rhs_fixed;      // -K_ig g for Dirichlet dofs g
};

// materials looked up by mesh.material_tag; throws if a tag has no entry or
// an entry is not positive definite on strains
AssembledSystem assemble_stiffness(const TetMesh& mesh,
                                   const MaterialTable& materials,
                                   const LameModel& model, StrainMode mode,
                                   const Vec3& alpha_I, const DofMap& dm);

// per-element stiffness provider, for graded media where every element
// carries its own interpolated tensor; check_definite guards each element
using TensorProvider = std::function<const ElasticTensor&(int)>;
AssembledSystem assemble_stiffness(const TetMesh& mesh,
                                   const TensorProvider& C_of,
                                   const LameModel& model, StrainMode mode,
                                   const Vec3& alpha_I, const DofMap& dm,
                                   bool check_definite = true);

// fold a full-dof load vector into reduced numbering (slaves accumulate into
// masters, fixed dofs dropped)
Eigen::VectorXd reduce_load(const DofMap& dm, const std::vector<double>& load);

struct SolveOptions {
  double tol = 1e-10;   // relative residual
  long max_iter = 0;    // 0 = 50 * n_reduced
};

struct SolveStats {
  int iterations = 0;
  double rel_residual = 0.0;
  // per-component consistency corrections subtracted from the load before a
  // zero-mean solve (discrete solvability residual, logged not hidden)
  std::array<double, 3> mean_correction{0.0, 0.0, 0.0};
};

// Jacobi-preconditioned conjugate gradients on the reduced system. With
// bc.zero_mean the solve runs deflated against the per-component constant
// kernel and the result is shifted to volume-weighted zero mean, which is
// exactly the one-multiplier-per-component stationary point. Returns the
// expanded full nodal field. Throws NumericError at the iteration cap.
std::vector<double> solve_displacement(const AssembledSystem& sys,
                                       const Eigen::VectorXd& rhs,
                                       const TetMesh& mesh, const DofMap& dm,
                                       const Constraints& bc,
                                       const SolveOptions& opts = {},
                                       SolveStats* stats = nullptr);

// per-element strain of a nodal field
std::vector<Strain6> element_strain(const TetMesh& mesh,
                                    const std::vector<double>& u,
                                    const LameModel& model, StrainMode mode,
                                    const Vec3& alpha_I = Vec3::Zero());

// raw coordinate derivatives d u_j / d x_k (rows j, cols k) of one element
Eigen::Matrix3d element_grad(const TetMesh& mesh, int e,
                             const std::vector<double>& u);

// lumped nodal volumes (sum of adjacent tet volumes / 4)
std::vector<double> lumped_volumes(const TetMesh& mesh);

// energy u . K u of a full-dof field against an element-wise form; used by
// work-energy identities in tests
double strain_energy(const TetMesh& mesh, const MaterialTable& materials,
                     const LameModel& model, StrainMode mode,
                     const Vec3& alpha_I, const std::vector<double>& u);

}  // namespace shellhom
