#pragma once
// Homogenized macroscale problem over a functionally graded effective
// medium. Cell problems run at representative points; their homogenized
// tensors interpolate across the domain, and the macro solve feeds strain
// and strain-gradient fields to the reconstruction stage.

#include <array>
#include <vector>

#include "shellhom/cell.hpp"
#include "shellhom/curvilinear.hpp"
#include "shellhom/fem.hpp"
#include "shellhom/mesh.hpp"

namespace shellhom {

// Lattice of representative points. The Lame coefficients vary only through
// specific coordinates (none for plates, alpha3 for cylinders, alpha1 and
// alpha3 for doubly curved shells), so the lattice spans exactly those axes;
// the remaining coordinates sit at the domain centroid.
struct RepresentativeLattice {
  std::array<int, 2> axes{-1, -1};             // varying coordinates, -1 unused
  std::array<std::vector<double>, 2> grid;     // values along each used axis
  Vec3 base = Vec3::Zero();                    // fill-in for fixed coordinates

  int size() const;
  std::vector<Vec3> points() const;  // lexicographic, first axis outermost
  int nearest(const Vec3& alpha) const;
  // clamped multilinear weights over the lattice; writes up to 4 entries
  int weights(const Vec3& alpha, int idx[4], double w[4]) const;
};

RepresentativeLattice select_representative_points(const LameModel& model,
                                                   const TetMesh& macro_mesh,
                                                   int count_per_axis);

struct RepresentativeSet {
  RepresentativeLattice lattice;
  std::vector<CellSolutionSet> cells;  // one per lattice point, same order

  // componentwise piecewise-linear interpolation of the homogenized tensor,
  // clamped at the lattice ends
  ElasticTensor effective_tensor(const Vec3& alpha) const;
  const CellSolutionSet& nearest_cell(const Vec3& alpha) const;
  void validate() const;  // entry count and alpha_I placement
};

// boundary conditions per face tag (0..5: alpha1 min/max, alpha2 min/max,
// alpha3 min/max)
struct FaceCondition {
  enum Kind { Free, Dirichlet, Traction } kind = Free;
  std::array<bool, 3> fix{true, true, true};  // Dirichlet: which components
  Vec3 value = Vec3::Zero();  // Dirichlet values or traction vector
};

struct MacroProblem {
  Vec3 body_force = Vec3::Zero();
  std::array<FaceCondition, 6> faces;
  // optional per-element body force overriding the constant one
  std::vector<Vec3> element_force;
};

struct MacroSolution {
  NodalField u0;
  std::vector<Strain6> e0star;                       // per element
  std::vector<std::array<Strain6, 3>> grad_e0star;   // [element][j][mn]
  std::vector<char> gradient_boundary;  // 1 where recovery is one-sided
  SolveStats stats;
};

// consistent load vector for the problem's body force and tractions, with
// the metric weight H dOmega and the physical face measure (H/H_n) ds
std::vector<double> macro_load(const TetMesh& mesh, const LameModel& model,
                               const MacroProblem& problem);

// Dirichlet list for the problem's clamped faces. Nodes shared by several
// faces appear once per face; make_dof_map tolerates equal repeats and
// rejects conflicting values.
Constraints boundary_constraints(const TetMesh& mesh,
                                 const MacroProblem& problem);

MacroSolution solve_homogenized(const TetMesh& mesh,
                                const RepresentativeSet& reps,
                                const LameModel& model,
                                const MacroProblem& problem,
                                const SolveOptions& opts = {});

// per-element macroscopic strain of a displacement field (all metric
// coupling terms included)
std::vector<Strain6> macro_strain_e0star(const TetMesh& mesh,
                                         const NodalField& u0,
                                         const LameModel& model);

// psi_j-derivatives of the element strain field by nodal averaging followed
// by element-gradient evaluation; flags elements whose recovery touches the
// boundary (one-sided averaging)
void macro_strain_gradient(const TetMesh& mesh, const LameModel& model,
                           const std::vector<Strain6>& e0star,
                           std::vector<std::array<Strain6, 3>>& grad,
                           std::vector<char>& boundary_flag);

}  // namespace shellhom
