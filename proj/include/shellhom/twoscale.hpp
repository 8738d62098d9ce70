#pragma once
// Two-scale field reconstruction on a fine evaluation mesh. The macroscopic
// displacement and its strain data are interpolated from the macro mesh; the
// periodic cell functions are evaluated at the wrapped cell coordinate
// beta = frac(alpha / epsilon) and superposed order by order:
//   order 0:  u0
//   order 1:  u0 + eps N^(mn) e_mn
//   order 2:  ... + eps^2 [N^(j,mn) psi_j(e_mn) + W^(mn) e_mn]
// Strain and stress of the reconstruction are element fields on the
// evaluation mesh, the stress using the local phase tensor at beta.

#include <array>
#include <string>
#include <vector>

#include "shellhom/macro.hpp"
#include "shellhom/mesh.hpp"

namespace shellhom {

// wrapped cell coordinate, componentwise frac(alpha_i / epsilon) in [0, 1)
Vec3 map_to_cell(const Vec3& alpha, double epsilon);

struct TwoScaleField {
  TetMesh mesh;  // evaluation mesh
  double epsilon = 0.0;
  int order = 0;
  NodalField u0_interp;  // macro displacement interpolated to the eval nodes
  NodalField u1eps;      // + first-order cell correction (order >= 1)
  NodalField u2eps;      // + second-order corrections (order == 2)
  std::vector<Strain6> strain2eps;  // per eval element, from reconstruct_strain
  std::vector<Strain6> stress2eps;  // per eval element, from reconstruct_stress
};

// point location with barycentric interpolation over a tet mesh; bins element
// bounding boxes on a uniform grid so repeated queries stay O(1)
class MeshInterpolant {
 public:
  explicit MeshInterpolant(const TetMesh& mesh);
  // containing element and its barycentric weights; throws ConfigError for
  // points outside the mesh
  int locate(const Vec3& p, double bary[4]) const;

 private:
  const TetMesh& mesh_;
  Vec3 lo_, hi_;
  std::array<int, 3> nb_{1, 1, 1};
  std::vector<std::vector<int>> bins_;
  double tol_ = 0.0;

  int bin_of(const Vec3& p) const;
};

// lower orders leave the higher fields equal to the last computed one, so
// u2eps always holds the requested approximant
TwoScaleField reconstruct(const TetMesh& macro_mesh, const MacroSolution& macro,
                          const RepresentativeSet& reps, const LameModel& model,
                          double epsilon, int order, const TetMesh& eval_mesh,
                          int threads = 1);

// element strains of u2eps with the full curvilinear operator; warns when the
// evaluation mesh resolves a period with fewer than min_per_period elements
void reconstruct_strain(TwoScaleField& field, const LameModel& model,
                        int min_per_period = 8,
                        std::vector<std::string>* warnings = nullptr);

// pointwise constitutive product with the phase tensor at the wrapped cell
// coordinate of each element centroid (the local material, not the
// homogenized one); the classified phase is also recorded in the evaluation
// mesh's material tags for downstream consumers
void reconstruct_stress(TwoScaleField& field, const PhaseGeometry& phase,
                        const MaterialTable& materials);

// uniform divisions resolving every epsilon-period with at least per_period
// elements on each axis
std::array<int, 3> recommended_eval_divisions(
    const std::array<std::array<double, 2>, 3>& range, double epsilon,
    int per_period = 8);

}  // namespace shellhom
