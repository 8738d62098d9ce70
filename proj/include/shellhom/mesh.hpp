#pragma once
// Structured tetrahedral meshes for the unit cell Q = (0,1)^3 and box/sector
// macro domains. Every hex cell is split into the same 6 Kuhn tets, so faces
// of adjacent cubes match node-for-node and the mesh is invariant under point
// reflection through lattice nodes.

#include <Eigen/Core>
#include <array>
#include <cstdint>
#include <string>
#include <variant>
#include <vector>

namespace shellhom {

using Vec3 = Eigen::Vector3d;

struct FaceTag {
  std::array<int, 3> nodes;
  int tag;  // 0:x-min 1:x-max 2:y-min 3:y-max 4:z-min 5:z-max
};

struct PeriodicPair {
  int slave;   // node on the axis max face
  int master;  // partner on the min face
  int axis;    // 0, 1, 2
};

struct TetMesh {
  std::vector<Vec3> nodes;
  std::vector<std::array<int, 4>> tets;
  std::vector<int> material_tag;       // per tet
  std::vector<FaceTag> face_tags;      // boundary facets
  std::vector<PeriodicPair> periodic;  // all axes, may be empty

  int n_nodes() const { return static_cast<int>(nodes.size()); }
  int n_tets() const { return static_cast<int>(tets.size()); }

  Vec3 tet_centroid(int e) const;
  double tet_volume(int e) const;  // signed; positive by construction
  double total_volume() const;
};

// --- phase classifiers ------------------------------------------------------

struct Uniform {
  int phase = 0;
};

struct Laminate {
  int axis = 2;  // 0-based layering axis
  std::vector<std::pair<double, int>> layers;  // (thickness fraction, phase)
};

struct BoxInclusion {
  Vec3 center;
  Vec3 half;
  int phase = 1;  // background is phase 0
};

struct SphereInclusion {
  Vec3 center;
  double radius = 0.25;
  int phase = 1;
};

using PhaseGeometry =
    std::variant<Uniform, Laminate, BoxInclusion, SphereInclusion>;

// phase id at a cell point; used on tet centroids (voxel classification)
int classify_phase(const PhaseGeometry& phase, const Vec3& beta);
// largest phase id the geometry can produce
int max_phase(const PhaseGeometry& phase);

// --- generators -------------------------------------------------------------

// n^3 cubes x 6 Kuhn tets on (0,1)^3, centroid-classified tags, periodic
// pairs populated for all three axes
TetMesh generate_unit_cell_mesh(int n, const PhaseGeometry& phase);

struct MacroDomain {
  // coordinate ranges per axis; for ShellSector alpha1/alpha2 are angles
  std::array<std::array<double, 2>, 3> range;
  enum Kind { Box, ShellSector } kind = Box;
};

TetMesh generate_macro_mesh(const MacroDomain& dom,
                            const std::array<int, 3>& divisions);

// per-axis pairing: every max-face node mapped to its min-face partner.
// Throws if any node fails to match within tol (mirror congruence).
std::vector<PeriodicPair> periodic_pairs(const TetMesh& mesh, int axis,
                                         double tol = 1e-10);

// resolve chained pairings (corner/edge nodes) to a unique root master:
// out[node] = representative node id, identity for unpaired nodes
std::vector<int> resolve_periodic_masters(const TetMesh& mesh);

// volume fraction of each phase tag, by tet volume
std::vector<double> phase_fractions(const TetMesh& mesh);

// subdivisions n of a structured unit-cell mesh ((n+1)^3 lexicographic grid
// nodes on [0,1]^3), or 0 when the layout does not match
int structured_subdivisions(const TetMesh& mesh);

}  // namespace shellhom
