#include "shellhom/mesh.hpp"

#include <Eigen/Geometry>
#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "shellhom/errors.hpp"

namespace shellhom {

Vec3 TetMesh::tet_centroid(int e) const {
  const auto& t = tets[e];
  return 0.25 * (nodes[t[0]] + nodes[t[1]] + nodes[t[2]] + nodes[t[3]]);
}

double TetMesh::tet_volume(int e) const {
  const auto& t = tets[e];
  const Vec3 a = nodes[t[1]] - nodes[t[0]];
  const Vec3 b = nodes[t[2]] - nodes[t[0]];
  const Vec3 c = nodes[t[3]] - nodes[t[0]];
  return a.cross(b).dot(c) / 6.0;
}

double TetMesh::total_volume() const {
  double v = 0.0;
  for (int e = 0; e < n_tets(); ++e) v += tet_volume(e);
  return v;
}

int classify_phase(const PhaseGeometry& phase, const Vec3& beta) {
  return std::visit(
      [&](const auto& p) -> int {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, Uniform>) {
          return p.phase;
        } else if constexpr (std::is_same_v<T, Laminate>) {
          const double c = beta[p.axis];
          double cum = 0.0;
          for (const auto& [frac, id] : p.layers) {
            cum += frac;
            if (c < cum) return id;
          }
          return p.layers.back().second;  // c at the far boundary
        } else if constexpr (std::is_same_v<T, BoxInclusion>) {
          for (int i = 0; i < 3; ++i)
            if (std::fabs(beta[i] - p.center[i]) > p.half[i]) return 0;
          return p.phase;
        } else {
          return (beta - p.center).norm() <= p.radius ? p.phase : 0;
        }
      },
      phase);
}

int max_phase(const PhaseGeometry& phase) {
  return std::visit(
      [](const auto& p) -> int {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, Uniform>) {
          return p.phase;
        } else if constexpr (std::is_same_v<T, Laminate>) {
          int m = 0;
          for (const auto& [frac, id] : p.layers) m = std::max(m, id);
          return m;
        } else {
          return std::max(0, p.phase);
        }
      },
      phase);
}

static void validate_phase(const PhaseGeometry& phase) {
  if (const auto* lam = std::get_if<Laminate>(&phase)) {
    if (lam->axis < 0 || lam->axis > 2)
      throw ConfigError("laminate axis out of range");
    if (lam->layers.empty()) throw ConfigError("laminate has no layers");
    double sum = 0.0;
    for (const auto& [frac, id] : lam->layers) {
      if (frac <= 0.0) throw ConfigError("laminate fraction must be positive");
      if (id < 0) throw ConfigError("negative phase id");
      sum += frac;
    }
    if (std::fabs(sum - 1.0) > 1e-12)
      throw ConfigError("laminate fractions must sum to 1");
  }
}

// Kuhn split of one cube: walk from the low corner to the high corner along
// each axis permutation. Odd permutations get two vertices swapped so every
// tet has positive volume.
static constexpr int kPerm[6][3] = {{0, 1, 2}, {0, 2, 1}, {1, 0, 2},
                                    {1, 2, 0}, {2, 0, 1}, {2, 1, 0}};
static constexpr bool kPermOdd[6] = {false, true, true, false, false, true};

template <class NodeId>
static void emit_cube_tets(NodeId corner, std::vector<std::array<int, 4>>& out) {
  for (int s = 0; s < 6; ++s) {
    std::array<int, 3> step{0, 0, 0};
    std::array<int, 4> tet;
    tet[0] = corner(0, 0, 0);
    for (int k = 0; k < 3; ++k) {
      step[kPerm[s][k]] = 1;
      tet[k + 1] = corner(step[0], step[1], step[2]);
    }
    if (kPermOdd[s]) std::swap(tet[2], tet[3]);
    out.push_back(tet);
  }
}

// boundary facets: local faces numbered opposite each vertex, ordered so the
// normal points out of the tet
static constexpr int kTetFace[4][3] = {
    {1, 2, 3}, {0, 3, 2}, {0, 1, 3}, {0, 2, 1}};

static void tag_boundary_faces(TetMesh& mesh,
                               const std::array<std::array<double, 2>, 3>& rng) {
  const double tol = 1e-13;
  // a nondegenerate triangle lies on at most one of the 6 domain planes
  auto plane_tag = [&](const std::array<int, 3>& f) -> int {
    for (int t = 0; t < 6; ++t) {
      const int ax = t / 2;
      const double plane = rng[ax][t % 2];
      const double eps = tol * std::max(1.0, rng[ax][1] - rng[ax][0]);
      bool on = true;
      for (int v : f) on = on && std::fabs(mesh.nodes[v][ax] - plane) <= eps;
      if (on) return t;
    }
    return -1;
  };
  for (int e = 0; e < mesh.n_tets(); ++e) {
    for (const auto& lf : kTetFace) {
      const std::array<int, 3> f = {mesh.tets[e][lf[0]], mesh.tets[e][lf[1]],
                                    mesh.tets[e][lf[2]]};
      const int t = plane_tag(f);
      if (t >= 0) mesh.face_tags.push_back({f, t});
    }
  }
}

static TetMesh structured_box(const std::array<std::array<double, 2>, 3>& rng,
                              const std::array<int, 3>& div) {
  for (int ax = 0; ax < 3; ++ax) {
    if (div[ax] < 1) throw ConfigError("mesh divisions must be >= 1");
    if (!(rng[ax][1] > rng[ax][0]))
      throw ConfigError("degenerate domain extent on axis " +
                        std::to_string(ax + 1));
  }
  TetMesh mesh;
  const int nx = div[0] + 1, ny = div[1] + 1, nz = div[2] + 1;
  mesh.nodes.reserve(static_cast<size_t>(nx) * ny * nz);
  for (int k = 0; k < nz; ++k)
    for (int j = 0; j < ny; ++j)
      for (int i = 0; i < nx; ++i)
        mesh.nodes.emplace_back(
            rng[0][0] + (rng[0][1] - rng[0][0]) * i / div[0],
            rng[1][0] + (rng[1][1] - rng[1][0]) * j / div[1],
            rng[2][0] + (rng[2][1] - rng[2][0]) * k / div[2]);
  auto nid = [&](int i, int j, int k) { return i + nx * (j + ny * k); };
  mesh.tets.reserve(static_cast<size_t>(6) * div[0] * div[1] * div[2]);
  for (int k = 0; k < div[2]; ++k)
    for (int j = 0; j < div[1]; ++j)
      for (int i = 0; i < div[0]; ++i)
        emit_cube_tets(
            [&](int di, int dj, int dk) { return nid(i + di, j + dj, k + dk); },
            mesh.tets);
  mesh.material_tag.assign(mesh.n_tets(), 0);
  tag_boundary_faces(mesh, rng);
  return mesh;
}

TetMesh generate_unit_cell_mesh(int n, const PhaseGeometry& phase) {
  if (n < 1) throw ConfigError("unit cell subdivisions must be >= 1");
  validate_phase(phase);
  const std::array<std::array<double, 2>, 3> rng = {
      {{0.0, 1.0}, {0.0, 1.0}, {0.0, 1.0}}};
  TetMesh mesh = structured_box(rng, {n, n, n});
  for (int e = 0; e < mesh.n_tets(); ++e)
    mesh.material_tag[e] = classify_phase(phase, mesh.tet_centroid(e));
  for (int ax = 0; ax < 3; ++ax) {
    auto pairs = periodic_pairs(mesh, ax);
    mesh.periodic.insert(mesh.periodic.end(), pairs.begin(), pairs.end());
  }
  return mesh;
}

TetMesh generate_macro_mesh(const MacroDomain& dom,
                            const std::array<int, 3>& divisions) {
  return structured_box(dom.range, divisions);
}

std::vector<PeriodicPair> periodic_pairs(const TetMesh& mesh, int axis,
                                         double tol) {
  if (axis < 0 || axis > 2) throw ConfigError("periodic axis out of range");
  double lo = mesh.nodes[0][axis], hi = lo;
  for (const auto& p : mesh.nodes) {
    lo = std::min(lo, p[axis]);
    hi = std::max(hi, p[axis]);
  }
  const int t1 = (axis + 1) % 3, t2 = (axis + 2) % 3;
  // quantized transverse coordinates -> min-face node
  std::map<std::pair<int64_t, int64_t>, int> minface;
  auto key = [&](double a, double b) {
    return std::make_pair(static_cast<int64_t>(std::llround(a / tol)),
                          static_cast<int64_t>(std::llround(b / tol)));
  };
  for (int v = 0; v < mesh.n_nodes(); ++v)
    if (std::fabs(mesh.nodes[v][axis] - lo) <= tol)
      minface[key(mesh.nodes[v][t1], mesh.nodes[v][t2])] = v;
  std::vector<PeriodicPair> pairs;
  for (int v = 0; v < mesh.n_nodes(); ++v) {
    if (std::fabs(mesh.nodes[v][axis] - hi) > tol) continue;
    const double a = mesh.nodes[v][t1], b = mesh.nodes[v][t2];
    int found = -1;
    const auto base = key(a, b);
    for (int da = -1; da <= 1 && found < 0; ++da)
      for (int db = -1; db <= 1 && found < 0; ++db) {
        auto it = minface.find({base.first + da, base.second + db});
        if (it == minface.end()) continue;
        const Vec3& m = mesh.nodes[it->second];
        if (std::fabs(m[t1] - a) <= tol && std::fabs(m[t2] - b) <= tol)
          found = it->second;
      }
    if (found < 0)
      throw ConfigError("periodic_pairs: node " + std::to_string(v) +
                        " on axis " + std::to_string(axis + 1) +
                        " max face has no congruent partner");
    pairs.push_back({v, found, axis});
  }
  return pairs;
}

std::vector<int> resolve_periodic_masters(const TetMesh& mesh) {
  std::vector<int> parent(mesh.n_nodes());
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  };
  for (const auto& pp : mesh.periodic) {
    const int rs = find(pp.slave), rm = find(pp.master);
    if (rs != rm) parent[rs] = rm;
  }
  std::vector<int> root(mesh.n_nodes());
  for (int v = 0; v < mesh.n_nodes(); ++v) root[v] = find(v);
  return root;
}

std::vector<double> phase_fractions(const TetMesh& mesh) {
  int maxtag = 0;
  for (int t : mesh.material_tag) maxtag = std::max(maxtag, t);
  std::vector<double> frac(maxtag + 1, 0.0);
  double total = 0.0;
  for (int e = 0; e < mesh.n_tets(); ++e) {
    const double v = mesh.tet_volume(e);
    frac[mesh.material_tag[e]] += v;
    total += v;
  }
  for (double& f : frac) f /= total;
  return frac;
}

int structured_subdivisions(const TetMesh& mesh) {
  const int nn = mesh.n_nodes();
  const int side = static_cast<int>(std::llround(std::cbrt(double(nn))));
  if (side < 2 || side * side * side != nn) return 0;
  const int n = side - 1;
  for (int k = 0; k < side; ++k)
    for (int j = 0; j < side; ++j)
      for (int i = 0; i < side; ++i) {
        const Vec3& p = mesh.nodes[i + side * (j + side * k)];
        if (std::fabs(p[0] - double(i) / n) > 1e-12 ||
            std::fabs(p[1] - double(j) / n) > 1e-12 ||
            std::fabs(p[2] - double(k) / n) > 1e-12)
          return 0;
      }
  return n;
}

}  // namespace shellhom
