#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <array>
#include <map>

#include "shellhom/errors.hpp"
#include "shellhom/mesh.hpp"

using namespace shellhom;

TEST_CASE("single-cube Kuhn split") {
  const TetMesh m = generate_unit_cell_mesh(1, Uniform{0});
  CHECK(m.n_nodes() == 8);
  CHECK(m.n_tets() == 6);
  for (int e = 0; e < 6; ++e) {
    CHECK(m.material_tag[e] == 0);
    CHECK(m.tet_volume(e) == doctest::Approx(1.0 / 6).epsilon(1e-14));
  }
  CHECK(m.total_volume() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("counts scale as 6n^3 tets and (n+1)^3 nodes") {
  const TetMesh m = generate_unit_cell_mesh(2, Uniform{0});
  CHECK(m.n_nodes() == 27);
  CHECK(m.n_tets() == 48);
  CHECK(m.total_volume() == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("laminate centroid classification") {
  const Laminate lam{2, {{0.5, 0}, {0.5, 1}}};
  const TetMesh m = generate_unit_cell_mesh(4, lam);
  for (int e = 0; e < m.n_tets(); ++e) {
    const int expect = m.tet_centroid(e)[2] < 0.5 ? 0 : 1;
    CHECK(m.material_tag[e] == expect);
  }
  const auto frac = phase_fractions(m);
  CHECK(frac[0] == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(frac[1] == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("laminate fraction validation") {
  CHECK_THROWS_AS(
      generate_unit_cell_mesh(2, Laminate{2, {{0.5, 0}, {0.4, 1}}}),
      ConfigError);
  CHECK_THROWS_AS(generate_unit_cell_mesh(0, Uniform{0}), ConfigError);
}

TEST_CASE("macro box meshes") {
  MacroDomain dom;
  dom.range = {{{0, 1}, {0, 1}, {0, 0.2}}};
  const TetMesh m = generate_macro_mesh(dom, {10, 10, 2});
  CHECK(m.n_tets() == 1200);
  CHECK(m.total_volume() == doctest::Approx(0.2).epsilon(1e-10));

  const TetMesh m1 = generate_macro_mesh(dom, {1, 1, 1});
  CHECK(m1.n_tets() == 6);

  MacroDomain bad;
  bad.range = {{{0, 1}, {1, 1}, {0, 0.2}}};
  CHECK_THROWS_AS(generate_macro_mesh(bad, {2, 2, 2}), ConfigError);
}

TEST_CASE("shell sector mesh covers the stated ranges") {
  const double a = 3.14159265358979 / 9, t = 3.14159265358979 / 54;
  MacroDomain dom;
  dom.range = {{{-a, a}, {-a, a}, {-t, t}}};
  dom.kind = MacroDomain::ShellSector;
  const TetMesh m = generate_macro_mesh(dom, {4, 4, 2});
  for (const auto& p : m.nodes) {
    CHECK(p[0] >= -a - 1e-14);
    CHECK(p[0] <= a + 1e-14);
    CHECK(p[2] >= -t - 1e-14);
    CHECK(p[2] <= t + 1e-14);
  }
}

TEST_CASE("Kuhn split is conforming: every interior face shared by 2 tets") {
  const TetMesh m = generate_unit_cell_mesh(3, Uniform{0});
  std::map<std::array<int, 3>, int> faces;
  static const int lf[4][3] = {{1, 2, 3}, {0, 3, 2}, {0, 1, 3}, {0, 2, 1}};
  for (const auto& t : m.tets)
    for (const auto& f : lf) {
      std::array<int, 3> key = {t[f[0]], t[f[1]], t[f[2]]};
      std::sort(key.begin(), key.end());
      faces[key]++;
    }
  int boundary = 0;
  for (const auto& [key, count] : faces) {
    CHECK(count <= 2);
    if (count == 1) ++boundary;
  }
  CHECK(boundary == 12 * 3 * 3);  // 2 triangles per square face per axis side
  CHECK(m.face_tags.size() == static_cast<size_t>(boundary));
}

TEST_CASE("boundary faces carry exactly one tag each") {
  const TetMesh m = generate_unit_cell_mesh(2, Uniform{0});
  std::map<std::array<int, 3>, int> seen;
  for (const auto& f : m.face_tags) {
    std::array<int, 3> key = f.nodes;
    std::sort(key.begin(), key.end());
    CHECK(seen.count(key) == 0);
    seen[key] = f.tag;
    // all three nodes on the tagged plane
    const int ax = f.tag / 2;
    const double plane = f.tag % 2;
    for (int k = 0; k < 3; ++k)
      CHECK(m.nodes[f.nodes[k]][ax] == doctest::Approx(plane).epsilon(1e-14));
  }
}

TEST_CASE("periodic pairing on the unit cell") {
  const TetMesh m = generate_unit_cell_mesh(2, Uniform{0});
  const auto ax3 = periodic_pairs(m, 2);
  CHECK(ax3.size() == 9);  // (n+1)^2 face nodes
  for (const auto& p : ax3) {
    CHECK(m.nodes[p.slave][2] == doctest::Approx(1.0));
    CHECK(m.nodes[p.master][2] == doctest::Approx(0.0));
    for (int t : {0, 1})
      CHECK(std::abs(m.nodes[p.slave][t] - m.nodes[p.master][t]) < 1e-12);
  }
}

TEST_CASE("corner chain resolves to a single master") {
  const TetMesh m = generate_unit_cell_mesh(1, Uniform{0});
  const auto root = resolve_periodic_masters(m);
  // all 8 corners of the unit cube collapse to one representative
  for (int v = 0; v < 8; ++v) CHECK(root[v] == root[0]);
  int masters = 0;
  for (int v = 0; v < 8; ++v)
    if (root[v] == v) ++masters;
  CHECK(masters == 1);
}

TEST_CASE("slave coordinates equal master modulo the period") {
  const TetMesh m = generate_unit_cell_mesh(3, Uniform{0});
  for (const auto& p : m.periodic) {
    Vec3 shifted = m.nodes[p.slave];
    shifted[p.axis] -= 1.0;
    CHECK((shifted - m.nodes[p.master]).norm() < 1e-12);
  }
}

TEST_CASE("non-congruent faces are rejected") {
  TetMesh m = generate_unit_cell_mesh(2, Uniform{0});
  // push one max-face node sideways beyond the matching tolerance
  for (int v = 0; v < m.n_nodes(); ++v)
    if (m.nodes[v][2] == 1.0 && m.nodes[v][0] == 0.5 && m.nodes[v][1] == 0.5) {
      m.nodes[v][0] += 1e-3;
      break;
    }
  CHECK_THROWS_AS(periodic_pairs(m, 2), ConfigError);
}

TEST_CASE("inclusion classifiers") {
  const BoxInclusion box{Vec3(0.5, 0.5, 0.5), Vec3(0.25, 0.25, 0.25), 1};
  CHECK(classify_phase(box, Vec3(0.5, 0.5, 0.5)) == 1);
  CHECK(classify_phase(box, Vec3(0.1, 0.5, 0.5)) == 0);
  const SphereInclusion sph{Vec3(0.5, 0.5, 0.5), 0.3, 2};
  CHECK(classify_phase(sph, Vec3(0.5, 0.5, 0.7)) == 2);
  CHECK(classify_phase(sph, Vec3(0.5, 0.5, 0.85)) == 0);
  // voxel volume fraction approaches the sphere volume
  const TetMesh m = generate_unit_cell_mesh(16, sph);
  const auto frac = phase_fractions(m);
  const double exact = 4.0 / 3.0 * 3.14159265358979 * 0.3 * 0.3 * 0.3;
  CHECK(frac[2] == doctest::Approx(exact).epsilon(0.06));
}
