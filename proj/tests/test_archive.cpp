// Field archive format: dataset container semantics, text round-trips, and
// the cell-solution archive including the rebuilt per-element D field.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <cstdio>
#include <cstring>
#include <limits>
#include <string>
#include <vector>

#include "doctest.h"
#include "shellhom/archive.hpp"
#include "shellhom/cell.hpp"
#include "shellhom/errors.hpp"
#include "shellhom/mesh.hpp"

using namespace shellhom;

TEST_CASE("dataset container: add, lookup, shape checks") {
  FieldFile ff;
  ff.add("a", 2, 3, {1, 2, 3, 4, 5, 6});
  ff.add("b", 1, 1, {42.0});

  CHECK(ff.has("a"));
  CHECK(ff.has("b"));
  CHECK(!ff.has("c"));

  const Dataset& a = ff.get("a");
  CHECK(a.rows == 2);
  CHECK(a.cols == 3);
  CHECK(a.values[4] == 5.0);

  CHECK_NOTHROW(ff.get("a", 2, 3));
  CHECK_NOTHROW(ff.get("a", -1, 3));
  CHECK_THROWS_AS(ff.get("a", 3, 2), IoError);   // transposed shape
  CHECK_THROWS_AS(ff.get("missing"), IoError);

  // value count must match the declared shape
  CHECK_THROWS_AS(ff.add("short", 2, 2, {1, 2, 3}), IoError);
  // duplicate names are ambiguous on read-back
  CHECK_THROWS_AS(ff.add("a", 1, 1, {0.0}), IoError);
  // names embed into whitespace-delimited headers
  CHECK_THROWS_AS(ff.add("bad name", 1, 1, {0.0}), IoError);
  CHECK_THROWS_AS(ff.add("", 1, 1, {0.0}), IoError);
}

TEST_CASE("text round-trip is bit exact for awkward doubles") {
  FieldFile ff;
  ff.config_hash = 0xdeadbeefcafe1234ull;
  std::vector<double> vals = {
      1.0 / 3.0,
      0.1,
      -0.0,
      std::numeric_limits<double>::denorm_min(),
      std::numeric_limits<double>::max(),
      -std::numeric_limits<double>::min(),
      3.141592653589793,
      -2.2250738585072014e-308,
      1e300,
      6.62e-34,
      0.0,
      123456789.123456789,
  };
  ff.add("vals", 3, 4, vals);

  const std::string text = ff.to_string();
  FieldFile back = FieldFile::from_string(text);

  CHECK(back.config_hash == ff.config_hash);
  const auto& rv = back.get("vals", 3, 4).values;
  REQUIRE(rv.size() == vals.size());
  for (size_t i = 0; i < vals.size(); ++i) {
    // bitwise comparison; shortest round-trip formatting must not lose ulps
    CHECK(std::memcmp(&rv[i], &vals[i], sizeof(double)) == 0);
  }

  // serialization is a fixed point: text -> parse -> text is identical
  CHECK(back.to_string() == text);
}

TEST_CASE("file write and read") {
  FieldFile ff;
  ff.config_hash = 7;
  ff.add("m", 2, 2, {1.5, -2.5, 3.5, -4.5});

  const std::string path = "archive_test_tmp.fld";
  ff.write(path);
  FieldFile back = FieldFile::read(path);
  CHECK(back.config_hash == 7);
  CHECK(back.get("m", 2, 2).values[3] == -4.5);
  std::remove(path.c_str());

  CHECK_THROWS_AS(FieldFile::read("no_such_directory/no_such_file.fld"),
                  IoError);
}

TEST_CASE("malformed inputs are rejected with parse errors") {
  const std::string good =
      "$ShellhomFields 1\n"
      "$Config 0000000000000007\n"
      "$Data m 1 2\n"
      "1 2\n"
      "$End\n";
  CHECK_NOTHROW(FieldFile::from_string(good));

  CHECK_THROWS_AS(FieldFile::from_string(""), IoError);
  CHECK_THROWS_AS(FieldFile::from_string("$WrongMagic 1\n"), IoError);
  // unsupported future version
  CHECK_THROWS_AS(FieldFile::from_string("$ShellhomFields 2\n"
                                         "$Config 0000000000000000\n"
                                         "$End\n"),
                  IoError);
  // missing config line
  CHECK_THROWS_AS(FieldFile::from_string("$ShellhomFields 1\n$End\n"),
                  IoError);
  // truncated data block
  CHECK_THROWS_AS(FieldFile::from_string("$ShellhomFields 1\n"
                                         "$Config 0000000000000000\n"
                                         "$Data m 2 2\n"
                                         "1 2\n"),
                  IoError);
  // row with too few values
  CHECK_THROWS_AS(FieldFile::from_string("$ShellhomFields 1\n"
                                         "$Config 0000000000000000\n"
                                         "$Data m 1 3\n"
                                         "1 2\n"
                                         "$End\n"),
                  IoError);
  // row with trailing garbage
  CHECK_THROWS_AS(FieldFile::from_string("$ShellhomFields 1\n"
                                         "$Config 0000000000000000\n"
                                         "$Data m 1 2\n"
                                         "1 2 3\n"
                                         "$End\n"),
                  IoError);
  // non-numeric entry
  CHECK_THROWS_AS(FieldFile::from_string("$ShellhomFields 1\n"
                                         "$Config 0000000000000000\n"
                                         "$Data m 1 2\n"
                                         "1 x\n"
                                         "$End\n"),
                  IoError);
  // missing terminator
  CHECK_THROWS_AS(FieldFile::from_string("$ShellhomFields 1\n"
                                         "$Config 0000000000000000\n"
                                         "$Data m 1 2\n"
                                         "1 2\n"),
                  IoError);
  // negative dimensions
  CHECK_THROWS_AS(FieldFile::from_string("$ShellhomFields 1\n"
                                         "$Config 0000000000000000\n"
                                         "$Data m -1 2\n"
                                         "$End\n"),
                  IoError);
}

namespace {

bool fields_equal(const NodalField& a, const NodalField& b) {
  if (a.size() != b.size()) return false;
  for (size_t i = 0; i < a.size(); ++i)
    if (std::memcmp(&a[i], &b[i], sizeof(double)) != 0) return false;
  return true;
}

}  // namespace

TEST_CASE("cell solution archive round-trips every field") {
  // curved metric so D and W are nonzero and the rebuilt D is a real check
  Laminate lam;
  lam.axis = 2;
  lam.layers = {{0.5, 0}, {0.5, 1}};
  TetMesh cell = generate_unit_cell_mesh(4, lam);
  MaterialTable mats(2);
  mats[0].C = isotropic_tensor(1.0, 0.3);
  mats[1].C = isotropic_tensor(10.0, 0.2);
  const LameModel model = CylindricalMetric{4.0};
  const Vec3 aI(0.3, 0.2, 0.1);

  CellSolver solver(cell, mats, model, aI);
  CellSolutionSet sol = solver.solve_all();

  const uint64_t hash = 0x0123456789abcdefull;
  FieldFile ff = cell_solution_to_fields(sol, hash);
  CHECK(ff.config_hash == hash);

  // through text and back, then reconstruct against the same mesh
  FieldFile back = FieldFile::from_string(ff.to_string());
  CellSolutionSet rec = cell_solution_from_fields(back, cell);

  CHECK(rec.alpha_I == sol.alpha_I);
  for (int i = 0; i < 3; ++i) {
    CHECK(rec.metric.H[i] == sol.metric.H[i]);
    for (int j = 0; j < 3; ++j) CHECK(rec.metric.dH[i][j] == sol.metric.dH[i][j]);
  }
  CHECK(rec.metric.Hprod == sol.metric.Hprod);
  CHECK(rec.subdivisions == sol.subdivisions);
  CHECK(max_abs_diff(rec.C_hat, sol.C_hat) == 0.0);
  CHECK(rec.asymmetry == sol.asymmetry);
  CHECK(rec.max_mean_correction == sol.max_mean_correction);

  for (int q = 0; q < 6; ++q) {
    CHECK(fields_equal(rec.N1[q], sol.N1[q]));
    CHECK(fields_equal(rec.W[q], sol.W[q]));
    for (int j = 0; j < 3; ++j) CHECK(fields_equal(rec.N2[j][q], sol.N2[j][q]));
  }

  // D is rebuilt from the stored metric and N1; same inputs, same arithmetic
  REQUIRE(rec.D.size() == sol.D.size());
  double dmax = 0.0;
  for (size_t e = 0; e < sol.D.size(); ++e)
    for (int p = 0; p < 6; ++p)
      for (int q = 0; q < 6; ++q)
        dmax = std::max(dmax, std::fabs(rec.D[e][p][q] - sol.D[e][p][q]));
  CHECK(dmax == 0.0);

  // dataset inventory is fixed: 7 headers + 6 N1 + 18 N2 + 6 W
  CHECK(ff.datasets().size() == 7 + 6 + 18 + 6);

  // reconstructing against a mesh of the wrong size must fail loudly
  TetMesh other = generate_unit_cell_mesh(2, lam);
  CHECK_THROWS_AS(cell_solution_from_fields(back, other), IoError);
}
