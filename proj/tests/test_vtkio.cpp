// Legacy-VTK writer: structural layout of the emitted file, deterministic
// round-trip-exact numbers, and input validation.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "shellhom/errors.hpp"
#include "shellhom/mesh.hpp"
#include "shellhom/vtk_io.hpp"

using namespace shellhom;

namespace {

std::vector<std::string> tokens(const std::string& text) {
  std::istringstream ss(text);
  std::vector<std::string> out;
  std::string t;
  while (ss >> t) out.push_back(t);
  return out;
}

int find(const std::vector<std::string>& tok, const std::string& word) {
  for (size_t i = 0; i < tok.size(); ++i)
    if (tok[i] == word) return static_cast<int>(i);
  return -1;
}

}  // namespace

TEST_CASE("file layout") {
  const TetMesh mesh = generate_unit_cell_mesh(1, Uniform{0});
  REQUIRE(mesh.n_nodes() == 8);
  REQUIRE(mesh.n_tets() == 6);

  VtkOutput out;
  NodalField u(3 * mesh.n_nodes());
  for (size_t i = 0; i < u.size(); ++i) u[i] = 0.125 * double(i);
  out.point_vectors.emplace_back("displacement", u);
  std::vector<double> vm(mesh.n_tets());
  for (int e = 0; e < mesh.n_tets(); ++e) vm[e] = 1.0 / (1 + e);
  out.cell_scalars.emplace_back("von_mises", vm);
  std::vector<Strain6> sig(mesh.n_tets());
  for (int e = 0; e < mesh.n_tets(); ++e)
    sig[e] = {1.0 * e, 2.0, 3.0, 0.5, 0.25, 0.125};
  out.cell_tensors.emplace_back("stress", sig);

  const std::string text = vtk_to_string(mesh, out, "unit test");

  // header lines in required order
  std::istringstream ss(text);
  std::string line;
  std::getline(ss, line);
  CHECK(line == "# vtk DataFile Version 3.0");
  std::getline(ss, line);
  CHECK(line == "unit test");
  std::getline(ss, line);
  CHECK(line == "ASCII");
  std::getline(ss, line);
  CHECK(line == "DATASET UNSTRUCTURED_GRID");

  const auto tok = tokens(text);
  const int p = find(tok, "POINTS");
  REQUIRE(p >= 0);
  CHECK(tok[p + 1] == "8");
  CHECK(tok[p + 2] == "double");
  // first node of the unit cell is the origin
  CHECK(tok[p + 3] == "0");
  CHECK(tok[p + 4] == "0");
  CHECK(tok[p + 5] == "0");

  const int c = find(tok, "CELLS");
  REQUIRE(c >= 0);
  CHECK(tok[c + 1] == "6");
  CHECK(tok[c + 2] == "30");
  CHECK(tok[c + 3] == "4");  // every cell stated as 4 nodes

  const int ct = find(tok, "CELL_TYPES");
  REQUIRE(ct >= 0);
  for (int e = 0; e < 6; ++e) CHECK(tok[ct + 2 + e] == "10");

  const int pd = find(tok, "POINT_DATA");
  REQUIRE(pd >= 0);
  CHECK(tok[pd + 1] == "8");
  const int vec = find(tok, "VECTORS");
  REQUIRE(vec > pd);
  CHECK(tok[vec + 1] == "displacement");
  CHECK(std::strtod(tok[vec + 3].c_str(), nullptr) == 0.0);
  CHECK(std::strtod(tok[vec + 4].c_str(), nullptr) == 0.125);

  const int cd = find(tok, "CELL_DATA");
  REQUIRE(cd > pd);
  CHECK(tok[cd + 1] == "6");
  const int sc = find(tok, "SCALARS");
  REQUIRE(sc > cd);
  CHECK(tok[sc + 1] == "von_mises");
  CHECK(tok[sc + 5] == "default");

  // tensor block: 9 entries per element, symmetric expansion of the pairs
  const int tn = find(tok, "TENSORS");
  REQUIRE(tn > cd);
  CHECK(tok[tn + 1] == "stress");
  const char* expect0[9] = {"0",   "0.5",  "0.125", "0.5",   "2",
                            "0.25", "0.125", "0.25", "3"};
  for (int k = 0; k < 9; ++k) CHECK(tok[tn + 3 + k] == expect0[k]);
}

TEST_CASE("determinism and exact numbers") {
  const TetMesh mesh = generate_unit_cell_mesh(2, Uniform{0});
  VtkOutput out;
  NodalField u(3 * mesh.n_nodes());
  for (size_t i = 0; i < u.size(); ++i)
    u[i] = 1.0 / 3.0 + 1e-17 * double(i % 7);
  out.point_vectors.emplace_back("u", u);

  const std::string a = vtk_to_string(mesh, out);
  const std::string b = vtk_to_string(mesh, out);
  CHECK(a == b);

  // every printed value parses back to the exact double
  const auto tok = tokens(a);
  const int vec = find(tok, "VECTORS");
  REQUIRE(vec >= 0);
  for (size_t i = 0; i < u.size(); ++i) {
    const double back = std::strtod(tok[vec + 3 + i].c_str(), nullptr);
    CHECK(back == u[i]);
  }
}

TEST_CASE("validation and file output") {
  const TetMesh mesh = generate_unit_cell_mesh(1, Uniform{0});
  VtkOutput out;
  out.point_vectors.emplace_back("u", NodalField(5, 0.0));
  CHECK_THROWS_AS(vtk_to_string(mesh, out), ConfigError);

  out.point_vectors.clear();
  out.cell_scalars.emplace_back("bad name", std::vector<double>(6, 0.0));
  CHECK_THROWS_AS(vtk_to_string(mesh, out), IoError);
  out.cell_scalars[0].first = "";
  CHECK_THROWS_AS(vtk_to_string(mesh, out), IoError);
  out.cell_scalars[0].first = "ok";
  out.cell_tensors.emplace_back("t", std::vector<Strain6>(2));
  CHECK_THROWS_AS(vtk_to_string(mesh, out), ConfigError);
  out.cell_tensors.clear();

  const char* path = "vtk_io_test_out.vtk";
  write_vtk(path, mesh, out);
  std::ifstream f(path, std::ios::binary);
  REQUIRE(f.good());
  std::stringstream buf;
  buf << f.rdbuf();
  CHECK(buf.str() == vtk_to_string(mesh, out));
  std::remove(path);

  CHECK_THROWS_AS(write_vtk("no/such/dir/x.vtk", mesh, out), IoError);
}
