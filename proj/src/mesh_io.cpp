#include "shellhom/mesh_io.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "shellhom/errors.hpp"

namespace shellhom {

std::string format_double(double x) {
  char buf[40];
  for (int prec = 15; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof buf, "%.*g", prec, x);
    if (std::strtod(buf, nullptr) == x) break;
  }
  return buf;
}

static void expect_section(std::istream& in, const std::string& name) {
  std::string tok;
  if (!(in >> tok) || tok != name)
    throw IoError("mesh file: expected section " + name + ", got '" + tok +
                  "'");
}

std::string mesh_to_string(const TetMesh& mesh, const MaterialTable* materials) {
  std::ostringstream os;
  os << "$ShellhomMesh " << kMeshFormatVersion << "\n";
  os << "$Nodes\n" << mesh.n_nodes() << "\n";
  for (int v = 0; v < mesh.n_nodes(); ++v)
    os << v << " " << format_double(mesh.nodes[v][0]) << " "
       << format_double(mesh.nodes[v][1]) << " "
       << format_double(mesh.nodes[v][2]) << "\n";
  os << "$Tets\n" << mesh.n_tets() << "\n";
  for (int e = 0; e < mesh.n_tets(); ++e)
    os << e << " " << mesh.tets[e][0] << " " << mesh.tets[e][1] << " "
       << mesh.tets[e][2] << " " << mesh.tets[e][3] << " "
       << mesh.material_tag[e] << "\n";
  os << "$FaceTags\n" << mesh.face_tags.size() << "\n";
  for (const auto& f : mesh.face_tags)
    os << f.nodes[0] << " " << f.nodes[1] << " " << f.nodes[2] << " " << f.tag
       << "\n";
  os << "$Periodic\n" << mesh.periodic.size() << "\n";
  for (const auto& p : mesh.periodic)
    os << p.slave << " " << p.master << " " << p.axis + 1 << "\n";
  if (materials) {
    os << "$Material\n" << materials->size() << "\n";
    for (size_t ph = 0; ph < materials->size(); ++ph) {
      os << ph;
      const ElasticTensor& C = (*materials)[ph].C;
      for (int p = 0; p < 6; ++p)
        for (int q = p; q < 6; ++q) os << " " << format_double(C(p, q));
      os << " " << format_double((*materials)[ph].yield_strength) << "\n";
    }
  }
  return os.str();
}

TetMesh mesh_from_string(const std::string& text, MaterialTable* materials) {
  std::istringstream in(text);
  std::string tok;
  int version = 0;
  expect_section(in, "$ShellhomMesh");
  if (!(in >> version) || version != kMeshFormatVersion)
    throw IoError("mesh file: unsupported format version");
  TetMesh mesh;
  expect_section(in, "$Nodes");
  int nn = 0;
  if (!(in >> nn) || nn < 0) throw IoError("mesh file: bad node count");
  mesh.nodes.resize(nn);
  for (int v = 0; v < nn; ++v) {
    int id;
    double x, y, z;
    if (!(in >> id >> x >> y >> z) || id != v)
      throw IoError("mesh file: bad node line " + std::to_string(v));
    mesh.nodes[v] = Vec3(x, y, z);
  }
  expect_section(in, "$Tets");
  int nt = 0;
  if (!(in >> nt) || nt < 0) throw IoError("mesh file: bad tet count");
  mesh.tets.resize(nt);
  mesh.material_tag.resize(nt);
  for (int e = 0; e < nt; ++e) {
    int id;
    auto& t = mesh.tets[e];
    if (!(in >> id >> t[0] >> t[1] >> t[2] >> t[3] >> mesh.material_tag[e]) ||
        id != e)
      throw IoError("mesh file: bad tet line " + std::to_string(e));
    for (int k = 0; k < 4; ++k)
      if (t[k] < 0 || t[k] >= nn) throw IoError("mesh file: tet node out of range");
  }
  expect_section(in, "$FaceTags");
  int nf = 0;
  if (!(in >> nf) || nf < 0) throw IoError("mesh file: bad face count");
  mesh.face_tags.resize(nf);
  for (int f = 0; f < nf; ++f) {
    auto& ft = mesh.face_tags[f];
    if (!(in >> ft.nodes[0] >> ft.nodes[1] >> ft.nodes[2] >> ft.tag))
      throw IoError("mesh file: bad face line " + std::to_string(f));
  }
  expect_section(in, "$Periodic");
  int np = 0;
  if (!(in >> np) || np < 0) throw IoError("mesh file: bad periodic count");
  mesh.periodic.resize(np);
  for (int p = 0; p < np; ++p) {
    auto& pp = mesh.periodic[p];
    int axis1;
    if (!(in >> pp.slave >> pp.master >> axis1) || axis1 < 1 || axis1 > 3)
      throw IoError("mesh file: bad periodic line " + std::to_string(p));
    pp.axis = axis1 - 1;
  }
  if (in >> tok) {
    if (tok != "$Material") throw IoError("mesh file: unexpected section " + tok);
    int nm = 0;
    if (!(in >> nm) || nm < 0) throw IoError("mesh file: bad material count");
    MaterialTable table(nm);
    for (int m = 0; m < nm; ++m) {
      int ph;
      if (!(in >> ph) || ph != m)
        throw IoError("mesh file: material phases must be dense from 0");
      ElasticTensor C;
      for (int p = 0; p < 6; ++p)
        for (int q = p; q < 6; ++q) {
          if (!(in >> C(p, q))) throw IoError("mesh file: bad material entry");
          C(q, p) = C(p, q);
        }
      double se;
      if (!(in >> se)) throw IoError("mesh file: bad yield strength");
      table[m] = {C, se};
    }
    if (materials) *materials = std::move(table);
  }
  return mesh;
}

void write_mesh(const std::string& path, const TetMesh& mesh,
                const MaterialTable* materials) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open mesh file for writing: " + path);
  out << mesh_to_string(mesh, materials);
  if (!out) throw IoError("write failed: " + path);
}

TetMesh read_mesh(const std::string& path, MaterialTable* materials) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open mesh file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return mesh_from_string(ss.str(), materials);
}

}  // namespace shellhom
