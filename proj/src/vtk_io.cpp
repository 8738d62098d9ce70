#include "shellhom/vtk_io.hpp"

#include <fstream>
#include <sstream>

#include "shellhom/errors.hpp"
#include "shellhom/mesh_io.hpp"

namespace shellhom {

static void check_name(const std::string& name) {
  if (name.empty()) throw IoError("vtk field name is empty");
  for (char c : name)
    if (c == ' ' || c == '\t' || c == '\n' || c == '\r')
      throw IoError("vtk field name '" + name + "' contains whitespace");
}

std::string vtk_to_string(const TetMesh& mesh, const VtkOutput& out,
                          const std::string& title) {
  const int nn = mesh.n_nodes();
  const int ne = mesh.n_tets();
  for (const auto& [name, f] : out.point_vectors) {
    check_name(name);
    if (static_cast<int>(f.size()) != 3 * nn)
      throw ConfigError("vtk vector field '" + name + "' has " +
                        std::to_string(f.size()) + " values, expected " +
                        std::to_string(3 * nn));
  }
  for (const auto& [name, f] : out.cell_scalars) {
    check_name(name);
    if (static_cast<int>(f.size()) != ne)
      throw ConfigError("vtk scalar field '" + name + "' has " +
                        std::to_string(f.size()) + " values, expected " +
                        std::to_string(ne));
  }
  for (const auto& [name, f] : out.cell_tensors) {
    check_name(name);
    if (static_cast<int>(f.size()) != ne)
      throw ConfigError("vtk tensor field '" + name + "' has " +
                        std::to_string(f.size()) + " values, expected " +
                        std::to_string(ne));
  }

  std::ostringstream os;
  os << "# vtk DataFile Version 3.0\n" << title << "\nASCII\n";
  os << "DATASET UNSTRUCTURED_GRID\n";
  os << "POINTS " << nn << " double\n";
  for (int v = 0; v < nn; ++v)
    os << format_double(mesh.nodes[v][0]) << " "
       << format_double(mesh.nodes[v][1]) << " "
       << format_double(mesh.nodes[v][2]) << "\n";
  os << "CELLS " << ne << " " << 5 * ne << "\n";
  for (int e = 0; e < ne; ++e)
    os << "4 " << mesh.tets[e][0] << " " << mesh.tets[e][1] << " "
       << mesh.tets[e][2] << " " << mesh.tets[e][3] << "\n";
  os << "CELL_TYPES " << ne << "\n";
  for (int e = 0; e < ne; ++e) os << "10\n";

  if (!out.point_vectors.empty()) {
    os << "POINT_DATA " << nn << "\n";
    for (const auto& [name, f] : out.point_vectors) {
      os << "VECTORS " << name << " double\n";
      for (int v = 0; v < nn; ++v)
        os << format_double(f[3 * v]) << " " << format_double(f[3 * v + 1])
           << " " << format_double(f[3 * v + 2]) << "\n";
    }
  }
  if (!out.cell_scalars.empty() || !out.cell_tensors.empty()) {
    os << "CELL_DATA " << ne << "\n";
    for (const auto& [name, f] : out.cell_scalars) {
      os << "SCALARS " << name << " double 1\nLOOKUP_TABLE default\n";
      for (int e = 0; e < ne; ++e) os << format_double(f[e]) << "\n";
    }
    for (const auto& [name, f] : out.cell_tensors) {
      os << "TENSORS " << name << " double\n";
      for (int e = 0; e < ne; ++e) {
        const Strain6& s = f[e];
        os << format_double(s[0]) << " " << format_double(s[3]) << " "
           << format_double(s[5]) << "\n"
           << format_double(s[3]) << " " << format_double(s[1]) << " "
           << format_double(s[4]) << "\n"
           << format_double(s[5]) << " " << format_double(s[4]) << " "
           << format_double(s[2]) << "\n\n";
      }
    }
  }
  return os.str();
}

void write_vtk(const std::string& path, const TetMesh& mesh,
               const VtkOutput& out, const std::string& title) {
  const std::string text = vtk_to_string(mesh, out, title);
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open '" + path + "' for writing");
  f << text;
  if (!f) throw IoError("write to '" + path + "' failed");
}

}  // namespace shellhom
