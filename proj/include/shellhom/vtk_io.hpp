#pragma once
// Legacy ASCII VTK (DataFile version 3.0) unstructured-grid writer for
// external visualization of tet meshes with attached fields. Output is
// deterministic: coordinates and values use shortest round-trip decimals.

#include <string>
#include <utility>
#include <vector>

#include "shellhom/cell.hpp"
#include "shellhom/mesh.hpp"
#include "shellhom/tensor.hpp"

namespace shellhom {

struct VtkOutput {
  // nodal 3-vector fields, flattened (u1,u2,u3) per node
  std::vector<std::pair<std::string, NodalField>> point_vectors;
  // one value per element (Von Mises stress, phase id, ...)
  std::vector<std::pair<std::string, std::vector<double>>> cell_scalars;
  // per-element symmetric tensors in pair order 11,22,33,12,23,13 with raw
  // tensor shear components; expanded to full 3x3 matrices on output
  std::vector<std::pair<std::string, std::vector<Strain6>>> cell_tensors;
};

// throws ConfigError on size mismatches, IoError on unusable field names
// (empty or containing whitespace; VTK names are single tokens)
std::string vtk_to_string(const TetMesh& mesh, const VtkOutput& out,
                          const std::string& title = "shellhom fields");
void write_vtk(const std::string& path, const TetMesh& mesh,
               const VtkOutput& out,
               const std::string& title = "shellhom fields");

}  // namespace shellhom
