#pragma once
// ASCII mesh files. Sections in fixed order:
//   $ShellhomMesh  <format version>
//   $Nodes     count, then "id x y z" (0-based ids, %.17g coordinates)
//   $Tets      count, then "id n1 n2 n3 n4 tag"
//   $FaceTags  count, then "n1 n2 n3 tag"
//   $Periodic  count, then "slave master axis" (axis 1..3)
//   $Material  count, then "phase c11 .. c16 c22 .. c66 S_e" (optional):
//              21 upper-triangle components of the 6x6 tensor, row-major,
//              pair order 11,22,33,12,23,13, tensor shear convention
//              (no engineering doubling), then the yield strength.
// The writer is canonical; writing what the reader produced is bit-exact.

#include <string>

#include "shellhom/mesh.hpp"
#include "shellhom/tensor.hpp"

namespace shellhom {

inline constexpr int kMeshFormatVersion = 1;

std::string mesh_to_string(const TetMesh& mesh,
                           const MaterialTable* materials = nullptr);
TetMesh mesh_from_string(const std::string& text,
                         MaterialTable* materials = nullptr);

void write_mesh(const std::string& path, const TetMesh& mesh,
                const MaterialTable* materials = nullptr);
TetMesh read_mesh(const std::string& path, MaterialTable* materials = nullptr);

// canonical shortest round-trip decimal for a double
std::string format_double(double x);

}  // namespace shellhom
