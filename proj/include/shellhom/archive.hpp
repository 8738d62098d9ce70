#pragma once
// ASCII archives for solver products. A FieldFile is an ordered list of
// named numeric datasets with a format version and the hash of the config
// that produced it; serialization uses shortest round-trip formatting so a
// write/read cycle is bit-exact and deterministic.

#include <cstdint>
#include <string>
#include <vector>

#include "shellhom/cell.hpp"

namespace shellhom {

inline constexpr int kFieldFormatVersion = 1;

struct Dataset {
  std::string name;
  int rows = 0;
  int cols = 0;
  std::vector<double> values;  // row-major, rows*cols entries
};

class FieldFile {
 public:
  uint64_t config_hash = 0;

  void add(const std::string& name, int rows, int cols,
           std::vector<double> values);
  bool has(const std::string& name) const;
  // throws IoError when missing or when a stated dimension does not match
  // (pass -1 to skip that check)
  const Dataset& get(const std::string& name, int rows = -1,
                     int cols = -1) const;
  const std::vector<Dataset>& datasets() const { return data_; }

  std::string to_string() const;
  static FieldFile from_string(const std::string& text);
  void write(const std::string& path) const;
  static FieldFile read(const std::string& path);

 private:
  std::vector<Dataset> data_;
};

// Cell archive: alpha_I, the frozen metric sample, C_hat with diagnostics,
// and every nodal field in canonical case order. The per-element D tensor is
// cheap to rebuild from N1 and the stored metric, so it is not persisted.
FieldFile cell_solution_to_fields(const CellSolutionSet& sol,
                                  uint64_t config_hash);
CellSolutionSet cell_solution_from_fields(const FieldFile& ff,
                                          const TetMesh& cell);

}  // namespace shellhom
