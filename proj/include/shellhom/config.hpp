#pragma once
// Run configuration: one INI file drives every pipeline stage. Sections and
// keys are fixed; anything unrecognized is an error so typos cannot silently
// drop a setting. All physical quantities carry a unit in the file and are
// converted to SI here, so the rest of the library never sees a unit.
//
// Dialect: `[section]` headers and `key = value` lines; `#` or `;` starts a
// comment; blank lines are ignored. Numbers may be decimal, scientific, or
// rational `p/q`. A 3-vector is three numbers with one optional trailing
// unit; a per-phase list is comma-separated entries, each `number [unit]`.
// Units: lengths m | cm | mm, pressures Pa | kPa | MPa | GPa, body force
// N/m3 | N/cm3 (caret spellings N/m^3, N/cm^3 accepted).
//
//   [geometry]  model = plate | cylindrical | doubly_curved
//               radius1, radius2 = length (curved models)
//               extent = three lengths, the domain [0,L1]x[0,L2]x[0,L3]
//   [cell]      n = cell mesh subdivisions
//               geometry = uniform | laminate | box | sphere
//               axis (1..3), layers = fraction:phase ... (laminate)
//               center, half, radius, inclusion_phase (box / sphere)
//               E, nu, yield = per-phase lists; phase ids count from 1
//   [macro]     divisions = three integers
//               representatives = lattice count per varying axis
//               face_{x,y,z}_{min,max} = free | clamped |
//                                        traction tx ty tz [pressure]
//               body = force density vector
//   [reconstruct] epsilon = microstructure period (length; must tile every
//               axis), order = 0 | 1 | 2, resolution = eval elements/period
//   [strength]  method = direct | bisection, bracket, tolerance, order
//   [output]    directory, formats = subset of archive vtk csv

#include <cstdint>
#include <string>

#include "shellhom/oracle.hpp"
#include "shellhom/strength.hpp"

namespace shellhom {

struct RunConfig {
  MacroDomain domain;
  LameModel model = PlateMetric{};

  int cell_n = 16;
  PhaseGeometry phase = Uniform{};
  MaterialTable materials;

  std::array<int, 3> macro_divisions{1, 1, 1};
  int representatives = 1;
  MacroProblem problem;

  double epsilon = 0.0;  // period length in meters; 0 = section absent
  int order = 2;
  int resolution = 8;

  SearchMethod method = SearchMethod::Direct;
  double bracket_init = 1.0;
  double search_tol = 1e-6;
  int strength_order = 2;

  std::string out_dir = "out";
  bool out_archive = true;
  bool out_vtk = false;
  bool out_csv = false;

  std::uint64_t hash = 0;  // config_hash of the source text
};

// Parses and validates a full config. Throws ConfigError naming the offending
// section, key, or value; the message carries the line number where one
// applies.
RunConfig parse_run_config(const std::string& text);

// FNV-1a 64 over the semantic content: comments, blank lines, and trailing
// whitespace are stripped first, so annotating a file keeps its identity
// while any value change breaks it. Archives embed this hash and later
// stages refuse inputs whose hash disagrees with the live config.
std::uint64_t config_hash(const std::string& text);

}  // namespace shellhom
