#pragma once
// Von Mises yield evaluation and critical-load search. The reference solve is
// linear, so element stresses scale with the load multiplier: the direct
// method reads the critical multiplier off the unit-load stress field in one
// pass, while bisection re-evaluates the yield predicate at trial multipliers
// and narrows a bracket (kept for criteria that cannot be rescaled).

#include <utility>
#include <vector>

#include "shellhom/tensor.hpp"

namespace shellhom {

enum class SearchMethod { Direct, Bisection };

struct StrengthReport {
  double critical_load_multiplier = 0.0;
  int critical_element = -1;  // attains the max sigma_e / yield ratio; ties
                              // resolve to the lowest element id
  int critical_phase = -1;
  double sigma_e_at_critical = 0.0;  // equivalent stress in that element at
                                     // the critical load
  // phase id -> min over its elements of yield / sigma_e at unit load, i.e.
  // the multiplier at which the phase first yields; +inf for an unstressed
  // phase. Sorted by phase id. The critical multiplier is the smallest entry.
  std::vector<std::pair<int, double>> per_phase_margin;
  SearchMethod method = SearchMethod::Direct;
};

// deviatoric stress intensity
//   sigma_e = 1/sqrt(2) sqrt((s11-s22)^2 + (s22-s33)^2 + (s33-s11)^2
//                            + 6 (s12^2 + s23^2 + s13^2))
// for a stress in pair order with raw shear components
double von_mises(const Strain6& sigma);

// Critical multiplier on the reference load, from per-element stresses of the
// unit-load solve. material_tag picks each element's yield strength from the
// table; every referenced phase needs yield_strength > 0. Throws ConfigError
// for size or table mismatches and NumericError when the stress field is
// identically zero (no finite critical load). bracket_init and rel_tol apply
// to bisection only.
StrengthReport critical_load(const std::vector<Strain6>& unit_stress,
                             const std::vector<int>& material_tag,
                             const MaterialTable& materials,
                             SearchMethod method = SearchMethod::Direct,
                             double bracket_init = 1.0, double rel_tol = 1e-6);

}  // namespace shellhom
