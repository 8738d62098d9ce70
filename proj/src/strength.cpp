#include "shellhom/strength.hpp"

#include <cmath>
#include <limits>
#include <map>
#include <string>

#include "shellhom/errors.hpp"

namespace shellhom {

double von_mises(const Strain6& s) {
  const double a = s[0] - s[1];
  const double b = s[1] - s[2];
  const double c = s[2] - s[0];
  const double shear = s[3] * s[3] + s[4] * s[4] + s[5] * s[5];
  return std::sqrt(0.5 * (a * a + b * b + c * c) + 3.0 * shear);
}

namespace {

// yield predicate at load multiplier t, re-evaluating sigma_e on the scaled
// stresses rather than rescaling cached ratios
bool any_yielded(const std::vector<Strain6>& unit_stress,
                 const std::vector<int>& material_tag,
                 const MaterialTable& materials, double t) {
  for (std::size_t e = 0; e < unit_stress.size(); ++e) {
    Strain6 s = unit_stress[e];
    for (double& v : s) v *= t;
    if (von_mises(s) >= materials[material_tag[e]].yield_strength) return true;
  }
  return false;
}

}  // namespace

StrengthReport critical_load(const std::vector<Strain6>& unit_stress,
                             const std::vector<int>& material_tag,
                             const MaterialTable& materials, SearchMethod method,
                             double bracket_init, double rel_tol) {
  if (unit_stress.empty())
    throw ConfigError("strength evaluation needs at least one element");
  if (unit_stress.size() != material_tag.size())
    throw ConfigError("stress field and material tags disagree: " +
                      std::to_string(unit_stress.size()) + " vs " +
                      std::to_string(material_tag.size()) + " elements");
  if (!(bracket_init > 0.0) || !std::isfinite(bracket_init))
    throw ConfigError("bracket_init must be positive and finite");
  if (!(rel_tol > 0.0) || !std::isfinite(rel_tol))
    throw ConfigError("rel_tol must be positive and finite");
  for (int tag : material_tag) {
    if (tag < 0 || tag >= static_cast<int>(materials.size()))
      throw ConfigError("material tag " + std::to_string(tag) +
                        " outside the material table");
    if (!(materials[tag].yield_strength > 0.0))
      throw ConfigError("phase " + std::to_string(tag) +
                        " has no yield strength");
  }

  // unit-load scan: max ratio picks the critical element (strict > keeps the
  // lowest id on ties), per-phase minima of yield / sigma_e give the margins
  double max_ratio = 0.0;
  int crit_elem = -1;
  std::map<int, double> margin;
  for (std::size_t e = 0; e < unit_stress.size(); ++e) {
    const double se = von_mises(unit_stress[e]);
    const double yield = materials[material_tag[e]].yield_strength;
    const double ratio = se / yield;
    if (ratio > max_ratio) {
      max_ratio = ratio;
      crit_elem = static_cast<int>(e);
    }
    const double m =
        se > 0.0 ? yield / se : std::numeric_limits<double>::infinity();
    auto [it, fresh] = margin.emplace(material_tag[e], m);
    if (!fresh && m < it->second) it->second = m;
  }
  if (max_ratio == 0.0)
    throw NumericError(
        "reference load produces zero stress everywhere; no finite critical "
        "load");

  double multiplier = 1.0 / max_ratio;
  if (method == SearchMethod::Bisection) {
    // expand from bracket_init until [lo, hi] straddles first yield, then
    // halve; t = 0 never yields since every yield strength is positive
    double lo = 0.0, hi = bracket_init;
    int guard = 0;
    while (!any_yielded(unit_stress, material_tag, materials, hi)) {
      lo = hi;
      hi *= 2.0;
      if (++guard > 1100)
        throw NumericError("bisection bracket expansion failed to find yield");
    }
    while (hi - lo > rel_tol * hi) {
      const double mid = 0.5 * (lo + hi);
      if (any_yielded(unit_stress, material_tag, materials, mid))
        hi = mid;
      else
        lo = mid;
    }
    multiplier = 0.5 * (lo + hi);
  }

  StrengthReport report;
  report.critical_load_multiplier = multiplier;
  report.critical_element = crit_elem;
  report.critical_phase = material_tag[crit_elem];
  report.sigma_e_at_critical = multiplier * von_mises(unit_stress[crit_elem]);
  report.per_phase_margin.assign(margin.begin(), margin.end());
  report.method = method;
  return report;
}

}  // namespace shellhom
