#pragma once
// Lame coefficients H_i(alpha) of the orthogonal curvilinear frame and their
// exact partials. All curvature enters the solvers through these factors;
// node coordinates always live in (alpha1, alpha2, alpha3) parameter space.
//
// Inside a unit cell the metric is frozen at the representative point
// alpha_I: cell problems see constant 1/H_i scale factors and beta-derivatives
// of H vanish identically.

#include <array>
#include <functional>
#include <variant>

#include "shellhom/mesh.hpp"

namespace shellhom {

struct MetricSample {
  std::array<double, 3> H{1.0, 1.0, 1.0};
  double dH[3][3] = {};  // dH[i][j] = d H_i / d alpha_j
  double Hprod = 1.0;    // H1 H2 H3
};

struct PlateMetric {};

struct CylindricalMetric {
  double R2 = 1.0;  // H2 = R2 + alpha3
};

struct DoublyCurvedMetric {
  double R1 = 1.0;
  double R2 = 1.0;
  // as printed: H1 = R1 + alpha1; the alpha3 variant reads H1 = R1 + alpha3
  bool alpha3_variant = false;
};

struct CustomMetric {
  std::function<MetricSample(const Vec3&)> eval;  // must supply exact partials
};

using LameModel =
    std::variant<PlateMetric, CylindricalMetric, DoublyCurvedMetric,
                 CustomMetric>;

MetricSample lame_eval(const LameModel& model, const Vec3& alpha);

// the constants scaling cell-coordinate derivatives d/dbeta_i within a cell
// problem at alpha_I: (1/H1, 1/H2, 1/H3)
std::array<double, 3> micro_scale_factors(const LameModel& model,
                                          const Vec3& alpha_I);

bool is_plate(const LameModel& model);

}  // namespace shellhom
