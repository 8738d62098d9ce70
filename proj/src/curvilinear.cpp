#include "shellhom/curvilinear.hpp"

#include <cmath>
#include <string>

#include "shellhom/errors.hpp"

namespace shellhom {

static void check_positive(const MetricSample& m, const Vec3& alpha) {
  for (int i = 0; i < 3; ++i)
    if (!(m.H[i] > 0.0))
      throw ConfigError("Lame coefficient H" + std::to_string(i + 1) +
                        " is not positive at alpha = (" +
                        std::to_string(alpha[0]) + ", " +
                        std::to_string(alpha[1]) + ", " +
                        std::to_string(alpha[2]) + ")");
}

MetricSample lame_eval(const LameModel& model, const Vec3& alpha) {
  MetricSample m = std::visit(
      [&](const auto& mod) -> MetricSample {
        using T = std::decay_t<decltype(mod)>;
        MetricSample s;
        if constexpr (std::is_same_v<T, PlateMetric>) {
          // all ones
        } else if constexpr (std::is_same_v<T, CylindricalMetric>) {
          s.H[1] = mod.R2 + alpha[2];
          s.dH[1][2] = 1.0;
        } else if constexpr (std::is_same_v<T, DoublyCurvedMetric>) {
          if (mod.alpha3_variant) {
            s.H[0] = mod.R1 + alpha[2];
            s.dH[0][2] = 1.0;
          } else {
            s.H[0] = mod.R1 + alpha[0];
            s.dH[0][0] = 1.0;
          }
          s.H[1] = mod.R2 + alpha[2];
          s.dH[1][2] = 1.0;
        } else {
          s = mod.eval(alpha);
        }
        return s;
      },
      model);
  m.Hprod = m.H[0] * m.H[1] * m.H[2];
  check_positive(m, alpha);
  return m;
}

std::array<double, 3> micro_scale_factors(const LameModel& model,
                                          const Vec3& alpha_I) {
  const MetricSample m = lame_eval(model, alpha_I);
  return {1.0 / m.H[0], 1.0 / m.H[1], 1.0 / m.H[2]};
}

bool is_plate(const LameModel& model) {
  return std::holds_alternative<PlateMetric>(model);
}

}  // namespace shellhom
