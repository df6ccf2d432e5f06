#include "eyeid/geometry.hpp"

#include <cmath>
#include <numbers>

#include "eyeid/error.hpp"

namespace eyeid {

namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;
constexpr double kRadToDeg = 180.0 / std::numbers::pi;

bool positive_finite(double v) { return std::isfinite(v) && v > 0.0; }

}  // namespace

void ScreenGeometry::validate() const {
  if (!positive_finite(distance_mm) || !positive_finite(width_mm) ||
      !positive_finite(height_mm) || !positive_finite(width_px) ||
      !positive_finite(height_px)) {
    throw DataError("screen geometry fields must be finite and strictly positive");
  }
}

PixelPoint angles_to_pixels(const AnglePoint& p, const ScreenGeometry& g) {
  g.validate();
  for (double theta : {p.theta_x_deg, p.theta_y_deg}) {
    if (!std::isfinite(theta) || std::abs(theta) >= 90.0) {
      throw DataError("viewing angle must be finite with |theta| < 90 degrees");
    }
  }
  const double sx = g.distance_mm * g.width_px / g.width_mm;
  const double sy = g.distance_mm * g.height_px / g.height_mm;
  return {sx * std::tan(p.theta_x_deg * kDegToRad) + g.width_px / 2.0,
          sy * std::tan(p.theta_y_deg * kDegToRad) + g.height_px / 2.0};
}

AnglePoint pixels_to_angles(const PixelPoint& p, const ScreenGeometry& g) {
  g.validate();
  if (!std::isfinite(p.x) || !std::isfinite(p.y)) {
    throw DataError("pixel coordinates must be finite");
  }
  const double sx = g.distance_mm * g.width_px / g.width_mm;
  const double sy = g.distance_mm * g.height_px / g.height_mm;
  return {std::atan((p.x - g.width_px / 2.0) / sx) * kRadToDeg,
          std::atan((p.y - g.height_px / 2.0) / sy) * kRadToDeg};
}

}  // namespace eyeid
