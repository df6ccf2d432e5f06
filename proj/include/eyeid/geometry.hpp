#pragma once

namespace eyeid {

/// Physical screen layout used to map viewing angles onto pixels.
/// `distance_mm` is the perpendicular eye-to-screen-center distance.
struct ScreenGeometry {
  double distance_mm = 550.0;
  double width_mm = 474.0;
  double height_mm = 297.0;
  double width_px = 1680.0;
  double height_px = 1050.0;

  void validate() const;
};

/// Gaze direction in degrees; each component must satisfy |theta| < 90.
struct AnglePoint {
  double theta_x_deg = 0.0;
  double theta_y_deg = 0.0;
};

struct PixelPoint {
  double x = 0.0;
  double y = 0.0;
};

/// Off-screen results are returned unclamped.
PixelPoint angles_to_pixels(const AnglePoint& p, const ScreenGeometry& g);
AnglePoint pixels_to_angles(const PixelPoint& p, const ScreenGeometry& g);

}  // namespace eyeid
