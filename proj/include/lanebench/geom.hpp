#pragma once

#include <cmath>

namespace lanebench {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
};

// Normalize an angle to (-pi, pi]. Odd-symmetric except at the -pi/+pi seam,
// which keeps mirrored trajectories bitwise mirrored.
inline double wrap_angle(double a) {
  a = std::remainder(a, 2.0 * M_PI);
  if (a <= -M_PI) a += 2.0 * M_PI;
  return a;
}

}  // namespace lanebench
