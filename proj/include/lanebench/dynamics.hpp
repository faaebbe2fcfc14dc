#pragma once

#include <cmath>
#include <numbers>

#include "lanebench/geom.hpp"

namespace lanebench {

// Full steering deflection: normalized +/-1 maps to +/-25 degrees at the wheel.
inline constexpr double kMaxSteerRad = 25.0 * std::numbers::pi / 180.0;

struct VehicleState {
  double x = 0.0;
  double y = 0.0;
  double heading = 0.0;  // (-pi, pi], 0 along +x
  double speed = 0.0;    // m/s, constant over a run
};

struct SimConfig {
  double t_delta = 0.05;    // s per frame (20 fps)
  double duration_T = 25.0; // mission length, s
  double wheelbase = 2.6;   // m

  // Number of simulation steps; epsilon guards against 25/0.05 rounding to 499.x.
  int steps_m() const { return static_cast<int>(std::floor(duration_T / t_delta + 1e-9)); }
};

// Normalized steering in [-1, 1] (clamped) to wheel angle in radians.
// Positive steers right.
inline double steering_to_angle(double theta_norm) {
  const double t = theta_norm < -1.0 ? -1.0 : (theta_norm > 1.0 ? 1.0 : theta_norm);
  return t * kMaxSteerRad;
}

// One kinematic bicycle step at constant speed. Right-positive steering turns
// the heading clockwise (negative), so a vehicle on y=0 heading +x drifts to
// negative y under positive steering.
inline VehicleState step(const VehicleState& st, double theta_norm, const SimConfig& cfg) {
  const double delta = steering_to_angle(theta_norm);
  VehicleState out = st;
  out.x = st.x + st.speed * std::cos(st.heading) * cfg.t_delta;
  out.y = st.y + st.speed * std::sin(st.heading) * cfg.t_delta;
  out.heading = wrap_angle(st.heading - st.speed / cfg.wheelbase * std::tan(delta) * cfg.t_delta);
  return out;
}

}  // namespace lanebench
