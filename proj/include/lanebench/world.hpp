#pragma once

#include <vector>

#include "lanebench/geom.hpp"
#include "lanebench/scenario.hpp"

namespace lanebench {

struct CenterlineSample {
  double s = 0.0;         // arc length from road start, m
  double x = 0.0;
  double y = 0.0;
  double heading = 0.0;   // tangent angle, (-pi, pi]
  double curvature = 0.0; // signed; + bends left
};

// Road geometry: piecewise line/arc centerline plus a sampled polyline view.
// Projection and pose queries use the exact segment math, not the polyline.
class Road {
 public:
  static constexpr double kArcStep = 0.5;  // polyline sampling step, m

  struct Pose {
    double x = 0.0, y = 0.0;
    double heading = 0.0;
    double curvature = 0.0;
  };

  struct Projection {
    double s = 0.0;        // clamped arc length of the nearest centerline point
    double lateral = 0.0;  // signed offset, + to the left of travel
    bool in_range = true;  // false when the query lies past either road end
  };

  const std::vector<CenterlineSample>& centerline() const { return centerline_; }
  double lane_width() const { return lane_width_; }
  double total_length() const { return total_length_; }

  Pose pose_at(double s) const;        // s clamped to [0, total_length]
  Projection project(Vec2 p) const;    // never throws
  double lateral_deviation(double x, double y) const;  // throws EndOfRoadError off extent

 private:
  struct Segment {
    double s0 = 0.0, len = 0.0;
    double kappa = 0.0;              // 0 => straight piece
    double x0 = 0.0, y0 = 0.0, h0 = 0.0;
  };

  Pose segment_pose(const Segment& seg, double sigma) const;

  std::vector<Segment> segments_;
  std::vector<CenterlineSample> centerline_;
  double lane_width_ = 0.0;
  double total_length_ = 0.0;

  friend Road build_road(const Scenario& s);
};

// Deterministic construction from scenario parameters alone. Curved topologies
// bend left/right by the scenario curvature; the s-curve is a left half followed
// by a tangential right half.
Road build_road(const Scenario& s);

}  // namespace lanebench
