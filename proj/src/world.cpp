#include "lanebench/world.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "lanebench/errors.hpp"

namespace lanebench {
namespace {

constexpr double kProjEps = 1e-9;  // slack when deciding interior vs past-the-end

}  // namespace

Road::Pose Road::segment_pose(const Segment& seg, double sigma) const {
  Pose p;
  if (seg.kappa == 0.0) {
    p.x = seg.x0 + sigma * std::cos(seg.h0);
    p.y = seg.y0 + sigma * std::sin(seg.h0);
    p.heading = wrap_angle(seg.h0);
    p.curvature = 0.0;
  } else {
    const double h = seg.h0 + seg.kappa * sigma;
    p.x = seg.x0 + (std::sin(h) - std::sin(seg.h0)) / seg.kappa;
    p.y = seg.y0 - (std::cos(h) - std::cos(seg.h0)) / seg.kappa;
    p.heading = wrap_angle(h);
    p.curvature = seg.kappa;
  }
  return p;
}

Road::Pose Road::pose_at(double s) const {
  const double sc = std::clamp(s, 0.0, total_length_);
  // Last segment owns its end point.
  const Segment* seg = &segments_.back();
  for (const Segment& c : segments_) {
    if (sc < c.s0 + c.len) {
      seg = &c;
      break;
    }
  }
  return segment_pose(*seg, sc - seg->s0);
}

Road::Projection Road::project(Vec2 p) const {
  Projection best;
  double best_dist = std::numeric_limits<double>::infinity();
  bool best_past_end = false;
  bool best_before_start = false;

  for (std::size_t i = 0; i < segments_.size(); ++i) {
    const Segment& seg = segments_[i];
    double sigma_raw, lateral, dist;
    bool before = false, past = false;

    if (seg.kappa == 0.0) {
      const double dx = std::cos(seg.h0), dy = std::sin(seg.h0);
      const double rx = p.x - seg.x0, ry = p.y - seg.y0;
      sigma_raw = rx * dx + ry * dy;
      lateral = dx * ry - dy * rx;  // + left of the tangent
      before = sigma_raw < -kProjEps;
      past = sigma_raw > seg.len + kProjEps;
      const double sig = std::clamp(sigma_raw, 0.0, seg.len);
      const double px = seg.x0 + sig * dx, py = seg.y0 + sig * dy;
      dist = std::hypot(p.x - px, p.y - py);
      if (!before && !past) dist = std::abs(lateral);
    } else {
      const double radius = 1.0 / std::abs(seg.kappa);
      // Center sits one radius to the left (kappa > 0) or right (kappa < 0).
      const double cx = seg.x0 - std::sin(seg.h0) / seg.kappa;
      const double cy = seg.y0 + std::cos(seg.h0) / seg.kappa;
      const double r = std::hypot(p.x - cx, p.y - cy);
      const double phi = std::atan2(p.y - cy, p.x - cx);
      const double phi0 = std::atan2(seg.y0 - cy, seg.x0 - cx);
      // Angle swept from the segment start to the query azimuth, in travel direction.
      double sweep = (seg.kappa > 0.0) ? phi - phi0 : phi0 - phi;
      sweep = std::fmod(sweep, 2.0 * M_PI);
      if (sweep < 0.0) sweep += 2.0 * M_PI;
      sigma_raw = sweep * radius;
      if (sigma_raw <= seg.len + kProjEps) {
        // Inside the circle of a left turn (r < radius) means left of the lane.
        lateral = (radius - r) * (seg.kappa > 0.0 ? 1.0 : -1.0);
        dist = std::abs(lateral);
      } else {
        // Off the arc: snap to the nearer endpoint; decide before/past by which
        // endpoint wins so callers can tell road-start from road-end overshoot.
        const Pose pe = segment_pose(seg, seg.len);
        const double d_start = std::hypot(p.x - seg.x0, p.y - seg.y0);
        const double d_end = std::hypot(p.x - pe.x, p.y - pe.y);
        if (d_start <= d_end) {
          before = true;
          sigma_raw = 0.0;
          lateral = std::cos(seg.h0) * (p.y - seg.y0) - std::sin(seg.h0) * (p.x - seg.x0);
          dist = d_start;
        } else {
          past = true;
          sigma_raw = seg.len;
          lateral = std::cos(pe.heading) * (p.y - pe.y) - std::sin(pe.heading) * (p.x - pe.x);
          dist = d_end;
        }
      }
    }

    if (dist < best_dist) {
      best_dist = dist;
      best.s = seg.s0 + std::clamp(sigma_raw, 0.0, seg.len);
      best.lateral = lateral;
      best_before_start = before && i == 0;
      best_past_end = past && i + 1 == segments_.size();
    }
  }

  best.in_range = !(best_past_end || best_before_start);
  return best;
}

double Road::lateral_deviation(double x, double y) const {
  const Projection pr = project({x, y});
  if (!pr.in_range) {
    throw EndOfRoadError("query point projects past the road extent at s=" +
                         std::to_string(pr.s));
  }
  return pr.lateral;
}

Road build_road(const Scenario& s) {
  if (!(s.road_length > 0.0) || !std::isfinite(s.road_length)) {
    throw ConfigError("road_length must be positive and finite");
  }
  if (s.road_topology != RoadTopology::straight && !(s.curvature > 0.0)) {
    throw ConfigError("curved topology requires positive curvature");
  }

  Road r;
  r.lane_width_ = s.lane_width;
  r.total_length_ = s.road_length;

  const double L = s.road_length;
  switch (s.road_topology) {
    case RoadTopology::straight:
      r.segments_.push_back({0.0, L, 0.0, 0.0, 0.0, 0.0});
      break;
    case RoadTopology::left_curved:
      r.segments_.push_back({0.0, L, s.curvature, 0.0, 0.0, 0.0});
      break;
    case RoadTopology::right_curved:
      r.segments_.push_back({0.0, L, -s.curvature, 0.0, 0.0, 0.0});
      break;
    case RoadTopology::s_curve: {
      r.segments_.push_back({0.0, L / 2.0, s.curvature, 0.0, 0.0, 0.0});
      const Road::Pose mid = r.segment_pose(r.segments_[0], L / 2.0);
      // Tangential join: the right half starts with the left half's end heading.
      const double h_mid = r.segments_[0].h0 + r.segments_[0].kappa * (L / 2.0);
      r.segments_.push_back({L / 2.0, L / 2.0, -s.curvature, mid.x, mid.y, h_mid});
      break;
    }
  }

  // Sampled polyline view, arc-length parameterized at kArcStep.
  const int n = static_cast<int>(std::floor(L / Road::kArcStep));
  r.centerline_.reserve(static_cast<std::size_t>(n) + 2);
  for (int i = 0; i <= n; ++i) {
    const double sv = i * Road::kArcStep;
    const Road::Pose p = r.pose_at(sv);
    r.centerline_.push_back({sv, p.x, p.y, p.heading, p.curvature});
  }
  if (r.centerline_.back().s < L) {
    const Road::Pose p = r.pose_at(L);
    r.centerline_.push_back({L, p.x, p.y, p.heading, p.curvature});
  }
  return r;
}

}  // namespace lanebench
