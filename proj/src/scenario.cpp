#include "lanebench/scenario.hpp"

#include <algorithm>
#include <cinttypes>
#include <cmath>
#include <cstdio>

#include "lanebench/errors.hpp"
#include "lanebench/rng.hpp"

namespace lanebench {
namespace {

// Curve-speed coupling: permitted speed cap falls linearly with curvature.
constexpr double kCurveSpeedCapAtZero = 16.0;   // m/s on a straight
constexpr double kCurveSpeedCapSlope = 300.0;   // (m/s) lost per unit curvature

template <typename... Args>
std::string fmt(const char* f, Args... args) {
  char buf[192];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

template <typename T>
void canonicalize(std::vector<T>& v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
}

void check_range(std::vector<ConstraintViolation>& out, const char* field, double v,
                 const Interval& r) {
  if (!std::isfinite(v) || !r.contains(v)) {
    out.push_back({std::string("out_of_range:") + field,
                   fmt("value %.6g outside [%.6g, %.6g]", v, r.lo, r.hi)});
  }
}

}  // namespace

std::string to_string(RoadTopology t) {
  switch (t) {
    case RoadTopology::straight: return "straight";
    case RoadTopology::left_curved: return "left_curved";
    case RoadTopology::right_curved: return "right_curved";
    case RoadTopology::s_curve: return "s_curve";
  }
  throw ConfigError("unknown road topology value");
}

std::string to_string(Weather w) {
  switch (w) {
    case Weather::sunny: return "sunny";
    case Weather::rain: return "rain";
    case Weather::snow: return "snow";
    case Weather::fog: return "fog";
  }
  throw ConfigError("unknown weather value");
}

RoadTopology topology_from_string(const std::string& s) {
  if (s == "straight") return RoadTopology::straight;
  if (s == "left_curved") return RoadTopology::left_curved;
  if (s == "right_curved") return RoadTopology::right_curved;
  if (s == "s_curve") return RoadTopology::s_curve;
  throw ConfigError("unknown road topology: " + s);
}

Weather weather_from_string(const std::string& s) {
  if (s == "sunny") return Weather::sunny;
  if (s == "rain") return Weather::rain;
  if (s == "snow") return Weather::snow;
  if (s == "fog") return Weather::fog;
  throw ConfigError("unknown weather: " + s);
}

DomainModel default_domain_model() {
  DomainModel d;
  d.road_topology_choices = {RoadTopology::straight, RoadTopology::left_curved,
                             RoadTopology::right_curved, RoadTopology::s_curve};
  d.curvature_range = {0.003, 0.012};
  d.road_length_range = {150.0, 500.0};
  d.lane_width_range = {3.0, 4.0};
  d.weather_choices = {Weather::sunny, Weather::rain, Weather::snow, Weather::fog};
  d.weather_intensity_range = {0.0, 1.0};
  d.daytime_brightness_range = {0.5, 1.0};
  d.ego_speed_range = {5.0, 15.0};
  d.constraint_set = {"speed_on_curve", "degenerate_weather", "min_road_length"};
  return d;
}

std::vector<ConstraintViolation> check_constraints(const Scenario& s, const DomainModel& d,
                                                   const ConstraintContext& ctx) {
  std::vector<ConstraintViolation> out;

  if (std::find(d.road_topology_choices.begin(), d.road_topology_choices.end(),
                s.road_topology) == d.road_topology_choices.end()) {
    out.push_back({"out_of_range:road_topology",
                   "topology " + to_string(s.road_topology) + " not offered by the model"});
  }
  if (s.road_topology == RoadTopology::straight) {
    if (s.curvature != 0.0) {
      out.push_back({"out_of_range:curvature", "straight topology requires curvature == 0"});
    }
  } else {
    check_range(out, "curvature", s.curvature, d.curvature_range);
  }
  check_range(out, "road_length", s.road_length, d.road_length_range);
  check_range(out, "lane_width", s.lane_width, d.lane_width_range);
  if (std::find(d.weather_choices.begin(), d.weather_choices.end(), s.weather) ==
      d.weather_choices.end()) {
    out.push_back({"out_of_range:weather",
                   "weather " + to_string(s.weather) + " not offered by the model"});
  }
  check_range(out, "weather_intensity", s.weather_intensity, d.weather_intensity_range);
  check_range(out, "brightness", s.brightness, d.daytime_brightness_range);
  check_range(out, "ego_speed", s.ego_speed, d.ego_speed_range);

  for (const std::string& name : d.constraint_set) {
    if (name == "speed_on_curve") {
      const double cap = kCurveSpeedCapAtZero - kCurveSpeedCapSlope * std::abs(s.curvature);
      if (s.ego_speed > cap) {
        out.push_back({name, fmt("ego_speed %.6g exceeds curve cap %.6g m/s", s.ego_speed, cap)});
      }
    } else if (name == "degenerate_weather") {
      if (s.weather != Weather::sunny && s.weather_intensity <= 0.0) {
        out.push_back({name, "non-clear weather requires positive intensity"});
      }
    } else if (name == "min_road_length") {
      const double need = s.ego_speed * ctx.sim_duration + ctx.road_length_margin;
      if (s.road_length < need) {
        out.push_back({name, fmt("road_length %.6g shorter than required %.6g m", s.road_length,
                                 need)});
      }
    } else {
      out.push_back({"unknown_constraint:" + name, "constraint not in the registry"});
    }
  }
  return out;
}

Scenario sample_scenario(const DomainModel& d, std::uint64_t seed, int attempt_budget,
                         const ConstraintContext& ctx) {
  if (d.road_topology_choices.empty() || d.weather_choices.empty()) {
    throw ConfigError("domain model offers an empty choice set");
  }
  std::mt19937_64 g(seed);
  Scenario s;
  char idbuf[32];
  std::snprintf(idbuf, sizeof idbuf, "scn-%016" PRIx64, seed);
  s.id = idbuf;
  s.rng_seed = seed;

  for (int attempt = 0; attempt < attempt_budget; ++attempt) {
    // Fixed draw order; every field consumes exactly one draw per attempt.
    s.road_topology = d.road_topology_choices[uniform_index(g, d.road_topology_choices.size())];
    const double curv = uniform_in(g, d.curvature_range.lo, d.curvature_range.hi);
    s.curvature = (s.road_topology == RoadTopology::straight) ? 0.0 : curv;
    s.road_length = uniform_in(g, d.road_length_range.lo, d.road_length_range.hi);
    s.lane_width = uniform_in(g, d.lane_width_range.lo, d.lane_width_range.hi);
    s.weather = d.weather_choices[uniform_index(g, d.weather_choices.size())];
    s.weather_intensity = uniform_in(g, d.weather_intensity_range.lo, d.weather_intensity_range.hi);
    s.brightness = uniform_in(g, d.daytime_brightness_range.lo, d.daytime_brightness_range.hi);
    s.ego_speed = uniform_in(g, d.ego_speed_range.lo, d.ego_speed_range.hi);
    if (check_constraints(s, d, ctx).empty()) return s;
  }
  throw SamplingExhaustedError(
      fmt("no valid scenario after %d attempts; "
          "the model's constraints may leave no feasible region",
          attempt_budget));
}

namespace {

Interval restrict_interval(const char* field, const Interval& parent,
                           const std::optional<Interval>& r) {
  if (!r) return parent;
  if (!(r->lo <= r->hi) || !std::isfinite(r->lo) || !std::isfinite(r->hi)) {
    throw RestrictionError(std::string(field) + ": empty or non-finite interval");
  }
  if (r->lo < parent.lo || r->hi > parent.hi) {
    throw RestrictionError(std::string(field) + ": interval escapes the parent range");
  }
  return *r;
}

template <typename T>
std::vector<T> restrict_choices(const char* field, const std::vector<T>& parent,
                                const std::optional<std::vector<T>>& r) {
  if (!r) return parent;
  if (r->empty()) throw RestrictionError(std::string(field) + ": empty choice set");
  std::vector<T> out = *r;
  canonicalize(out);
  for (const T& v : out) {
    if (std::find(parent.begin(), parent.end(), v) == parent.end()) {
      throw RestrictionError(std::string(field) + ": choice absent from the parent model");
    }
  }
  return out;
}

}  // namespace

DomainModel restrict_model(const DomainModel& parent, const ModelRestriction& keep) {
  DomainModel out = parent;
  out.road_topology_choices =
      restrict_choices("road_topology_choices", parent.road_topology_choices,
                       keep.road_topology_choices);
  out.curvature_range = restrict_interval("curvature_range", parent.curvature_range,
                                          keep.curvature_range);
  out.road_length_range = restrict_interval("road_length_range", parent.road_length_range,
                                            keep.road_length_range);
  out.lane_width_range = restrict_interval("lane_width_range", parent.lane_width_range,
                                           keep.lane_width_range);
  out.weather_choices = restrict_choices("weather_choices", parent.weather_choices,
                                         keep.weather_choices);
  out.weather_intensity_range = restrict_interval(
      "weather_intensity_range", parent.weather_intensity_range, keep.weather_intensity_range);
  out.daytime_brightness_range = restrict_interval(
      "daytime_brightness_range", parent.daytime_brightness_range, keep.daytime_brightness_range);
  out.ego_speed_range = restrict_interval("ego_speed_range", parent.ego_speed_range,
                                          keep.ego_speed_range);
  // constraint_set inherited unchanged: a restricted model never loosens validity.
  return out;
}

}  // namespace lanebench
