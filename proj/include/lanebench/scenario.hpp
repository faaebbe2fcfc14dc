#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace lanebench {

enum class RoadTopology { straight, left_curved, right_curved, s_curve };
enum class Weather { sunny, rain, snow, fog };

std::string to_string(RoadTopology t);
std::string to_string(Weather w);
RoadTopology topology_from_string(const std::string& s);
Weather weather_from_string(const std::string& s);

// Closed interval [lo, hi]; lo == hi is a valid singleton.
struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  bool contains(double v) const { return v >= lo && v <= hi; }
  double width() const { return hi - lo; }
};

// The constrained parameter space test scenarios are drawn from.
struct DomainModel {
  std::vector<RoadTopology> road_topology_choices;
  Interval curvature_range;            // 1/m, magnitude of curved segments
  Interval road_length_range;          // m
  Interval lane_width_range;           // m
  std::vector<Weather> weather_choices;
  Interval weather_intensity_range;    // 0 = none, 1 = maximal
  Interval daytime_brightness_range;   // scene light multiplier
  Interval ego_speed_range;            // m/s, held constant per scenario
  std::vector<std::string> constraint_set;
};

DomainModel default_domain_model();

// One concrete assignment of every domain parameter.
struct Scenario {
  std::string id;
  RoadTopology road_topology = RoadTopology::straight;
  double curvature = 0.0;              // 0 exactly when road_topology == straight
  double road_length = 0.0;
  double lane_width = 0.0;
  Weather weather = Weather::sunny;
  double weather_intensity = 0.0;
  double brightness = 1.0;
  double ego_speed = 0.0;
  std::uint64_t rng_seed = 0;
};

struct ConstraintViolation {
  std::string constraint;  // e.g. "speed_on_curve" or "out_of_range:ego_speed"
  std::string reason;
};

// Knobs the cross-field constraints read; defaults match the mission profile.
struct ConstraintContext {
  double sim_duration = 25.0;       // s
  double road_length_margin = 10.0; // m of road required beyond speed * duration
};

// Pure validity check: range violations for every field plus each named
// constraint from the model's constraint_set. Empty result == valid.
std::vector<ConstraintViolation> check_constraints(const Scenario& s, const DomainModel& d,
                                                   const ConstraintContext& ctx = {});

// Rejection sampling with a fixed attempt budget; same (model, seed) always
// yields the same scenario. Throws SamplingExhaustedError when the budget runs out.
Scenario sample_scenario(const DomainModel& d, std::uint64_t seed, int attempt_budget = 1000,
                         const ConstraintContext& ctx = {});

// Fields left unset inherit from the parent; set fields must be subsets of the
// parent's (choice lists) or contained in the parent's interval (ranges).
// The constraint_set is always inherited, so validity stays monotone.
struct ModelRestriction {
  std::optional<std::vector<RoadTopology>> road_topology_choices;
  std::optional<Interval> curvature_range;
  std::optional<Interval> road_length_range;
  std::optional<Interval> lane_width_range;
  std::optional<std::vector<Weather>> weather_choices;
  std::optional<Interval> weather_intensity_range;
  std::optional<Interval> daytime_brightness_range;
  std::optional<Interval> ego_speed_range;
};

DomainModel restrict_model(const DomainModel& parent, const ModelRestriction& keep);

}  // namespace lanebench
