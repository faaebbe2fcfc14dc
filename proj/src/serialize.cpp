#include "lanebench/serialize.hpp"

#include <fstream>

#include "lanebench/errors.hpp"

namespace lanebench {

void to_json(nlohmann::json& j, const Interval& v) { j = nlohmann::json::array({v.lo, v.hi}); }

void from_json(const nlohmann::json& j, Interval& v) {
  if (!j.is_array() || j.size() != 2) throw ConfigError("interval must be a [lo, hi] pair");
  v.lo = j.at(0).get<double>();
  v.hi = j.at(1).get<double>();
  if (!(v.lo <= v.hi)) throw ConfigError("interval lo must not exceed hi");
}

void to_json(nlohmann::json& j, const Scenario& s) {
  j = nlohmann::json{{"id", s.id},
                     {"road_topology", to_string(s.road_topology)},
                     {"curvature", s.curvature},
                     {"road_length", s.road_length},
                     {"lane_width", s.lane_width},
                     {"weather", to_string(s.weather)},
                     {"weather_intensity", s.weather_intensity},
                     {"brightness", s.brightness},
                     {"ego_speed", s.ego_speed},
                     {"rng_seed", s.rng_seed}};
}

void from_json(const nlohmann::json& j, Scenario& s) {
  s.id = j.at("id").get<std::string>();
  s.road_topology = topology_from_string(j.at("road_topology").get<std::string>());
  s.curvature = j.at("curvature").get<double>();
  s.road_length = j.at("road_length").get<double>();
  s.lane_width = j.at("lane_width").get<double>();
  s.weather = weather_from_string(j.at("weather").get<std::string>());
  s.weather_intensity = j.at("weather_intensity").get<double>();
  s.brightness = j.at("brightness").get<double>();
  s.ego_speed = j.at("ego_speed").get<double>();
  s.rng_seed = j.at("rng_seed").get<std::uint64_t>();
}

namespace {

template <typename T>
nlohmann::json names_of(const std::vector<T>& v) {
  nlohmann::json a = nlohmann::json::array();
  for (const T& x : v) a.push_back(to_string(x));
  return a;
}

}  // namespace

void to_json(nlohmann::json& j, const DomainModel& d) {
  j = nlohmann::json{{"road_topology_choices", names_of(d.road_topology_choices)},
                     {"curvature_range", d.curvature_range},
                     {"road_length_range", d.road_length_range},
                     {"lane_width_range", d.lane_width_range},
                     {"weather_choices", names_of(d.weather_choices)},
                     {"weather_intensity_range", d.weather_intensity_range},
                     {"daytime_brightness_range", d.daytime_brightness_range},
                     {"ego_speed_range", d.ego_speed_range},
                     {"constraint_set", d.constraint_set}};
}

void from_json(const nlohmann::json& j, DomainModel& d) {
  d.road_topology_choices.clear();
  for (const auto& x : j.at("road_topology_choices")) {
    d.road_topology_choices.push_back(topology_from_string(x.get<std::string>()));
  }
  d.curvature_range = j.at("curvature_range").get<Interval>();
  d.road_length_range = j.at("road_length_range").get<Interval>();
  d.lane_width_range = j.at("lane_width_range").get<Interval>();
  d.weather_choices.clear();
  for (const auto& x : j.at("weather_choices")) {
    d.weather_choices.push_back(weather_from_string(x.get<std::string>()));
  }
  d.weather_intensity_range = j.at("weather_intensity_range").get<Interval>();
  d.daytime_brightness_range = j.at("daytime_brightness_range").get<Interval>();
  d.ego_speed_range = j.at("ego_speed_range").get<Interval>();
  d.constraint_set = j.at("constraint_set").get<std::vector<std::string>>();
}

void to_json(nlohmann::json& j, const ModelRestriction& r) {
  j = nlohmann::json::object();
  if (r.road_topology_choices) j["road_topology_choices"] = names_of(*r.road_topology_choices);
  if (r.curvature_range) j["curvature_range"] = *r.curvature_range;
  if (r.road_length_range) j["road_length_range"] = *r.road_length_range;
  if (r.lane_width_range) j["lane_width_range"] = *r.lane_width_range;
  if (r.weather_choices) j["weather_choices"] = names_of(*r.weather_choices);
  if (r.weather_intensity_range) j["weather_intensity_range"] = *r.weather_intensity_range;
  if (r.daytime_brightness_range) j["daytime_brightness_range"] = *r.daytime_brightness_range;
  if (r.ego_speed_range) j["ego_speed_range"] = *r.ego_speed_range;
}

void from_json(const nlohmann::json& j, ModelRestriction& r) {
  r = ModelRestriction{};
  if (j.contains("road_topology_choices")) {
    std::vector<RoadTopology> v;
    for (const auto& x : j.at("road_topology_choices")) {
      v.push_back(topology_from_string(x.get<std::string>()));
    }
    r.road_topology_choices = std::move(v);
  }
  if (j.contains("curvature_range")) r.curvature_range = j.at("curvature_range").get<Interval>();
  if (j.contains("road_length_range")) {
    r.road_length_range = j.at("road_length_range").get<Interval>();
  }
  if (j.contains("lane_width_range")) {
    r.lane_width_range = j.at("lane_width_range").get<Interval>();
  }
  if (j.contains("weather_choices")) {
    std::vector<Weather> v;
    for (const auto& x : j.at("weather_choices")) {
      v.push_back(weather_from_string(x.get<std::string>()));
    }
    r.weather_choices = std::move(v);
  }
  if (j.contains("weather_intensity_range")) {
    r.weather_intensity_range = j.at("weather_intensity_range").get<Interval>();
  }
  if (j.contains("daytime_brightness_range")) {
    r.daytime_brightness_range = j.at("daytime_brightness_range").get<Interval>();
  }
  if (j.contains("ego_speed_range")) r.ego_speed_range = j.at("ego_speed_range").get<Interval>();
}

nlohmann::json load_json_file(const std::filesystem::path& p) {
  std::ifstream in(p);
  if (!in) throw IoError("cannot open " + p.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw IoError("malformed JSON in " + p.string() + ": " + e.what());
  }
  return j;
}

void save_json_file(const nlohmann::json& j, const std::filesystem::path& p) {
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary);
  if (!out) throw IoError("cannot write " + p.string());
  out << j.dump(2) << '\n';
  if (!out) throw IoError("short write to " + p.string());
}

void save_scenario(const Scenario& s, const std::filesystem::path& p) {
  save_json_file(nlohmann::json(s), p);
}

Scenario load_scenario(const std::filesystem::path& p) {
  try {
    return load_json_file(p).get<Scenario>();
  } catch (const nlohmann::json::exception& e) {
    throw IoError("bad scenario file " + p.string() + ": " + e.what());
  }
}

}  // namespace lanebench
