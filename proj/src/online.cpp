#include "lanebench/online.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <deque>
#include <fstream>

#include <json.hpp>

#include "lanebench/errors.hpp"
#include "lanebench/serialize.hpp"
#include "lanebench/world.hpp"

namespace lanebench {

SimulationTrace run_closed_loop(Controller& c, const Scenario& scn, const SimConfig& cfg,
                                const CameraConfig& cam) {
  const Road road = build_road(scn);
  VehicleState pose = start_pose(road, scn.ego_speed);

  SimulationTrace trace;
  trace.scenario_id = scn.id;
  trace.cfg = cfg;

  c.begin_run(road, pose, cfg);
  const int window = std::max(1, c.history_window());
  std::deque<Image> history;

  const int m = cfg.steps_m();
  trace.steps.reserve(m);
  for (int j = 0; j < m; ++j) {
    double lateral;
    double theta;
    try {
      lateral = road.lateral_deviation(pose.x, pose.y);
      history.push_back(render(road, pose, scn, cam));
      if (static_cast<int>(history.size()) > window) history.pop_front();
      StepContext ctx;
      for (const Image& im : history) ctx.frames.push_back(&im);
      ctx.road = &road;
      ctx.pose = &pose;
      theta = c.predict(ctx);
    } catch (const EndOfRoadError&) {
      trace.completed_road = true;
      break;
    }
    trace.steps.push_back({j, j * cfg.t_delta, pose, theta, lateral});
    if (std::abs(lateral) >= kAbortDeviationMeters) {
      trace.aborted = true;  // hopeless departure; stop burning compute
      break;
    }
    pose = step(pose, theta, cfg);
  }
  return trace;
}

MdclValue mdcl(const SimulationTrace& trace) {
  MdclValue v;
  for (const TraceStep& s : trace.steps) {
    v.raw_max_abs_deviation = std::max(v.raw_max_abs_deviation, std::abs(s.lateral_dev));
  }
  v.normalized = std::min(v.raw_max_abs_deviation, kLaneDepartureMeters) / kLaneDepartureMeters;
  return v;
}

void save_trace(const SimulationTrace& trace, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  std::ofstream csv(dir / "trace.csv");
  if (!csv) throw IoError("cannot write " + (dir / "trace.csv").string());
  csv << "step,t,x,y,heading,speed,steering,lateral_dev\n";
  char row[256];
  for (const TraceStep& s : trace.steps) {
    std::snprintf(row, sizeof row, "%d,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", s.index, s.t,
                  s.pose.x, s.pose.y, s.pose.heading, s.pose.speed, s.steering, s.lateral_dev);
    csv << row;
  }
  if (!csv) throw IoError("short write to trace.csv");

  const MdclValue v = mdcl(trace);
  nlohmann::json summary{{"scenario_id", trace.scenario_id},
                         {"steps", trace.steps.size()},
                         {"aborted", trace.aborted},
                         {"completed_road", trace.completed_road},
                         {"mdcl_raw", v.raw_max_abs_deviation},
                         {"mdcl_normalized", v.normalized},
                         {"t_delta", trace.cfg.t_delta},
                         {"duration_T", trace.cfg.duration_T},
                         {"wheelbase", trace.cfg.wheelbase}};
  save_json_file(summary, dir / "summary.json");
}

SimulationTrace load_trace(const std::filesystem::path& dir) {
  const nlohmann::json summary = load_json_file(dir / "summary.json");
  SimulationTrace trace;
  try {
    trace.scenario_id = summary.at("scenario_id").get<std::string>();
    trace.aborted = summary.at("aborted").get<bool>();
    trace.completed_road = summary.at("completed_road").get<bool>();
    trace.cfg.t_delta = summary.at("t_delta").get<double>();
    trace.cfg.duration_T = summary.at("duration_T").get<double>();
    trace.cfg.wheelbase = summary.at("wheelbase").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw IoError("bad summary in " + dir.string() + ": " + e.what());
  }

  std::ifstream csv(dir / "trace.csv");
  if (!csv) throw IoError("cannot open " + (dir / "trace.csv").string());
  std::string line;
  std::getline(csv, line);  // header
  while (std::getline(csv, line)) {
    if (line.empty()) continue;
    TraceStep s;
    if (std::sscanf(line.c_str(), "%d,%lg,%lg,%lg,%lg,%lg,%lg,%lg", &s.index, &s.t, &s.pose.x,
                    &s.pose.y, &s.pose.heading, &s.pose.speed, &s.steering,
                    &s.lateral_dev) != 8) {
      throw IoError("malformed trace.csv row: " + line);
    }
    trace.steps.push_back(s);
  }
  return trace;
}

}  // namespace lanebench
