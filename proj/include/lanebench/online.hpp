#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "lanebench/camera.hpp"
#include "lanebench/controllers.hpp"
#include "lanebench/dynamics.hpp"
#include "lanebench/scenario.hpp"

namespace lanebench {

inline constexpr double kLaneDepartureMeters = 1.5;   // deviation cap in the metric
inline constexpr double kAbortDeviationMeters = 3.0;  // stop simulating past this

struct TraceStep {
  int index = 0;
  double t = 0.0;  // s since run start
  VehicleState pose;
  double steering = 0.0;     // command executed at this step
  double lateral_dev = 0.0;  // signed, + left of the centerline, at the pre-step pose
};

struct SimulationTrace {
  std::string scenario_id;
  SimConfig cfg;
  std::vector<TraceStep> steps;
  bool aborted = false;         // |lateral_dev| crossed the abort bound
  bool completed_road = false;  // ran off the road extent before the mission ended
};

// Closed loop: render at the current pose, ask the controller, advance the
// vehicle by the returned steering, repeat for cfg.steps_m() steps (or until
// abort / road end). Every step's frame feeds the controller's history window.
SimulationTrace run_closed_loop(Controller& c, const Scenario& scn, const SimConfig& cfg,
                                const CameraConfig& cam = {});

struct MdclValue {
  double raw_max_abs_deviation = 0.0;  // m, before capping
  double normalized = 0.0;             // min(raw, 1.5) / 1.5, in [0, 1]
};

MdclValue mdcl(const SimulationTrace& trace);

// <dir>/trace.csv (step,t,x,y,heading,steering,lateral_dev) and
// <dir>/summary.json (mdcl_raw, mdcl_normalized, aborted, ...).
void save_trace(const SimulationTrace& trace, const std::filesystem::path& dir);
SimulationTrace load_trace(const std::filesystem::path& dir);

}  // namespace lanebench
