#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "lanebench/camera.hpp"
#include "lanebench/controllers.hpp"
#include "lanebench/dynamics.hpp"
#include "lanebench/scenario.hpp"
#include "lanebench/world.hpp"

namespace lanebench {

enum class Provenance { simulated, pseudo_real };
std::string to_string(Provenance p);
Provenance provenance_from_string(const std::string& s);

struct LabeledFrame {
  Image image;
  double label = 0.0;  // normalized steering the vehicle executed at this frame
};

// Frame sequence with per-frame steering labels plus the geometry context that
// produced it. Poses are replayable: pose[j+1] == step(pose[j], label[j]).
class LabeledDataset {
 public:
  std::vector<LabeledFrame> frames;
  Provenance provenance = Provenance::simulated;
  std::string id;
  double fps = 20.0;
  bool truncated = false;  // generation stopped early at the road end
  Scenario scenario;
  SimConfig sim;
  std::shared_ptr<const Road> road;
  std::vector<VehicleState> poses;  // pose that produced frames[j]

  std::vector<double> labels() const;
};

// Drives the pure-pursuit oracle down the scenario road, rendering one frame
// per step; the label is the steering actually executed to reach the next pose.
LabeledDataset generate_sim_dataset(const Scenario& scn, const SimConfig& cfg,
                                    const CameraConfig& cam = {});

// Same pipeline with zero-mean Gaussian jitter added to each executed steering
// command (clamped to [-1, 1]). jitter_sigma == 0 reproduces the simulated
// dataset exactly. Stands in for imperfect human driving in recorded footage.
LabeledDataset generate_pseudo_real_dataset(const Scenario& scn, const SimConfig& cfg,
                                            double jitter_sigma, std::uint64_t seed,
                                            const CameraConfig& cam = {});

double mae(std::span<const double> labels, std::span<const double> predictions);
double rmse(std::span<const double> labels, std::span<const double> predictions);

struct OfflineResult {
  double mae = 0.0;
  double rmse = 0.0;
  std::vector<double> per_frame_abs_error;
};

// Open-loop evaluation: the controller sees recorded frames only; its outputs
// never feed back into the poses.
OfflineResult evaluate_offline(Controller& c, const LabeledDataset& ds);

// Contiguous [offset, offset + length) view materialized as a standalone dataset.
LabeledDataset slice_dataset(const LabeledDataset& ds, std::size_t offset, std::size_t length);

// On-disk layout: <dir>/manifest.json, <dir>/labels.csv, <dir>/frames/NNNNN.pgm.
void save_dataset(const LabeledDataset& ds, const std::filesystem::path& dir);
LabeledDataset load_dataset(const std::filesystem::path& dir);

}  // namespace lanebench
