#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "lanebench/analysis.hpp"
#include "lanebench/controllers.hpp"
#include "lanebench/matching.hpp"
#include "lanebench/offline.hpp"
#include "lanebench/online.hpp"
#include "lanebench/scenario.hpp"
#include "lanebench/serialize.hpp"

namespace lanebench {

// Stream i of phase P draws its seed as master_seed ^ (P + i). Phases are far
// apart so streams never collide within sane counts.
namespace seed_phase {
inline constexpr std::uint64_t kTestScenario = 0;
inline constexpr std::uint64_t kTrainScenario = 1ull << 20;
inline constexpr std::uint64_t kMatchedScenario = 1ull << 21;
inline constexpr std::uint64_t kRecording = 1ull << 22;
inline constexpr std::uint64_t kTrainer = (1ull << 22) + 1;
inline constexpr std::uint64_t kRecordingJitter = (1ull << 22) + 2;
inline constexpr std::uint64_t kMatchTie = 1ull << 23;
inline constexpr std::uint64_t kTrainJitter = 1ull << 24;
}  // namespace seed_phase

// Recursive controller description. biased/noisy wrap exactly one inner spec.
struct ControllerSpec {
  std::string kind = "learned";  // oracle | learned | windowed | biased | noisy
  std::string model_file;        // learned/windowed; empty = use the campaign-trained model
  int window = 5;                // windowed only
  double lookahead = kDefaultLookahead;  // oracle only
  double bias = 0.0;             // biased only
  double sigma = 0.0;            // noisy only
  std::uint64_t seed = 0;        // noisy only
  std::vector<ControllerSpec> inner;
};

struct TrainConfig {
  int scenario_count = 24;
  double jitter_sigma = 0.05;  // executed-steering jitter in the training drives
  TrainOptions options;
};

struct CampaignConfig {
  std::uint64_t master_seed = 42;
  std::filesystem::path out_dir;  // empty: compute only, write nothing
  int jobs = 0;                   // OpenMP threads for the scenario loops; 0 = default
  DomainModel domain_model;
  ModelRestriction matched_overrides;  // restriction for recording-matched scenarios
  SimConfig sim;
  CameraConfig camera;
  int test_scenario_count = 50;     // offline-vs-online agreement study
  int matched_scenario_count = 100; // sim datasets matched against the recording
  int recording_frames = 5000;
  double recording_speed = 10.0;    // m/s
  double recording_curvature = 0.004;
  double recording_jitter_sigma = 0.02;
  double epsilon = kComparableEpsilon;
  Thresholds thresholds;
  TrainConfig train;
  ControllerSpec controller;
  bool save_datasets = false;  // persist every generated dataset under out_dir
};

CampaignConfig default_campaign_config();
CampaignConfig load_campaign_config(const std::filesystem::path& p);
void save_campaign_config(const CampaignConfig& c, const std::filesystem::path& p);

void to_json(nlohmann::json& j, const ControllerSpec& s);
void from_json(const nlohmann::json& j, ControllerSpec& s);

// Builds the controller tree. learned/windowed nodes with an empty model_file
// use `campaign_model`; nodes naming a file load it themselves.
std::unique_ptr<Controller> make_controller(const ControllerSpec& spec,
                                            std::shared_ptr<const MlpParams> campaign_model = {});

// History window demanded by the outermost learned/windowed node (1 if none).
int effective_window(const ControllerSpec& spec);
// True when some node needs the campaign-trained model.
bool needs_trained_model(const ControllerSpec& spec);

// The long pseudo-real drive every simulated scenario is matched against; a
// gentle s-curve lap emulating prerecorded human footage. Not validated
// against the domain model: its length is dictated by recording_frames.
Scenario recording_scenario(const CampaignConfig& c);

struct CampaignResult {
  std::vector<AgreementRecord> records;  // one per test scenario
  ContingencyTable table;
  std::vector<MatchedPairEntry> matches;         // one per matched sim scenario
  int comparable_count = 0;
  int consistent_count = 0;
  TrainReport train_report;
  std::filesystem::path report_path;     // set when out_dir was given
};

// Full pipeline: train (if needed) -> recording -> matched-pair study ->
// closed-loop study -> report. Deterministic for a fixed config.
CampaignResult run_campaign(const CampaignConfig& c);

}  // namespace lanebench
