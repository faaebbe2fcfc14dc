#include "lanebench/campaign.hpp"

#include <algorithm>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <fstream>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "lanebench/errors.hpp"
#include "lanebench/rng.hpp"

namespace lanebench {
namespace {

void write_text_file(const std::string& body, const std::filesystem::path& p) {
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary);
  if (!out) throw IoError("cannot write " + p.string());
  out << body;
  if (!out) throw IoError("short write to " + p.string());
}

template <typename... Args>
void appendf(std::string& s, const char* f, Args... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  s += buf;
}

int loop_threads(int jobs) {
#ifdef _OPENMP
  return jobs > 0 ? jobs : omp_get_max_threads();
#else
  (void)jobs;
  return 1;
#endif
}

}  // namespace

CampaignConfig default_campaign_config() {
  CampaignConfig c;
  c.domain_model = default_domain_model();
  // Matched scenarios stay close to the recording's regime: clear weather,
  // gentle bends, speeds near the recording speed, and roads long enough for
  // the full mission at those speeds.
  c.matched_overrides.weather_choices = std::vector<Weather>{Weather::sunny};
  c.matched_overrides.curvature_range = Interval{0.003, 0.005};
  c.matched_overrides.road_length_range = Interval{310.0, 500.0};
  c.matched_overrides.ego_speed_range = Interval{8.0, 12.0};
  c.matched_overrides.daytime_brightness_range = Interval{0.7, 1.0};
  c.controller.kind = "learned";
  return c;
}

void to_json(nlohmann::json& j, const ControllerSpec& s) {
  j = nlohmann::json{{"kind", s.kind}};
  if (!s.model_file.empty()) j["model_file"] = s.model_file;
  if (s.kind == "windowed") j["window"] = s.window;
  if (s.kind == "oracle") j["lookahead"] = s.lookahead;
  if (s.kind == "biased") j["bias"] = s.bias;
  if (s.kind == "noisy") {
    j["sigma"] = s.sigma;
    j["seed"] = s.seed;
  }
  if (!s.inner.empty()) j["inner"] = s.inner.front();
}

void from_json(const nlohmann::json& j, ControllerSpec& s) {
  s = ControllerSpec{};
  s.kind = j.value("kind", "learned");
  s.model_file = j.value("model_file", "");
  s.window = j.value("window", 5);
  s.lookahead = j.value("lookahead", kDefaultLookahead);
  s.bias = j.value("bias", 0.0);
  s.sigma = j.value("sigma", 0.0);
  s.seed = j.value("seed", std::uint64_t{0});
  if (j.contains("inner")) s.inner.push_back(j.at("inner").get<ControllerSpec>());
}

namespace {

nlohmann::json config_to_json(const CampaignConfig& c) {
  return nlohmann::json{
      {"master_seed", c.master_seed},
      {"jobs", c.jobs},
      {"domain_model", c.domain_model},
      {"matched_overrides", c.matched_overrides},
      {"sim",
       {{"t_delta", c.sim.t_delta},
        {"duration_T", c.sim.duration_T},
        {"wheelbase", c.sim.wheelbase}}},
      {"camera",
       {{"width", c.camera.width},
        {"height", c.camera.height},
        {"mount_height", c.camera.mount_height},
        {"fov_deg", c.camera.fov_deg}}},
      {"test_scenario_count", c.test_scenario_count},
      {"matched_scenario_count", c.matched_scenario_count},
      {"recording_frames", c.recording_frames},
      {"recording_speed", c.recording_speed},
      {"recording_curvature", c.recording_curvature},
      {"recording_jitter_sigma", c.recording_jitter_sigma},
      {"epsilon", c.epsilon},
      {"thresholds", {{"mae", c.thresholds.mae}, {"mdcl", c.thresholds.mdcl}}},
      {"train",
       {{"scenario_count", c.train.scenario_count},
        {"jitter_sigma", c.train.jitter_sigma},
        {"epochs", c.train.options.epochs},
        {"batch_size", c.train.options.batch_size},
        {"learning_rate", c.train.options.learning_rate},
        {"hidden_size", c.train.options.hidden_size}}},
      {"controller", c.controller},
      {"save_datasets", c.save_datasets}};
}

void config_from_json(const nlohmann::json& j, CampaignConfig& c) {
  c = default_campaign_config();
  c.master_seed = j.value("master_seed", c.master_seed);
  c.jobs = j.value("jobs", c.jobs);
  if (j.contains("domain_model")) c.domain_model = j.at("domain_model").get<DomainModel>();
  if (j.contains("matched_overrides")) {
    c.matched_overrides = j.at("matched_overrides").get<ModelRestriction>();
  }
  if (j.contains("sim")) {
    const auto& s = j.at("sim");
    c.sim.t_delta = s.value("t_delta", c.sim.t_delta);
    c.sim.duration_T = s.value("duration_T", c.sim.duration_T);
    c.sim.wheelbase = s.value("wheelbase", c.sim.wheelbase);
  }
  if (j.contains("camera")) {
    const auto& s = j.at("camera");
    c.camera.width = s.value("width", c.camera.width);
    c.camera.height = s.value("height", c.camera.height);
    c.camera.mount_height = s.value("mount_height", c.camera.mount_height);
    c.camera.fov_deg = s.value("fov_deg", c.camera.fov_deg);
  }
  c.test_scenario_count = j.value("test_scenario_count", c.test_scenario_count);
  c.matched_scenario_count = j.value("matched_scenario_count", c.matched_scenario_count);
  c.recording_frames = j.value("recording_frames", c.recording_frames);
  c.recording_speed = j.value("recording_speed", c.recording_speed);
  c.recording_curvature = j.value("recording_curvature", c.recording_curvature);
  c.recording_jitter_sigma = j.value("recording_jitter_sigma", c.recording_jitter_sigma);
  c.epsilon = j.value("epsilon", c.epsilon);
  if (j.contains("thresholds")) {
    c.thresholds.mae = j.at("thresholds").value("mae", c.thresholds.mae);
    c.thresholds.mdcl = j.at("thresholds").value("mdcl", c.thresholds.mdcl);
  }
  if (j.contains("train")) {
    const auto& t = j.at("train");
    c.train.scenario_count = t.value("scenario_count", c.train.scenario_count);
    c.train.jitter_sigma = t.value("jitter_sigma", c.train.jitter_sigma);
    c.train.options.epochs = t.value("epochs", c.train.options.epochs);
    c.train.options.batch_size = t.value("batch_size", c.train.options.batch_size);
    c.train.options.learning_rate = t.value("learning_rate", c.train.options.learning_rate);
    c.train.options.hidden_size = t.value("hidden_size", c.train.options.hidden_size);
  }
  if (j.contains("controller")) c.controller = j.at("controller").get<ControllerSpec>();
  c.save_datasets = j.value("save_datasets", c.save_datasets);
}

}  // namespace

CampaignConfig load_campaign_config(const std::filesystem::path& p) {
  CampaignConfig c;
  try {
    config_from_json(load_json_file(p), c);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("bad campaign config " + p.string() + ": " + e.what());
  }
  return c;
}

void save_campaign_config(const CampaignConfig& c, const std::filesystem::path& p) {
  save_json_file(config_to_json(c), p);
}

std::unique_ptr<Controller> make_controller(const ControllerSpec& spec,
                                            std::shared_ptr<const MlpParams> campaign_model) {
  if (spec.kind == "oracle") {
    return std::make_unique<OracleController>(spec.lookahead);
  }
  if (spec.kind == "learned" || spec.kind == "windowed") {
    std::shared_ptr<const MlpParams> params = campaign_model;
    int window = spec.kind == "windowed" ? spec.window : 1;
    if (!spec.model_file.empty()) {
      LoadedModel lm = load_model(spec.model_file);
      params = std::make_shared<const MlpParams>(std::move(lm.params));
      if (spec.kind == "windowed" && lm.history_window > 1) window = lm.history_window;
    }
    if (!params) {
      throw ConfigError("controller kind '" + spec.kind +
                        "' needs a model_file or a campaign-trained model");
    }
    return std::make_unique<MlpController>(std::move(params), window);
  }
  if (spec.kind == "biased" || spec.kind == "noisy") {
    if (spec.inner.size() != 1) {
      throw ConfigError("controller kind '" + spec.kind + "' needs exactly one inner spec");
    }
    std::shared_ptr<Controller> inner = make_controller(spec.inner.front(), campaign_model);
    if (spec.kind == "biased") return std::make_unique<BiasedController>(inner, spec.bias);
    return std::make_unique<NoisyController>(inner, spec.sigma, spec.seed);
  }
  throw ConfigError("unknown controller kind: " + spec.kind);
}

int effective_window(const ControllerSpec& spec) {
  if (spec.kind == "windowed") return spec.window;
  if (spec.kind == "learned") return 1;
  if (!spec.inner.empty()) return effective_window(spec.inner.front());
  return 1;
}

bool needs_trained_model(const ControllerSpec& spec) {
  if ((spec.kind == "learned" || spec.kind == "windowed") && spec.model_file.empty()) return true;
  for (const ControllerSpec& in : spec.inner) {
    if (needs_trained_model(in)) return true;
  }
  return false;
}

Scenario recording_scenario(const CampaignConfig& c) {
  Scenario s;
  char idbuf[32];
  std::snprintf(idbuf, sizeof idbuf, "rec-%016" PRIx64,
                c.master_seed ^ seed_phase::kRecording);
  s.id = idbuf;
  s.road_topology = RoadTopology::s_curve;
  s.curvature = c.recording_curvature;
  // Room for the whole drive plus the lookahead margin at the far end.
  s.road_length = c.recording_speed * c.recording_frames * c.sim.t_delta + 20.0;
  s.lane_width = 3.5;
  s.weather = Weather::sunny;
  s.weather_intensity = 0.0;
  s.brightness = 0.9;
  s.ego_speed = c.recording_speed;
  s.rng_seed = c.master_seed ^ seed_phase::kRecording;
  return s;
}

CampaignResult run_campaign(const CampaignConfig& c) {
  if (c.test_scenario_count < 0 || c.matched_scenario_count < 0 || c.recording_frames < 1) {
    throw ConfigError("campaign counts must be non-negative (recording needs >= 1 frame)");
  }
  const DomainModel matched_model = restrict_model(c.domain_model, c.matched_overrides);
  const ConstraintContext cctx{c.sim.duration_T, 10.0};
  const bool writing = !c.out_dir.empty();
  const int threads = loop_threads(c.jobs);

  CampaignResult result;

  // --- Train the regressor the controller spec asks for (if any). ---
  std::shared_ptr<const MlpParams> model;
  if (needs_trained_model(c.controller)) {
    std::vector<LabeledDataset> train_sets(static_cast<std::size_t>(c.train.scenario_count));
#pragma omp parallel for schedule(dynamic) num_threads(threads)
    for (int i = 0; i < c.train.scenario_count; ++i) {
      const Scenario scn = sample_scenario(
          c.domain_model, c.master_seed ^ (seed_phase::kTrainScenario + i), 1000, cctx);
      train_sets[i] = generate_pseudo_real_dataset(
          scn, c.sim, c.train.jitter_sigma, c.master_seed ^ (seed_phase::kTrainJitter + i),
          c.camera);
    }
    std::vector<const LabeledDataset*> ptrs;
    for (const LabeledDataset& ds : train_sets) ptrs.push_back(&ds);
    TrainOptions opt = c.train.options;
    opt.history_window = effective_window(c.controller);
    opt.seed = c.master_seed ^ seed_phase::kTrainer;
    model = std::make_shared<const MlpParams>(train_mlp(ptrs, opt, &result.train_report));
    if (writing) {
      save_model(*model, opt.history_window, c.out_dir / "model.bin");
      if (c.save_datasets) {
        for (const LabeledDataset& ds : train_sets) {
          save_dataset(ds, c.out_dir / "datasets" / "train" / ds.id);
        }
      }
    }
  }

  // Resolve any file-based model once instead of per scenario.
  ControllerSpec spec = c.controller;
  {
    ControllerSpec* node = &spec;
    while (true) {
      if ((node->kind == "learned" || node->kind == "windowed") && !node->model_file.empty()) {
        LoadedModel lm = load_model(node->model_file);
        if (node->kind == "windowed" && lm.history_window > 1) node->window = lm.history_window;
        model = std::make_shared<const MlpParams>(std::move(lm.params));
        node->model_file.clear();
        break;
      }
      if (node->inner.empty()) break;
      node = &node->inner.front();
    }
  }

  // --- The long reference drive all matched scenarios are compared against. ---
  const Scenario rec_scn = recording_scenario(c);
  SimConfig rec_cfg = c.sim;
  rec_cfg.duration_T = c.recording_frames * c.sim.t_delta;
  const LabeledDataset recording = generate_pseudo_real_dataset(
      rec_scn, rec_cfg, c.recording_jitter_sigma, c.master_seed ^ seed_phase::kRecordingJitter,
      c.camera);
  const std::vector<double> rec_labels = recording.labels();
  if (writing) {
    save_scenario(rec_scn, c.out_dir / "scenarios" / "recording" / (rec_scn.id + ".json"));
    if (c.save_datasets) save_dataset(recording, c.out_dir / "datasets" / "recording");
  }

  // --- Matched-pair study: sim datasets vs recording subsequences. ---
  result.matches.assign(static_cast<std::size_t>(c.matched_scenario_count), MatchedPairEntry{});
#pragma omp parallel for schedule(dynamic) num_threads(threads)
  for (int i = 0; i < c.matched_scenario_count; ++i) {
    const Scenario scn = sample_scenario(
        matched_model, c.master_seed ^ (seed_phase::kMatchedScenario + i), 1000, cctx);
    const LabeledDataset sim_ds = generate_sim_dataset(scn, c.sim, c.camera);
    MatchedPairEntry entry;
    entry.sim_id = sim_ds.id;
    entry.real_id = recording.id;
    entry.match = find_comparable(sim_ds.labels(), rec_labels, c.epsilon,
                                  c.master_seed ^ (seed_phase::kMatchTie + i));
    const std::unique_ptr<Controller> on_sim = make_controller(spec, model);
    entry.mae_sim = evaluate_offline(*on_sim, sim_ds).mae;
    if (entry.match.comparable) {
      const LabeledDataset real_slice =
          slice_dataset(recording, entry.match.offset_x, entry.match.length_l);
      const std::unique_ptr<Controller> on_real = make_controller(spec, model);
      entry.mae_real = evaluate_offline(*on_real, real_slice).mae;
      entry.consistent = consistent(*entry.mae_sim, *entry.mae_real, kConsistencyTolerance);
    }
    result.matches[static_cast<std::size_t>(i)] = std::move(entry);
    if (writing) {
      save_scenario(scn, c.out_dir / "scenarios" / "matched" / (scn.id + ".json"));
      if (c.save_datasets) save_dataset(sim_ds, c.out_dir / "datasets" / "matched" / sim_ds.id);
    }
  }
  for (const MatchedPairEntry& e : result.matches) {
    result.comparable_count += e.match.comparable ? 1 : 0;
    result.consistent_count += (e.consistent && *e.consistent) ? 1 : 0;
  }

  // --- Agreement study: open-loop MAE vs closed-loop MDCL per test scenario. ---
  result.records.assign(static_cast<std::size_t>(c.test_scenario_count), AgreementRecord{});
  std::vector<OfflineResult> offline_results(result.records.size());
  std::vector<SimulationTrace> traces(result.records.size());
#pragma omp parallel for schedule(dynamic) num_threads(threads)
  for (int i = 0; i < c.test_scenario_count; ++i) {
    const Scenario scn = sample_scenario(c.domain_model,
                                         c.master_seed ^ (seed_phase::kTestScenario + i), 1000,
                                         cctx);
    const LabeledDataset sim_ds = generate_sim_dataset(scn, c.sim, c.camera);
    const std::unique_ptr<Controller> off_c = make_controller(spec, model);
    offline_results[i] = evaluate_offline(*off_c, sim_ds);
    const std::unique_ptr<Controller> on_c = make_controller(spec, model);
    traces[i] = run_closed_loop(*on_c, scn, c.sim, c.camera);
    result.records[i] =
        classify(scn.id, offline_results[i].mae, mdcl(traces[i]).normalized, c.thresholds);
    if (writing) {
      save_scenario(scn, c.out_dir / "scenarios" / "test" / (scn.id + ".json"));
      save_trace(traces[i], c.out_dir / "traces" / scn.id);
      if (c.save_datasets) save_dataset(sim_ds, c.out_dir / "datasets" / "test" / sim_ds.id);
    }
  }
  result.table = contingency(result.records);

  if (writing) {
    std::string off_csv = "scenario_id,frames,mae,rmse\n";
    std::string on_csv = "scenario_id,steps,aborted,completed_road,mdcl_raw,mdcl_normalized\n";
    for (std::size_t i = 0; i < result.records.size(); ++i) {
      appendf(off_csv, "%s,%zu,%.17g,%.17g\n", result.records[i].scenario_id.c_str(),
              offline_results[i].per_frame_abs_error.size(), offline_results[i].mae,
              offline_results[i].rmse);
      const MdclValue v = mdcl(traces[i]);
      appendf(on_csv, "%s,%zu,%d,%d,%.17g,%.17g\n", result.records[i].scenario_id.c_str(),
              traces[i].steps.size(), traces[i].aborted ? 1 : 0,
              traces[i].completed_road ? 1 : 0, v.raw_max_abs_deviation, v.normalized);
    }
    write_text_file(off_csv, c.out_dir / "offline_results.csv");
    write_text_file(on_csv, c.out_dir / "online_results.csv");

    std::string m_csv =
        "sim_id,real_id,offset_x,length_l,mean_abs_angle_diff,comparable,mae_sim,mae_real,"
        "consistent\n";
    for (const MatchedPairEntry& e : result.matches) {
      appendf(m_csv, "%s,%s,%zu,%zu,%.17g,%d,", e.sim_id.c_str(), e.real_id.c_str(),
              e.match.offset_x, e.match.length_l, e.match.mean_abs_angle_diff,
              e.match.comparable ? 1 : 0);
      if (e.mae_sim) appendf(m_csv, "%.17g,", *e.mae_sim);
      else m_csv += ",";
      if (e.mae_real) appendf(m_csv, "%.17g,", *e.mae_real);
      else m_csv += ",";
      if (e.consistent) m_csv += *e.consistent ? "1" : "0";
      m_csv += "\n";
    }
    write_text_file(m_csv, c.out_dir / "matches.csv");

    save_campaign_config(c, c.out_dir / "campaign_config.json");
    emit_report(result.records, result.matches, c.out_dir, c.thresholds);
    result.report_path = c.out_dir / "report.json";
  }
  return result;
}

}  // namespace lanebench
