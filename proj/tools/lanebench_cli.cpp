// Command-line front end: scenario sampling, dataset generation, training,
// open/closed-loop evaluation, sequence matching, analysis, full campaigns.
//
// Exit codes: 0 success, 2 bad arguments or configuration, 3 scenario sampling
// exhausted, 4 file I/O failure, 5 training diverged, 1 anything else.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "lanebench/campaign.hpp"
#include "lanebench/errors.hpp"

namespace lb = lanebench;

namespace {

lb::CampaignConfig load_config_or_default(const std::string& path) {
  if (path.empty()) return lb::default_campaign_config();
  return lb::load_campaign_config(path);
}

// Inline JSON (starts with '{') or a path to a JSON file.
lb::ControllerSpec parse_controller_arg(const std::string& arg) {
  nlohmann::json j;
  if (!arg.empty() && arg.front() == '{') {
    try {
      j = nlohmann::json::parse(arg);
    } catch (const nlohmann::json::exception& e) {
      throw lb::ConfigError(std::string("bad inline controller JSON: ") + e.what());
    }
  } else {
    j = lb::load_json_file(arg);
  }
  try {
    return j.get<lb::ControllerSpec>();
  } catch (const nlohmann::json::exception& e) {
    throw lb::ConfigError(std::string("bad controller spec: ") + e.what());
  }
}

// The standalone subcommands accept either --model (shorthand for a learned
// controller) or a full --controller spec.
lb::ControllerSpec controller_from_flags(const std::string& model_file,
                                         const std::string& controller_arg) {
  if (!controller_arg.empty()) return parse_controller_arg(controller_arg);
  if (!model_file.empty()) {
    lb::ControllerSpec spec;
    spec.kind = "learned";
    spec.model_file = model_file;
    return spec;
  }
  throw lb::ConfigError("need --model or --controller");
}

std::vector<std::string> split_csv_row(const std::string& line) {
  std::vector<std::string> out;
  std::size_t at = 0;
  while (true) {
    const std::size_t comma = line.find(',', at);
    if (comma == std::string::npos) {
      out.push_back(line.substr(at));
      break;
    }
    out.push_back(line.substr(at, comma - at));
    at = comma + 1;
  }
  return out;
}

std::vector<std::vector<std::string>> read_csv(const std::string& path, std::size_t min_cols) {
  std::ifstream in(path);
  if (!in) throw lb::IoError("cannot open " + path);
  std::vector<std::vector<std::string>> rows;
  std::string line;
  std::getline(in, line);  // header
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells = split_csv_row(line);
    if (cells.size() < min_cols) throw lb::IoError("short row in " + path + ": " + line);
    rows.push_back(std::move(cells));
  }
  return rows;
}

int cmd_sample(const std::string& config_path, int count, std::uint64_t seed,
               const std::string& out_dir, bool matched) {
  const lb::CampaignConfig cfg = load_config_or_default(config_path);
  lb::DomainModel model = cfg.domain_model;
  if (matched) model = lb::restrict_model(model, cfg.matched_overrides);
  const lb::ConstraintContext cctx{cfg.sim.duration_T, 10.0};
  for (int i = 0; i < count; ++i) {
    const lb::Scenario s = lb::sample_scenario(model, seed ^ static_cast<std::uint64_t>(i), 1000,
                                               cctx);
    if (!out_dir.empty()) lb::save_scenario(s, std::filesystem::path(out_dir) / (s.id + ".json"));
    std::printf("%s topology=%s curvature=%.4f length=%.1f lane=%.2f weather=%s/%.2f "
                "brightness=%.2f speed=%.2f\n",
                s.id.c_str(), lb::to_string(s.road_topology).c_str(), s.curvature, s.road_length,
                s.lane_width, lb::to_string(s.weather).c_str(), s.weather_intensity, s.brightness,
                s.ego_speed);
  }
  return 0;
}

int cmd_dataset(const std::string& config_path, const std::vector<std::string>& scenario_files,
                const std::string& kind, double sigma, std::uint64_t seed,
                const std::string& out_dir) {
  const lb::CampaignConfig cfg = load_config_or_default(config_path);
  if (kind != "sim" && kind != "pseudo_real") {
    throw lb::ConfigError("--kind must be sim or pseudo_real");
  }
  for (const std::string& file : scenario_files) {
    const lb::Scenario scn = lb::load_scenario(file);
    const lb::LabeledDataset ds =
        kind == "sim" ? lb::generate_sim_dataset(scn, cfg.sim, cfg.camera)
                      : lb::generate_pseudo_real_dataset(scn, cfg.sim, sigma,
                                                         seed ^ scn.rng_seed, cfg.camera);
    lb::save_dataset(ds, std::filesystem::path(out_dir) / ds.id);
    std::printf("%s frames=%zu truncated=%d -> %s\n", ds.id.c_str(), ds.frames.size(),
                ds.truncated ? 1 : 0, (std::filesystem::path(out_dir) / ds.id).c_str());
  }
  return 0;
}

int cmd_train(const std::string& config_path, std::uint64_t seed_override, bool has_seed,
              const std::string& out_file) {
  lb::CampaignConfig cfg = load_config_or_default(config_path);
  if (has_seed) cfg.master_seed = seed_override;
  std::vector<lb::LabeledDataset> sets;
  const lb::ConstraintContext cctx{cfg.sim.duration_T, 10.0};
  for (int i = 0; i < cfg.train.scenario_count; ++i) {
    const lb::Scenario scn = lb::sample_scenario(
        cfg.domain_model, cfg.master_seed ^ (lb::seed_phase::kTrainScenario + i), 1000, cctx);
    sets.push_back(lb::generate_pseudo_real_dataset(
        scn, cfg.sim, cfg.train.jitter_sigma,
        cfg.master_seed ^ (lb::seed_phase::kTrainJitter + i), cfg.camera));
  }
  std::vector<const lb::LabeledDataset*> ptrs;
  for (const lb::LabeledDataset& ds : sets) ptrs.push_back(&ds);
  lb::TrainOptions opt = cfg.train.options;
  opt.history_window = lb::effective_window(cfg.controller);
  opt.seed = cfg.master_seed ^ lb::seed_phase::kTrainer;
  lb::TrainReport report;
  const lb::MlpParams params = lb::train_mlp(ptrs, opt, &report);
  lb::save_model(params, opt.history_window, out_file);
  std::printf("trained on %d samples over %d epochs, final train MAE %.4f -> %s\n",
              report.samples, report.epochs_run, report.final_train_mae, out_file.c_str());
  return 0;
}

int cmd_offline(const std::string& model_file, const std::string& controller_arg,
                const std::vector<std::string>& dataset_dirs, const std::string& out_csv) {
  const lb::ControllerSpec spec = controller_from_flags(model_file, controller_arg);
  std::string csv = "scenario_id,frames,mae,rmse\n";
  for (const std::string& dir : dataset_dirs) {
    const lb::LabeledDataset ds = lb::load_dataset(dir);
    const std::unique_ptr<lb::Controller> c = lb::make_controller(spec);
    const lb::OfflineResult r = lb::evaluate_offline(*c, ds);
    std::printf("%s frames=%zu mae=%.4f rmse=%.4f\n", ds.id.c_str(), ds.frames.size(), r.mae,
                r.rmse);
    char row[256];
    std::snprintf(row, sizeof row, "%s,%zu,%.17g,%.17g\n", ds.scenario.id.c_str(),
                  ds.frames.size(), r.mae, r.rmse);
    csv += row;
  }
  if (!out_csv.empty()) {
    std::ofstream out(out_csv);
    if (!out) throw lb::IoError("cannot write " + out_csv);
    out << csv;
  }
  return 0;
}

int cmd_online(const std::string& config_path, const std::string& model_file,
               const std::string& controller_arg, const std::vector<std::string>& scenario_files,
               const std::string& out_dir) {
  const lb::CampaignConfig cfg = load_config_or_default(config_path);
  const lb::ControllerSpec spec = controller_from_flags(model_file, controller_arg);
  std::string csv = "scenario_id,steps,aborted,completed_road,mdcl_raw,mdcl_normalized\n";
  for (const std::string& file : scenario_files) {
    const lb::Scenario scn = lb::load_scenario(file);
    const std::unique_ptr<lb::Controller> c = lb::make_controller(spec);
    const lb::SimulationTrace trace = lb::run_closed_loop(*c, scn, cfg.sim, cfg.camera);
    const lb::MdclValue v = lb::mdcl(trace);
    if (!out_dir.empty()) lb::save_trace(trace, std::filesystem::path(out_dir) / scn.id);
    std::printf("%s steps=%zu aborted=%d mdcl_raw=%.3f mdcl=%.3f\n", scn.id.c_str(),
                trace.steps.size(), trace.aborted ? 1 : 0, v.raw_max_abs_deviation, v.normalized);
    char row[256];
    std::snprintf(row, sizeof row, "%s,%zu,%d,%d,%.17g,%.17g\n", scn.id.c_str(),
                  trace.steps.size(), trace.aborted ? 1 : 0, trace.completed_road ? 1 : 0,
                  v.raw_max_abs_deviation, v.normalized);
    csv += row;
  }
  if (!out_dir.empty()) {
    std::ofstream out(std::filesystem::path(out_dir) / "online_results.csv");
    if (!out) throw lb::IoError("cannot write online_results.csv");
    out << csv;
  }
  return 0;
}

int cmd_match(const std::vector<std::string>& sim_dirs, const std::string& real_dir,
              double epsilon, std::uint64_t seed, bool reference, const std::string& out_csv) {
  const lb::LabeledDataset real_ds = lb::load_dataset(real_dir);
  const std::vector<double> real_labels = real_ds.labels();
  std::string csv = "sim_id,real_id,offset_x,length_l,mean_abs_angle_diff,comparable\n";
  for (const std::string& dir : sim_dirs) {
    const lb::LabeledDataset sim_ds = lb::load_dataset(dir);
    const std::vector<double> sim_labels = sim_ds.labels();
    const lb::MatchResult m =
        reference ? lb::find_comparable_reference(sim_labels, real_labels, epsilon, seed)
                  : lb::find_comparable(sim_labels, real_labels, epsilon, seed);
    std::printf("%s vs %s offset=%zu length=%zu mean_diff=%.4f comparable=%d\n",
                sim_ds.id.c_str(), real_ds.id.c_str(), m.offset_x, m.length_l,
                m.mean_abs_angle_diff, m.comparable ? 1 : 0);
    char row[256];
    std::snprintf(row, sizeof row, "%s,%s,%zu,%zu,%.17g,%d\n", sim_ds.id.c_str(),
                  real_ds.id.c_str(), m.offset_x, m.length_l, m.mean_abs_angle_diff,
                  m.comparable ? 1 : 0);
    csv += row;
  }
  if (!out_csv.empty()) {
    std::ofstream out(out_csv);
    if (!out) throw lb::IoError("cannot write " + out_csv);
    out << csv;
  }
  return 0;
}

int cmd_analyze(const std::string& config_path, const std::string& offline_csv,
                const std::string& online_csv, const std::string& matches_csv,
                const std::string& out_dir) {
  const lb::CampaignConfig cfg = load_config_or_default(config_path);
  const auto off_rows = read_csv(offline_csv, 4);
  const auto on_rows = read_csv(online_csv, 6);
  std::vector<lb::AgreementRecord> records;
  for (const auto& off : off_rows) {
    bool joined = false;
    for (const auto& on : on_rows) {
      if (on[0] != off[0]) continue;
      records.push_back(
          lb::classify(off[0], std::stod(off[2]), std::stod(on[5]), cfg.thresholds));
      joined = true;
      break;
    }
    if (!joined) throw lb::ConfigError("scenario " + off[0] + " missing from " + online_csv);
  }
  std::vector<lb::MatchedPairEntry> matches;
  if (!matches_csv.empty()) {
    for (const auto& row : read_csv(matches_csv, 6)) {
      lb::MatchedPairEntry e;
      e.sim_id = row[0];
      e.real_id = row[1];
      e.match.offset_x = static_cast<std::size_t>(std::stoull(row[2]));
      e.match.length_l = static_cast<std::size_t>(std::stoull(row[3]));
      e.match.mean_abs_angle_diff = std::stod(row[4]);
      e.match.comparable = row[5] == "1";
      if (row.size() > 6 && !row[6].empty()) e.mae_sim = std::stod(row[6]);
      if (row.size() > 7 && !row[7].empty()) e.mae_real = std::stod(row[7]);
      if (row.size() > 8 && !row[8].empty()) e.consistent = row[8] == "1";
      matches.push_back(std::move(e));
    }
  }
  lb::emit_report(records, matches, out_dir, cfg.thresholds);
  const lb::ContingencyTable t = lb::contingency(records);
  std::printf("scenarios=%d n11=%d n12=%d n21=%d n22=%d -> %s/report.json\n", t.total(), t.n11,
              t.n12, t.n21, t.n22, out_dir.c_str());
  return 0;
}

int cmd_campaign(const std::string& config_path, std::uint64_t seed_override, bool has_seed,
                 const std::string& out_dir, int jobs, bool save_datasets) {
  lb::CampaignConfig cfg = load_config_or_default(config_path);
  if (has_seed) cfg.master_seed = seed_override;
  if (!out_dir.empty()) cfg.out_dir = out_dir;
  if (cfg.out_dir.empty()) throw lb::ConfigError("campaign needs --out (or out_dir in config)");
  if (jobs > 0) cfg.jobs = jobs;
  if (save_datasets) cfg.save_datasets = true;

  const lb::CampaignResult r = lb::run_campaign(cfg);
  if (r.train_report.samples > 0) {
    std::printf("trained on %d samples, final train MAE %.4f\n", r.train_report.samples,
                r.train_report.final_train_mae);
  }
  std::printf("matched %d/%zu comparable, %d consistent\n", r.comparable_count,
              r.matches.size(), r.consistent_count);
  std::printf("agreement: n11=%d n12=%d n21=%d n22=%d of %d\n", r.table.n11, r.table.n12,
              r.table.n21, r.table.n22, r.table.total());
  std::printf("report: %s\n", r.report_path.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"lane-keeping test bench: offline vs online evaluation of steering models"};
  app.require_subcommand(1);

  std::string config_path, out_path, kind = "sim", model_file, controller_arg;
  std::string real_dir, offline_csv, online_csv, matches_csv;
  std::vector<std::string> scenario_files, dataset_dirs, sim_dirs;
  int count = 10, jobs = 0;
  std::uint64_t seed = 0;
  double sigma = 0.02, epsilon = lb::kComparableEpsilon;
  bool matched = false, reference = false, save_datasets = false;
  bool has_seed = false;

  CLI::App* sample = app.add_subcommand("sample", "draw valid scenarios from the domain model");
  sample->add_option("--config", config_path, "campaign config JSON");
  sample->add_option("--count", count, "number of scenarios")->check(CLI::PositiveNumber);
  sample->add_option("--seed", seed, "base seed (scenario i uses seed^i)");
  sample->add_option("--out", out_path, "directory for scenario JSON files");
  sample->add_flag("--matched", matched, "sample from the recording-matched restriction");

  CLI::App* dataset = app.add_subcommand("dataset", "generate labeled frame datasets");
  dataset->add_option("--config", config_path, "campaign config JSON");
  dataset->add_option("--scenario", scenario_files, "scenario JSON file(s)")->required();
  dataset->add_option("--kind", kind, "sim | pseudo_real");
  dataset->add_option("--sigma", sigma, "steering jitter for pseudo_real");
  dataset->add_option("--seed", seed, "jitter seed");
  dataset->add_option("--out", out_path, "parent directory for dataset folders")->required();

  CLI::App* train = app.add_subcommand("train", "train the steering regressor");
  train->add_option("--config", config_path, "campaign config JSON");
  train->add_option("--seed", seed, "master seed override")->each([&](const std::string&) {
    has_seed = true;
  });
  train->add_option("--out", out_path, "model file to write")->required();

  CLI::App* offline = app.add_subcommand("offline", "open-loop evaluation on datasets");
  offline->add_option("--model", model_file, "model file (learned controller)");
  offline->add_option("--controller", controller_arg, "controller spec JSON (inline or file)");
  offline->add_option("--dataset", dataset_dirs, "dataset directories")->required();
  offline->add_option("--out", out_path, "results CSV path");

  CLI::App* online = app.add_subcommand("online", "closed-loop simulation on scenarios");
  online->add_option("--config", config_path, "campaign config JSON");
  online->add_option("--model", model_file, "model file (learned controller)");
  online->add_option("--controller", controller_arg, "controller spec JSON (inline or file)");
  online->add_option("--scenario", scenario_files, "scenario JSON file(s)")->required();
  online->add_option("--out", out_path, "directory for traces and online_results.csv");

  CLI::App* match = app.add_subcommand("match", "find comparable recording subsequences");
  match->add_option("--sim", sim_dirs, "simulated dataset directories")->required();
  match->add_option("--real", real_dir, "recording dataset directory")->required();
  match->add_option("--epsilon", epsilon, "comparability bound on mean |angle diff|");
  match->add_option("--seed", seed, "tie-break seed");
  match->add_flag("--reference", reference, "use the serial reference scan");
  match->add_option("--out", out_path, "matches CSV path");

  CLI::App* analyze = app.add_subcommand("analyze", "agreement analysis and report generation");
  analyze->add_option("--config", config_path, "campaign config JSON");
  analyze->add_option("--offline", offline_csv, "offline_results.csv")->required();
  analyze->add_option("--online", online_csv, "online_results.csv")->required();
  analyze->add_option("--matches", matches_csv, "matches.csv (optional)");
  analyze->add_option("--out", out_path, "report directory")->required();

  CLI::App* campaign = app.add_subcommand("campaign", "run the full pipeline");
  campaign->add_option("--config", config_path, "campaign config JSON");
  campaign->add_option("--seed", seed, "master seed override")->each([&](const std::string&) {
    has_seed = true;
  });
  campaign->add_option("--out", out_path, "output directory");
  campaign->add_option("--jobs", jobs, "worker threads for scenario batches");
  campaign->add_flag("--save-datasets", save_datasets, "persist all generated datasets");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (sample->parsed()) return cmd_sample(config_path, count, seed, out_path, matched);
    if (dataset->parsed()) {
      return cmd_dataset(config_path, scenario_files, kind, sigma, seed, out_path);
    }
    if (train->parsed()) return cmd_train(config_path, seed, has_seed, out_path);
    if (offline->parsed()) return cmd_offline(model_file, controller_arg, dataset_dirs, out_path);
    if (online->parsed()) {
      return cmd_online(config_path, model_file, controller_arg, scenario_files, out_path);
    }
    if (match->parsed()) {
      return cmd_match(sim_dirs, real_dir, epsilon, seed, reference, out_path);
    }
    if (analyze->parsed()) {
      return cmd_analyze(config_path, offline_csv, online_csv, matches_csv, out_path);
    }
    if (campaign->parsed()) {
      return cmd_campaign(config_path, seed, has_seed, out_path, jobs, save_datasets);
    }
  } catch (const lb::SamplingExhaustedError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  } catch (const lb::TrainingDivergedError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 5;
  } catch (const lb::IoError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 4;
  } catch (const lb::ConfigError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const lb::RestrictionError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
