#include "lanebench/offline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include <json.hpp>

#include "lanebench/errors.hpp"
#include "lanebench/rng.hpp"
#include "lanebench/serialize.hpp"

namespace lanebench {

std::string to_string(Provenance p) {
  return p == Provenance::simulated ? "simulated" : "pseudo_real";
}

Provenance provenance_from_string(const std::string& s) {
  if (s == "simulated") return Provenance::simulated;
  if (s == "pseudo_real") return Provenance::pseudo_real;
  throw ConfigError("unknown provenance: " + s);
}

std::vector<double> LabeledDataset::labels() const {
  std::vector<double> out;
  out.reserve(frames.size());
  for (const LabeledFrame& f : frames) out.push_back(f.label);
  return out;
}

namespace {

LabeledDataset generate(const Scenario& scn, const SimConfig& cfg, double jitter_sigma,
                        std::uint64_t jitter_seed, const CameraConfig& cam,
                        Provenance provenance) {
  LabeledDataset ds;
  ds.provenance = provenance;
  ds.id = scn.id + (provenance == Provenance::simulated ? "-sim" : "-real");
  ds.fps = 1.0 / cfg.t_delta;
  ds.scenario = scn;
  ds.sim = cfg;
  ds.road = std::make_shared<Road>(build_road(scn));

  std::mt19937_64 g(mix64(jitter_seed));
  VehicleState pose = start_pose(*ds.road, scn.ego_speed);
  const int m = cfg.steps_m();
  ds.frames.reserve(m);
  ds.poses.reserve(m);
  for (int j = 0; j < m; ++j) {
    double label;
    Image img;
    try {
      img = render(*ds.road, pose, scn, cam);
      label = oracle_steering(*ds.road, pose, kDefaultLookahead, cfg.wheelbase);
    } catch (const EndOfRoadError&) {
      ds.truncated = true;
      break;
    }
    // The label is the steering actually executed; jitter lands in both the
    // recorded label and the trajectory, like an imperfect human driver.
    label = std::clamp(label + jitter_sigma * standard_normal(g), -1.0, 1.0);
    ds.frames.push_back({std::move(img), label});
    ds.poses.push_back(pose);
    pose = step(pose, label, cfg);
  }
  return ds;
}

}  // namespace

LabeledDataset generate_sim_dataset(const Scenario& scn, const SimConfig& cfg,
                                    const CameraConfig& cam) {
  return generate(scn, cfg, 0.0, scn.rng_seed, cam, Provenance::simulated);
}

LabeledDataset generate_pseudo_real_dataset(const Scenario& scn, const SimConfig& cfg,
                                            double jitter_sigma, std::uint64_t seed,
                                            const CameraConfig& cam) {
  if (jitter_sigma < 0.0) throw ConfigError("jitter sigma must be >= 0");
  return generate(scn, cfg, jitter_sigma, seed, cam, Provenance::pseudo_real);
}

double mae(std::span<const double> labels, std::span<const double> predictions) {
  if (labels.empty() || labels.size() != predictions.size()) {
    throw ConfigError("mae needs equal-length non-empty inputs");
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < labels.size(); ++i) acc += std::abs(predictions[i] - labels[i]);
  return acc / static_cast<double>(labels.size());
}

double rmse(std::span<const double> labels, std::span<const double> predictions) {
  if (labels.empty() || labels.size() != predictions.size()) {
    throw ConfigError("rmse needs equal-length non-empty inputs");
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const double e = predictions[i] - labels[i];
    acc += e * e;
  }
  return std::sqrt(acc / static_cast<double>(labels.size()));
}

OfflineResult evaluate_offline(Controller& c, const LabeledDataset& ds) {
  if (ds.frames.empty()) throw ConfigError("cannot evaluate an empty dataset");
  if (ds.road && !ds.poses.empty()) c.begin_run(*ds.road, ds.poses.front(), ds.sim);

  const int w = std::max(1, c.history_window());
  std::vector<const Image*> win;
  OfflineResult r;
  r.per_frame_abs_error.reserve(ds.frames.size());
  std::vector<double> preds;
  preds.reserve(ds.frames.size());
  for (std::size_t j = 0; j < ds.frames.size(); ++j) {
    win.clear();
    const std::size_t lo = j + 1 >= static_cast<std::size_t>(w) ? j + 1 - w : 0;
    for (std::size_t k = lo; k <= j; ++k) win.push_back(&ds.frames[k].image);
    StepContext ctx;
    ctx.frames = win;
    ctx.road = ds.road.get();
    ctx.pose = j < ds.poses.size() ? &ds.poses[j] : nullptr;
    preds.push_back(c.predict(ctx));
  }
  const std::vector<double> labels = ds.labels();
  for (std::size_t j = 0; j < labels.size(); ++j) {
    r.per_frame_abs_error.push_back(std::abs(preds[j] - labels[j]));
  }
  r.mae = mae(labels, preds);
  r.rmse = rmse(labels, preds);
  return r;
}

LabeledDataset slice_dataset(const LabeledDataset& ds, std::size_t offset, std::size_t length) {
  if (length == 0 || offset + length > ds.frames.size()) {
    throw ConfigError("slice window escapes the dataset");
  }
  LabeledDataset out;
  out.provenance = ds.provenance;
  char tag[64];
  std::snprintf(tag, sizeof tag, "[%zu+%zu]", offset, length);
  out.id = ds.id + tag;
  out.fps = ds.fps;
  out.truncated = false;
  out.scenario = ds.scenario;
  out.sim = ds.sim;
  out.road = ds.road;
  out.frames.assign(ds.frames.begin() + offset, ds.frames.begin() + offset + length);
  if (ds.poses.size() == ds.frames.size()) {
    out.poses.assign(ds.poses.begin() + offset, ds.poses.begin() + offset + length);
  }
  return out;
}

void save_dataset(const LabeledDataset& ds, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir / "frames");
  nlohmann::json manifest{{"provenance", to_string(ds.provenance)},
                          {"id", ds.id},
                          {"fps", ds.fps},
                          {"frame_count", ds.frames.size()},
                          {"truncated", ds.truncated},
                          {"scenario", ds.scenario},
                          {"sim",
                           {{"t_delta", ds.sim.t_delta},
                            {"duration_T", ds.sim.duration_T},
                            {"wheelbase", ds.sim.wheelbase}}}};
  save_json_file(manifest, dir / "manifest.json");

  std::ofstream labels(dir / "labels.csv");
  if (!labels) throw IoError("cannot write " + (dir / "labels.csv").string());
  labels << "frame_index,steering\n";
  char row[64];
  for (std::size_t j = 0; j < ds.frames.size(); ++j) {
    std::snprintf(row, sizeof row, "%zu,%.17g\n", j, ds.frames[j].label);
    labels << row;
  }
  if (!labels) throw IoError("short write to labels.csv");

  char name[32];
  for (std::size_t j = 0; j < ds.frames.size(); ++j) {
    std::snprintf(name, sizeof name, "%05zu.pgm", j);
    write_pgm(ds.frames[j].image, dir / "frames" / name);
  }
}

LabeledDataset load_dataset(const std::filesystem::path& dir) {
  const nlohmann::json manifest = load_json_file(dir / "manifest.json");
  LabeledDataset ds;
  try {
    ds.provenance = provenance_from_string(manifest.at("provenance").get<std::string>());
    ds.id = manifest.at("id").get<std::string>();
    ds.fps = manifest.at("fps").get<double>();
    ds.truncated = manifest.at("truncated").get<bool>();
    ds.scenario = manifest.at("scenario").get<Scenario>();
    ds.sim.t_delta = manifest.at("sim").at("t_delta").get<double>();
    ds.sim.duration_T = manifest.at("sim").at("duration_T").get<double>();
    ds.sim.wheelbase = manifest.at("sim").at("wheelbase").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw IoError("bad manifest in " + dir.string() + ": " + e.what());
  }
  const std::size_t count = manifest.at("frame_count").get<std::size_t>();

  std::ifstream labels(dir / "labels.csv");
  if (!labels) throw IoError("cannot open " + (dir / "labels.csv").string());
  std::string line;
  std::getline(labels, line);  // header
  std::vector<double> values;
  while (std::getline(labels, line)) {
    if (line.empty()) continue;
    const std::size_t comma = line.find(',');
    if (comma == std::string::npos) throw IoError("malformed labels.csv row: " + line);
    values.push_back(std::stod(line.substr(comma + 1)));
  }
  if (values.size() != count) throw IoError("labels.csv row count mismatches the manifest");

  ds.road = std::make_shared<Road>(build_road(ds.scenario));
  VehicleState pose = start_pose(*ds.road, ds.scenario.ego_speed);
  char name[32];
  ds.frames.reserve(count);
  ds.poses.reserve(count);
  for (std::size_t j = 0; j < count; ++j) {
    std::snprintf(name, sizeof name, "%05zu.pgm", j);
    LabeledFrame f;
    f.image = read_pgm(dir / "frames" / name);
    f.label = values[j];
    ds.frames.push_back(std::move(f));
    ds.poses.push_back(pose);
    pose = step(pose, values[j], ds.sim);
  }
  return ds;
}

}  // namespace lanebench
