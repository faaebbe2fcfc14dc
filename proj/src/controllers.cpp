#include "lanebench/controllers.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>

#include <json.hpp>

#include "lanebench/errors.hpp"
#include "lanebench/offline.hpp"
#include "lanebench/rng.hpp"

namespace lanebench {

VehicleState start_pose(const Road& road, double speed) {
  const Road::Pose p = road.pose_at(0.0);
  return VehicleState{p.x, p.y, p.heading, speed};
}

double oracle_steering(const Road& road, const VehicleState& st, double lookahead,
                       double wheelbase) {
  const Road::Projection pr = road.project({st.x, st.y});
  if (!pr.in_range) throw EndOfRoadError("vehicle projects past the road extent");
  const Road::Pose target = road.pose_at(std::min(pr.s + lookahead, road.total_length()));
  const double dx = target.x - st.x;
  const double dy = target.y - st.y;
  const double d = std::hypot(dx, dy);
  if (d < 1e-9) return 0.0;
  const double alpha = wrap_angle(std::atan2(dy, dx) - st.heading);  // + target to the left
  // Chord geometry; negated because positive normalized steering turns right.
  const double delta = -std::atan(2.0 * wheelbase * std::sin(alpha) / d);
  return std::clamp(delta / kMaxSteerRad, -1.0, 1.0);
}

void Controller::begin_run(const Road&, const VehicleState&, const SimConfig&) {}

void Controller::require_frames(const StepContext& ctx) {
  if (ctx.frames.empty() || ctx.frames.front() == nullptr) {
    throw ConfigError("controller invoked with an empty frame history");
  }
}

OracleController::OracleController(double lookahead) : lookahead_(lookahead) {}

void OracleController::begin_run(const Road& road, const VehicleState& start,
                                 const SimConfig& cfg) {
  road_ = &road;
  nominal_ = start;
  cfg_ = cfg;
  started_ = true;
}

double OracleController::predict(const StepContext& ctx) {
  require_frames(ctx);
  if (!started_) throw ConfigError("oracle controller used before begin_run");
  const double theta = oracle_steering(*road_, nominal_, lookahead_, cfg_.wheelbase);
  nominal_ = step(nominal_, theta, cfg_);
  return theta;
}

MlpParams init_mlp(int input_size, int hidden_size, std::uint64_t seed) {
  if (input_size <= 0 || hidden_size <= 0) throw ConfigError("mlp sizes must be positive");
  MlpParams m;
  m.input_size = input_size;
  m.hidden_size = hidden_size;
  m.w1.resize(static_cast<std::size_t>(input_size) * hidden_size);
  m.b1.assign(hidden_size, 0.0);
  m.w2.resize(hidden_size);
  m.b2.assign(1, 0.0);
  std::mt19937_64 g(seed);
  const double s1 = 1.0 / std::sqrt(static_cast<double>(input_size));
  for (double& w : m.w1) w = uniform_in(g, -s1, s1);
  const double s2 = 1.0 / std::sqrt(static_cast<double>(hidden_size));
  for (double& w : m.w2) w = uniform_in(g, -s2, s2);
  return m;
}

namespace {

void check_input(const MlpParams& m, const std::vector<double>& x) {
  if (static_cast<int>(x.size()) != m.input_size) {
    throw ConfigError("feature size " + std::to_string(x.size()) +
                      " does not match network input " + std::to_string(m.input_size));
  }
}

// Forward pass storing hidden activations for reuse in the backward pass.
double forward_hidden(const MlpParams& m, const std::vector<double>& x, std::vector<double>& a1) {
  const int h = m.hidden_size;
  a1.assign(h, 0.0);
  for (int i = 0; i < m.input_size; ++i) {
    const double xi = x[i];
    if (xi == 0.0) continue;
    const double* wrow = &m.w1[static_cast<std::size_t>(i) * h];
    for (int j = 0; j < h; ++j) a1[j] += xi * wrow[j];
  }
  double z2 = m.b2[0];
  for (int j = 0; j < h; ++j) {
    a1[j] = std::tanh(a1[j] + m.b1[j]);
    z2 += a1[j] * m.w2[j];
  }
  return std::tanh(z2);
}

}  // namespace

double mlp_forward(const MlpParams& m, const std::vector<double>& input) {
  check_input(m, input);
  std::vector<double> a1;
  return forward_hidden(m, input, a1);
}

double mlp_batch_loss(const MlpParams& m, const std::vector<const std::vector<double>*>& xs,
                      const std::vector<double>& ys) {
  if (xs.empty() || xs.size() != ys.size()) throw ConfigError("batch inputs/labels mismatch");
  double acc = 0.0;
  for (std::size_t b = 0; b < xs.size(); ++b) {
    const double e = mlp_forward(m, *xs[b]) - ys[b];
    acc += e * e;
  }
  return acc / static_cast<double>(xs.size());
}

MlpGradient mlp_batch_gradient(const MlpParams& m,
                               const std::vector<const std::vector<double>*>& xs,
                               const std::vector<double>& ys) {
  if (xs.empty() || xs.size() != ys.size()) throw ConfigError("batch inputs/labels mismatch");
  const int h = m.hidden_size;
  MlpGradient g;
  g.w1.assign(m.w1.size(), 0.0);
  g.b1.assign(m.b1.size(), 0.0);
  g.w2.assign(m.w2.size(), 0.0);
  g.b2.assign(m.b2.size(), 0.0);

  std::vector<double> a1;
  const double inv_b = 1.0 / static_cast<double>(xs.size());
  for (std::size_t b = 0; b < xs.size(); ++b) {
    const std::vector<double>& x = *xs[b];
    check_input(m, x);
    const double out = forward_hidden(m, x, a1);
    const double err = out - ys[b];
    g.loss += err * err * inv_b;
    const double dz2 = 2.0 * err * inv_b * (1.0 - out * out);
    g.b2[0] += dz2;
    for (int j = 0; j < h; ++j) {
      g.w2[j] += dz2 * a1[j];
      const double dz1 = dz2 * m.w2[j] * (1.0 - a1[j] * a1[j]);
      g.b1[j] += dz1;
      double* grow = &g.w1[0];
      for (int i = 0; i < m.input_size; ++i) {
        grow[static_cast<std::size_t>(i) * h + j] += dz1 * x[i];
      }
    }
  }
  return g;
}

std::vector<double> flatten_window(const std::vector<const Image*>& frames, int window) {
  if (frames.empty()) throw ConfigError("empty frame history");
  if (window < 1) throw ConfigError("history window must be >= 1");
  const std::size_t n = frames.front()->pixels.size();
  std::vector<double> acc(n, 0.0);
  for (int k = 0; k < window; ++k) {
    const Image* im = (static_cast<std::size_t>(k) < frames.size())
                          ? frames[frames.size() - 1 - static_cast<std::size_t>(k)]
                          : frames.front();
    if (im->pixels.size() != n) throw ConfigError("frame history mixes image sizes");
    for (std::size_t i = 0; i < n; ++i) acc[i] += im->pixels[i];
  }
  const double inv = 1.0 / window;
  for (double& v : acc) v *= inv;
  return acc;
}

MlpController::MlpController(std::shared_ptr<const MlpParams> params, int window)
    : params_(std::move(params)), window_(window) {
  if (!params_) throw ConfigError("null network parameters");
  if (window_ < 1) throw ConfigError("history window must be >= 1");
}

double MlpController::predict(const StepContext& ctx) {
  require_frames(ctx);
  const std::vector<double> feat = flatten_window(ctx.frames, window_);
  return mlp_forward(*params_, feat);
}

BiasedController::BiasedController(std::shared_ptr<Controller> inner, double bias)
    : inner_(std::move(inner)), bias_(bias) {
  if (!inner_) throw ConfigError("null inner controller");
}

void BiasedController::begin_run(const Road& road, const VehicleState& start,
                                 const SimConfig& cfg) {
  inner_->begin_run(road, start, cfg);
}

double BiasedController::predict(const StepContext& ctx) {
  return std::clamp(inner_->predict(ctx) + bias_, -1.0, 1.0);
}

NoisyController::NoisyController(std::shared_ptr<Controller> inner, double sigma,
                                 std::uint64_t seed)
    : inner_(std::move(inner)), sigma_(sigma), seed_(seed) {
  if (!inner_) throw ConfigError("null inner controller");
  if (sigma_ < 0.0) throw ConfigError("noise sigma must be >= 0");
}

void NoisyController::begin_run(const Road& road, const VehicleState& start,
                                const SimConfig& cfg) {
  inner_->begin_run(road, start, cfg);
}

double NoisyController::predict(const StepContext& ctx) {
  require_frames(ctx);
  const double base = inner_->predict(ctx);
  // Noise is a pure function of (seed, newest frame): same input, same output.
  std::uint64_t h = seed_;
  for (const double px : ctx.frames.back()->pixels) {
    h = mix64(h ^ std::bit_cast<std::uint64_t>(px));
  }
  std::mt19937_64 g(h);
  return std::clamp(base + sigma_ * standard_normal(g), -1.0, 1.0);
}

MlpParams train_mlp(const std::vector<const LabeledDataset*>& data, const TrainOptions& opt,
                    TrainReport* report) {
  if (opt.epochs < 1 || opt.batch_size < 1) throw ConfigError("bad training options");
  std::vector<std::vector<double>> feats;
  std::vector<double> labels;
  std::vector<const Image*> hist;
  for (const LabeledDataset* ds : data) {
    if (ds == nullptr) throw ConfigError("null dataset in training input");
    hist.clear();
    for (const LabeledFrame& fr : ds->frames) {
      hist.push_back(&fr.image);
      feats.push_back(flatten_window(hist, opt.history_window));
      labels.push_back(fr.label);
    }
  }
  if (feats.empty()) throw ConfigError("no training samples");

  MlpParams m = init_mlp(static_cast<int>(feats.front().size()), opt.hidden_size, opt.seed);
  std::mt19937_64 g(mix64(opt.seed ^ 0x7261696e6d6c70ull));

  const std::size_t n = feats.size();
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;

  std::vector<const std::vector<double>*> bx;
  std::vector<double> by;
  for (int epoch = 0; epoch < opt.epochs; ++epoch) {
    // Fisher-Yates so the permutation is identical across standard libraries.
    for (std::size_t i = n - 1; i > 0; --i) {
      std::swap(order[i], order[uniform_index(g, i + 1)]);
    }
    for (std::size_t at = 0; at < n; at += opt.batch_size) {
      const std::size_t end = std::min(n, at + opt.batch_size);
      bx.clear();
      by.clear();
      for (std::size_t k = at; k < end; ++k) {
        bx.push_back(&feats[order[k]]);
        by.push_back(labels[order[k]]);
      }
      const MlpGradient grad = mlp_batch_gradient(m, bx, by);
      if (!std::isfinite(grad.loss)) {
        throw TrainingDivergedError("training loss became non-finite in epoch " +
                                    std::to_string(epoch));
      }
      for (std::size_t k = 0; k < m.w1.size(); ++k) m.w1[k] -= opt.learning_rate * grad.w1[k];
      for (std::size_t k = 0; k < m.b1.size(); ++k) m.b1[k] -= opt.learning_rate * grad.b1[k];
      for (std::size_t k = 0; k < m.w2.size(); ++k) m.w2[k] -= opt.learning_rate * grad.w2[k];
      m.b2[0] -= opt.learning_rate * grad.b2[0];
    }
  }

  if (report != nullptr) {
    report->samples = static_cast<int>(n);
    report->epochs_run = opt.epochs;
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += std::abs(mlp_forward(m, feats[i]) - labels[i]);
    report->final_train_mae = acc / static_cast<double>(n);
  }
  return m;
}

void save_model(const MlpParams& m, int history_window, const std::filesystem::path& p) {
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary);
  if (!out) throw IoError("cannot write " + p.string());
  nlohmann::json header{{"format", "lanebench-mlp-v1"},
                        {"activations", {"tanh", "tanh"}},
                        {"input_size", m.input_size},
                        {"hidden_size", m.hidden_size},
                        {"history_window", history_window}};
  out << header.dump() << '\n';
  auto dump = [&out](const std::vector<double>& v) {
    out.write(reinterpret_cast<const char*>(v.data()),
              static_cast<std::streamsize>(v.size() * sizeof(double)));
  };
  dump(m.w1);
  dump(m.b1);
  dump(m.w2);
  dump(m.b2);
  if (!out) throw IoError("short write to " + p.string());
}

LoadedModel load_model(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw IoError("cannot open " + p.string());
  std::string line;
  if (!std::getline(in, line)) throw IoError("missing model header in " + p.string());
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(line);
  } catch (const nlohmann::json::exception& e) {
    throw IoError("bad model header in " + p.string() + ": " + e.what());
  }
  if (header.value("format", "") != "lanebench-mlp-v1") {
    throw IoError("unsupported model format in " + p.string());
  }
  LoadedModel lm;
  lm.params.input_size = header.at("input_size").get<int>();
  lm.params.hidden_size = header.at("hidden_size").get<int>();
  lm.history_window = header.at("history_window").get<int>();
  if (lm.params.input_size <= 0 || lm.params.hidden_size <= 0 || lm.history_window < 1) {
    throw IoError("corrupt model dimensions in " + p.string());
  }
  auto slurp = [&in, &p](std::vector<double>& v, std::size_t n) {
    v.resize(n);
    in.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(n * sizeof(double)));
    if (in.gcount() != static_cast<std::streamsize>(n * sizeof(double))) {
      throw IoError("truncated model weights in " + p.string());
    }
  };
  slurp(lm.params.w1, static_cast<std::size_t>(lm.params.input_size) * lm.params.hidden_size);
  slurp(lm.params.b1, static_cast<std::size_t>(lm.params.hidden_size));
  slurp(lm.params.w2, static_cast<std::size_t>(lm.params.hidden_size));
  slurp(lm.params.b2, 1);
  return lm;
}

}  // namespace lanebench
