#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "lanebench/camera.hpp"
#include "lanebench/dynamics.hpp"
#include "lanebench/world.hpp"

namespace lanebench {

inline constexpr double kDefaultLookahead = 8.0;  // m, pure-pursuit target distance

// Vehicle state placed at the road start on the centerline, facing along it.
VehicleState start_pose(const Road& road, double speed);

// Pure-pursuit steering from the true vehicle state: project onto the
// centerline, aim at the point `lookahead` meters further along, and convert
// the chord geometry into a normalized wheel angle in [-1, 1]. This is the
// labeling oracle. Throws EndOfRoadError when the state projects off the road.
double oracle_steering(const Road& road, const VehicleState& st,
                       double lookahead = kDefaultLookahead, double wheelbase = 2.6);

// Per-step input handed to a controller. `frames` holds the available history,
// oldest first, newest last; never empty. Road and pose are advisory context
// that image-based controllers must ignore.
struct StepContext {
  std::vector<const Image*> frames;
  const Road* road = nullptr;
  const VehicleState* pose = nullptr;
};

class Controller {
 public:
  virtual ~Controller() = default;
  virtual std::string kind() const = 0;
  virtual int history_window() const { return 1; }
  // Called once before a sequence of predict() calls for one dataset or run.
  virtual void begin_run(const Road& road, const VehicleState& start, const SimConfig& cfg);
  virtual double predict(const StepContext& ctx) = 0;  // normalized, in [-1, 1]

 protected:
  static void require_frames(const StepContext& ctx);
};

// Replays the ideal trajectory: begin_run pins the nominal pose to the start
// state, and each predict() emits pure-pursuit steering for the *nominal* pose,
// then advances it by that same prediction. It never reads the executed state,
// so downstream perturbations (bias, noise) are not compensated — exactly how
// an open-loop-trained predictor behaves when its outputs are tampered with.
class OracleController : public Controller {
 public:
  explicit OracleController(double lookahead = kDefaultLookahead);
  std::string kind() const override { return "oracle"; }
  void begin_run(const Road& road, const VehicleState& start, const SimConfig& cfg) override;
  double predict(const StepContext& ctx) override;

 private:
  double lookahead_;
  const Road* road_ = nullptr;
  VehicleState nominal_{};
  SimConfig cfg_{};
  bool started_ = false;
};

// 1024-H-1 multilayer perceptron, tanh activations on both layers.
struct MlpParams {
  int input_size = 1024;
  int hidden_size = 32;
  std::vector<double> w1;  // input_size * hidden_size, row = input index
  std::vector<double> b1;  // hidden_size
  std::vector<double> w2;  // hidden_size
  std::vector<double> b2;  // 1
};

MlpParams init_mlp(int input_size, int hidden_size, std::uint64_t seed);
double mlp_forward(const MlpParams& m, const std::vector<double>& input);

struct MlpGradient {
  std::vector<double> w1, b1, w2, b2;
  double loss = 0.0;  // mean squared error over the batch
};

double mlp_batch_loss(const MlpParams& m, const std::vector<const std::vector<double>*>& xs,
                      const std::vector<double>& ys);
MlpGradient mlp_batch_gradient(const MlpParams& m,
                               const std::vector<const std::vector<double>*>& xs,
                               const std::vector<double>& ys);

// Average of the last `window` frames flattened row-major; shorter histories
// are padded by repeating the oldest available frame.
std::vector<double> flatten_window(const std::vector<const Image*>& frames, int window);

// Learned regressor over camera frames. window == 1 reads only the newest
// frame ("learned"); window > 1 averages the trailing frames ("windowed").
class MlpController : public Controller {
 public:
  MlpController(std::shared_ptr<const MlpParams> params, int window = 1);
  std::string kind() const override { return window_ > 1 ? "windowed" : "learned"; }
  int history_window() const override { return window_; }
  double predict(const StepContext& ctx) override;

 private:
  std::shared_ptr<const MlpParams> params_;
  int window_;
};

// Adds a constant offset to the wrapped controller's output, then clamps.
class BiasedController : public Controller {
 public:
  BiasedController(std::shared_ptr<Controller> inner, double bias);
  std::string kind() const override { return "biased"; }
  int history_window() const override { return inner_->history_window(); }
  void begin_run(const Road& road, const VehicleState& start, const SimConfig& cfg) override;
  double predict(const StepContext& ctx) override;

 private:
  std::shared_ptr<Controller> inner_;
  double bias_;
};

// Adds zero-mean Gaussian noise derived purely from (seed, newest frame), so a
// repeated call with identical inputs returns the identical output.
class NoisyController : public Controller {
 public:
  NoisyController(std::shared_ptr<Controller> inner, double sigma, std::uint64_t seed);
  std::string kind() const override { return "noisy"; }
  int history_window() const override { return inner_->history_window(); }
  void begin_run(const Road& road, const VehicleState& start, const SimConfig& cfg) override;
  double predict(const StepContext& ctx) override;

 private:
  std::shared_ptr<Controller> inner_;
  double sigma_;
  std::uint64_t seed_;
};

class LabeledDataset;  // defined in offline.hpp; train_mlp is implemented there-adjacent

struct TrainOptions {
  int epochs = 30;
  int batch_size = 32;
  double learning_rate = 0.05;
  int hidden_size = 32;
  int history_window = 1;
  std::uint64_t seed = 1;
};

struct TrainReport {
  int samples = 0;
  int epochs_run = 0;
  double final_train_mae = 0.0;
};

// Mini-batch SGD on mean squared error; deterministic for fixed options.
// Throws TrainingDivergedError naming the epoch if the loss leaves the reals.
MlpParams train_mlp(const std::vector<const LabeledDataset*>& data, const TrainOptions& opt,
                    TrainReport* report = nullptr);

void save_model(const MlpParams& m, int history_window, const std::filesystem::path& p);
struct LoadedModel {
  MlpParams params;
  int history_window = 1;
};
LoadedModel load_model(const std::filesystem::path& p);

}  // namespace lanebench
