#include "lanebench/controllers.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <memory>

#include "lanebench/errors.hpp"
#include "lanebench/offline.hpp"
#include "lanebench/online.hpp"
#include "lanebench/scenario.hpp"
#include "lanebench/world.hpp"

namespace lanebench {
namespace {

Scenario straight_scenario(double length = 400.0, double speed = 10.0) {
  Scenario s;
  s.id = "straight";
  s.road_topology = RoadTopology::straight;
  s.curvature = 0.0;
  s.road_length = length;
  s.lane_width = 3.5;
  s.weather = Weather::sunny;
  s.weather_intensity = 0.0;
  s.brightness = 1.0;
  s.ego_speed = speed;
  s.rng_seed = 7;
  return s;
}

Scenario curved_scenario(RoadTopology topo, double kappa, double length = 400.0,
                         double speed = 10.0) {
  Scenario s = straight_scenario(length, speed);
  s.id = "curved";
  s.road_topology = topo;
  s.curvature = kappa;
  return s;
}

// Fixed-output stand-in for wrapping tests.
class ConstController : public Controller {
 public:
  explicit ConstController(double v) : v_(v) {}
  std::string kind() const override { return "const"; }
  double predict(const StepContext&) override { return v_; }

 private:
  double v_;
};

StepContext one_frame_ctx(const Image& img) {
  StepContext ctx;
  ctx.frames.push_back(&img);
  return ctx;
}

TEST(StartPose, AtRoadOriginFacingAlong) {
  const Road road = build_road(straight_scenario());
  const VehicleState st = start_pose(road, 12.0);
  EXPECT_DOUBLE_EQ(st.x, 0.0);
  EXPECT_DOUBLE_EQ(st.y, 0.0);
  EXPECT_DOUBLE_EQ(st.heading, 0.0);
  EXPECT_DOUBLE_EQ(st.speed, 12.0);
}

TEST(OracleSteering, ZeroOnStraightCenterline) {
  const Road road = build_road(straight_scenario());
  const VehicleState st{50.0, 0.0, 0.0, 10.0};
  EXPECT_DOUBLE_EQ(oracle_steering(road, st), 0.0);
}

TEST(OracleSteering, SteersTowardCenterlineWhenOffsetLeft) {
  const Road road = build_road(straight_scenario());
  // 0.5 m left of center: the lookahead target sits to the right, so the
  // command must be positive (right).
  const VehicleState st{20.0, 0.5, 0.0, 10.0};
  EXPECT_GT(oracle_steering(road, st), 0.0);
}

TEST(OracleSteering, RecentersFromHalfMeterOffset) {
  const Scenario scn = straight_scenario();
  const Road road = build_road(scn);
  const SimConfig cfg;
  VehicleState st{0.0, 0.5, 0.0, 10.0};
  for (int j = 0; j < 300; ++j) {
    st = step(st, oracle_steering(road, st), cfg);
  }
  EXPECT_LT(std::abs(road.lateral_deviation(st.x, st.y)), 0.05);
}

TEST(OracleSteering, HoldsArcWithinFiveCentimeters) {
  for (const double kappa : {0.01, -0.01, 0.004, -0.004}) {
    const auto topo = kappa > 0 ? RoadTopology::left_curved : RoadTopology::right_curved;
    const Scenario scn = curved_scenario(topo, std::abs(kappa));
    const Road road = build_road(scn);
    const SimConfig cfg;
    VehicleState st = start_pose(road, 10.0);
    double steer_sum = 0.0;
    for (int j = 0; j < 400; ++j) {
      const double theta = oracle_steering(road, st);
      if (j >= 100) {
        EXPECT_LT(std::abs(road.lateral_deviation(st.x, st.y)), 0.05)
            << "kappa=" << kappa << " step=" << j;
        steer_sum += theta;
      }
      st = step(st, theta, cfg);
    }
    // Left curves demand left (negative) steering and vice versa.
    EXPECT_LT(steer_sum * kappa, 0.0) << "kappa=" << kappa;
  }
}

TEST(OracleSteering, ThrowsPastRoadEnd) {
  const Road road = build_road(straight_scenario(100.0));
  const VehicleState st{150.0, 0.0, 0.0, 10.0};
  EXPECT_THROW(oracle_steering(road, st), EndOfRoadError);
}

TEST(OracleController, ReplaysNominalTrajectoryIgnoringExecutedState) {
  const Scenario scn = straight_scenario();
  const Road road = build_road(scn);
  const SimConfig cfg;
  OracleController c;
  c.begin_run(road, start_pose(road, 10.0), cfg);
  const Image img = make_image(32, 32, 0.5);
  // On a straight road the nominal trajectory never leaves the centerline, so
  // every replayed command is zero regardless of what the plant does.
  for (int j = 0; j < 50; ++j) {
    EXPECT_DOUBLE_EQ(c.predict(one_frame_ctx(img)), 0.0);
  }
}

TEST(OracleController, PredictBeforeBeginRunThrows) {
  OracleController c;
  const Image img = make_image(32, 32, 0.5);
  EXPECT_THROW(c.predict(one_frame_ctx(img)), ConfigError);
}

TEST(OracleController, StableOnTwentySampledScenarios) {
  const DomainModel model = default_domain_model();
  const SimConfig cfg;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const Scenario scn = sample_scenario(model, seed);
    OracleController c;
    const SimulationTrace tr = run_closed_loop(c, scn, cfg);
    EXPECT_FALSE(tr.aborted) << scn.id;
    EXPECT_EQ(static_cast<int>(tr.steps.size()), cfg.steps_m()) << scn.id;
    EXPECT_LT(mdcl(tr).normalized, 0.2) << scn.id;
  }
}

TEST(Mlp, InitIsDeterministicPerSeed) {
  const MlpParams a = init_mlp(16, 8, 7);
  const MlpParams b = init_mlp(16, 8, 7);
  EXPECT_EQ(a.w1, b.w1);
  EXPECT_EQ(a.b1, b.b1);
  EXPECT_EQ(a.w2, b.w2);
  EXPECT_EQ(a.b2, b.b2);
  const MlpParams c = init_mlp(16, 8, 8);
  EXPECT_NE(a.w1, c.w1);
}

TEST(Mlp, ForwardOutputBounded) {
  const MlpParams m = init_mlp(12, 6, 3);
  std::vector<double> x(12);
  for (int i = 0; i < 12; ++i) x[i] = (i % 2 ? 1.0 : -1.0) * (i + 1) * 0.3;
  const double out = mlp_forward(m, x);
  EXPECT_LE(std::abs(out), 1.0);
}

TEST(Mlp, BatchGradientMatchesCentralDifferences) {
  const int in = 6, hid = 3, batch = 4;
  MlpParams m = init_mlp(in, hid, 11);
  std::vector<std::vector<double>> xs_store(batch, std::vector<double>(in));
  std::vector<const std::vector<double>*> xs;
  std::vector<double> ys(batch);
  std::uint64_t s = 99;
  auto next = [&s]() {
    s = s * 6364136223846793005ull + 1442695040888963407ull;
    return static_cast<double>(s >> 11) * 0x1.0p-53 * 2.0 - 1.0;
  };
  for (int b = 0; b < batch; ++b) {
    for (int i = 0; i < in; ++i) xs_store[b][i] = next();
    ys[b] = 0.5 * next();
    xs.push_back(&xs_store[b]);
  }

  const MlpGradient g = mlp_batch_gradient(m, xs, ys);
  ASSERT_EQ(g.w1.size(), m.w1.size());
  ASSERT_EQ(g.b1.size(), m.b1.size());
  ASSERT_EQ(g.w2.size(), m.w2.size());
  ASSERT_EQ(g.b2.size(), m.b2.size());
  EXPECT_DOUBLE_EQ(g.loss, mlp_batch_loss(m, xs, ys));

  const double h = 1e-6;
  auto check = [&](std::vector<double>& param, const std::vector<double>& grad,
                   const char* name) {
    for (std::size_t i = 0; i < param.size(); ++i) {
      const double keep = param[i];
      param[i] = keep + h;
      const double up = mlp_batch_loss(m, xs, ys);
      param[i] = keep - h;
      const double dn = mlp_batch_loss(m, xs, ys);
      param[i] = keep;
      const double fd = (up - dn) / (2.0 * h);
      EXPECT_NEAR(grad[i], fd, 1e-6 + 1e-4 * std::max(std::abs(fd), std::abs(grad[i])))
          << name << "[" << i << "]";
    }
  };
  check(m.w1, g.w1, "w1");
  check(m.b1, g.b1, "b1");
  check(m.w2, g.w2, "w2");
  check(m.b2, g.b2, "b2");
}

TEST(Mlp, TrainingBeatsZeroPredictorOnConstantCurve) {
  Scenario scn = curved_scenario(RoadTopology::left_curved, 0.01, 300.0, 10.0);
  SimConfig cfg;
  cfg.duration_T = 5.0;  // 100 frames
  const LabeledDataset ds = generate_sim_dataset(scn, cfg);
  ASSERT_EQ(ds.frames.size(), 100u);

  double baseline = 0.0;
  for (const LabeledFrame& f : ds.frames) baseline += std::abs(f.label);
  baseline /= static_cast<double>(ds.frames.size());
  ASSERT_GT(baseline, 0.02);  // the curve demands sustained steering

  TrainOptions opt;
  opt.epochs = 40;
  opt.batch_size = 16;
  opt.learning_rate = 0.05;
  opt.hidden_size = 8;
  opt.history_window = 1;
  opt.seed = 3;
  TrainReport rep;
  const MlpParams m = train_mlp({&ds}, opt, &rep);
  EXPECT_EQ(rep.samples, 100);
  EXPECT_EQ(rep.epochs_run, 40);
  EXPECT_LT(rep.final_train_mae, 0.5 * baseline);

  const MlpParams m2 = train_mlp({&ds}, opt);
  EXPECT_EQ(m.w1, m2.w1);
  EXPECT_EQ(m.b2, m2.b2);
}

TEST(FlattenWindow, AveragesAndPadsWithOldestFrame) {
  Image a = make_image(2, 2, 0.3);
  Image b = make_image(2, 2, 0.9);
  const std::vector<const Image*> frames{&a, &b};

  const std::vector<double> newest = flatten_window(frames, 1);
  ASSERT_EQ(newest.size(), 4u);
  for (double v : newest) EXPECT_DOUBLE_EQ(v, 0.9);

  const std::vector<double> padded = flatten_window(frames, 3);  // {a, a, b}
  ASSERT_EQ(padded.size(), 4u);
  for (double v : padded) EXPECT_DOUBLE_EQ(v, (0.3 + 0.3 + 0.9) / 3.0);

  a.at(0, 1) = 0.5;  // padding repeats the oldest frame pixel-wise
  const std::vector<double> mixed = flatten_window({&a, &b}, 2);
  EXPECT_DOUBLE_EQ(mixed[1], (0.5 + 0.9) / 2.0);
}

TEST(MlpController, KindTracksWindow) {
  auto params = std::make_shared<MlpParams>(init_mlp(4 * 4, 2, 1));
  MlpController single(params, 1);
  EXPECT_EQ(single.kind(), "learned");
  EXPECT_EQ(single.history_window(), 1);
  MlpController multi(params, 5);
  EXPECT_EQ(multi.kind(), "windowed");
  EXPECT_EQ(multi.history_window(), 5);
}

TEST(MlpController, EmptyFrameHistoryThrows) {
  auto params = std::make_shared<MlpParams>(init_mlp(16, 2, 1));
  MlpController c(params, 1);
  StepContext ctx;
  EXPECT_THROW(c.predict(ctx), ConfigError);
}

TEST(BiasedController, AddsOffsetThenClamps) {
  const Image img = make_image(32, 32, 0.5);
  BiasedController mid(std::make_shared<ConstController>(0.1), 0.05);
  EXPECT_DOUBLE_EQ(mid.predict(one_frame_ctx(img)), 0.15);
  BiasedController high(std::make_shared<ConstController>(0.98), 0.05);
  EXPECT_DOUBLE_EQ(high.predict(one_frame_ctx(img)), 1.0);
  BiasedController low(std::make_shared<ConstController>(-0.98), -0.05);
  EXPECT_DOUBLE_EQ(low.predict(one_frame_ctx(img)), -1.0);
  EXPECT_EQ(mid.kind(), "biased");
}

TEST(NoisyController, PureFunctionOfSeedAndNewestFrame) {
  const Image img = make_image(32, 32, 0.5);
  NoisyController c(std::make_shared<ConstController>(0.2), 0.1, 9);
  const double first = c.predict(one_frame_ctx(img));
  const double second = c.predict(one_frame_ctx(img));
  EXPECT_EQ(first, second);  // bitwise: no hidden stream state

  Image other = img;
  other.at(3, 3) = 0.7;
  EXPECT_NE(c.predict(one_frame_ctx(other)), first);

  NoisyController reseeded(std::make_shared<ConstController>(0.2), 0.1, 10);
  EXPECT_NE(reseeded.predict(one_frame_ctx(img)), first);
}

TEST(NoisyController, ZeroSigmaEqualsInnerAndOutputStaysClamped) {
  const Image img = make_image(32, 32, 0.25);
  NoisyController silent(std::make_shared<ConstController>(0.37), 0.0, 5);
  EXPECT_DOUBLE_EQ(silent.predict(one_frame_ctx(img)), 0.37);

  NoisyController loud(std::make_shared<ConstController>(0.9), 50.0, 6);
  for (int i = 0; i < 8; ++i) {
    Image im = img;
    im.at(0, 0) = 0.01 * i;
    const double v = loud.predict(one_frame_ctx(im));
    EXPECT_GE(v, -1.0);
    EXPECT_LE(v, 1.0);
  }
}

TEST(ModelIo, RoundTripPreservesBitsAndWindow) {
  const auto dir = std::filesystem::temp_directory_path() / "lb_model_io";
  std::filesystem::create_directories(dir);
  const auto path = dir / "model.bin";

  const MlpParams m = init_mlp(64, 4, 5);
  save_model(m, 3, path);
  const LoadedModel lm = load_model(path);
  EXPECT_EQ(lm.history_window, 3);
  EXPECT_EQ(lm.params.input_size, 64);
  EXPECT_EQ(lm.params.hidden_size, 4);
  EXPECT_EQ(lm.params.w1, m.w1);
  EXPECT_EQ(lm.params.b1, m.b1);
  EXPECT_EQ(lm.params.w2, m.w2);
  EXPECT_EQ(lm.params.b2, m.b2);

  std::filesystem::remove_all(dir);
}

TEST(ModelIo, RejectsForeignAndTruncatedFiles) {
  const auto dir = std::filesystem::temp_directory_path() / "lb_model_bad";
  std::filesystem::create_directories(dir);

  const auto foreign = dir / "foreign.bin";
  std::ofstream(foreign) << "not a model\n";
  EXPECT_THROW(load_model(foreign), IoError);

  const auto truncated = dir / "truncated.bin";
  save_model(init_mlp(64, 4, 5), 1, truncated);
  const auto size = std::filesystem::file_size(truncated);
  std::filesystem::resize_file(truncated, size / 2);
  EXPECT_THROW(load_model(truncated), IoError);

  EXPECT_THROW(load_model(dir / "missing.bin"), IoError);
  std::filesystem::remove_all(dir);
}

}  // namespace
}  // namespace lanebench
