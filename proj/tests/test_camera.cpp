#include "lanebench/camera.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "lanebench/controllers.hpp"
#include "lanebench/errors.hpp"

using namespace lanebench;

namespace {

Scenario scn(RoadTopology topo, double curvature, Weather w = Weather::sunny,
             double intensity = 0.0, double brightness = 1.0) {
  Scenario s;
  s.id = "cam";
  s.road_topology = topo;
  s.curvature = curvature;
  s.road_length = 300.0;
  s.lane_width = 3.5;
  s.weather = w;
  s.weather_intensity = intensity;
  s.brightness = brightness;
  s.ego_speed = 10.0;
  s.rng_seed = 424242;
  return s;
}

int count_diffs(const Image& a, const Image& b) {
  int n = 0;
  for (std::size_t k = 0; k < a.pixels.size(); ++k) {
    if (a.pixels[k] != b.pixels[k]) ++n;
  }
  return n;
}

}  // namespace

TEST(Camera, TopHalfIsSkyBottomShowsRoad) {
  const Scenario s = scn(RoadTopology::straight, 0.0);
  const Road road = build_road(s);
  const Image img = render(road, start_pose(road, s.ego_speed), s);
  ASSERT_EQ(img.width, 32);
  ASSERT_EQ(img.height, 32);
  for (int row = 0; row < 16; ++row) {
    for (int col = 0; col < 32; ++col) {
      EXPECT_DOUBLE_EQ(img.at(row, col), 0.75) << row << "," << col;
    }
  }
  // The bottom row sees at most +/-1.2 m laterally: all road surface. Higher
  // rows reach past the lane edge, so their outer columns are ground.
  for (int col = 0; col < 32; ++col) {
    EXPECT_DOUBLE_EQ(img.at(31, col), 0.30) << col;
  }
  EXPECT_DOUBLE_EQ(img.at(20, 0), 0.52);
  EXPECT_DOUBLE_EQ(img.at(20, 31), 0.52);
}

TEST(Camera, LaneMarkingsBrightenEdgePixels) {
  const Scenario s = scn(RoadTopology::straight, 0.0);
  const Road road = build_road(s);
  const Image img = render(road, start_pose(road, s.ego_speed), s);
  double brightest = 0.0;
  for (double p : img.pixels) brightest = std::max(brightest, p);
  EXPECT_GT(brightest, 0.75);  // some marking coverage beats sky and ground
}

TEST(Camera, RenderIsDeterministic) {
  const Scenario s = scn(RoadTopology::s_curve, 0.01, Weather::rain, 0.7, 0.8);
  const Road road = build_road(s);
  const VehicleState st = start_pose(road, s.ego_speed);
  const Image a = render(road, st, s);
  const Image b = render(road, st, s);
  EXPECT_EQ(a, b);
  VehicleState moved = st;
  moved.x += 1.0;
  EXPECT_NE(render(road, moved, s), a);  // different pose, different streaks
}

TEST(Camera, MirroredSceneRendersMirrored) {
  const Scenario sl = scn(RoadTopology::left_curved, 0.008);
  const Scenario sr = scn(RoadTopology::right_curved, 0.008);
  const Road rl = build_road(sl);
  const Road rr = build_road(sr);
  VehicleState stl = start_pose(rl, 10.0);
  VehicleState str = start_pose(rr, 10.0);
  // Advance both a bit off-center to make the frames asymmetric.
  stl.y += 0.6;
  str.y -= 0.6;
  stl.heading += 0.05;
  str.heading -= 0.05;
  const Image il = render(rl, stl, sl);
  const Image ir = render(rr, str, sr);
  for (int row = 0; row < il.height; ++row) {
    for (int col = 0; col < il.width; ++col) {
      EXPECT_EQ(il.at(row, col), ir.at(row, il.width - 1 - col)) << row << "," << col;
    }
  }
}

TEST(Camera, FullFogIsUniformWhite) {
  const Image base = render(build_road(scn(RoadTopology::straight, 0.0)),
                            VehicleState{0, 0, 0, 10}, scn(RoadTopology::straight, 0.0));
  for (double brightness : {0.5, 0.9, 1.0}) {
    const Image fogged = apply_weather(base, Weather::fog, 1.0, brightness, 1);
    for (double p : fogged.pixels) EXPECT_DOUBLE_EQ(p, 1.0);
  }
}

TEST(Camera, FogBlendsTowardWhiteMonotonically) {
  const Image base = render(build_road(scn(RoadTopology::straight, 0.0)),
                            VehicleState{0, 0, 0, 10}, scn(RoadTopology::straight, 0.0));
  const Image half = apply_weather(base, Weather::fog, 0.5, 1.0, 1);
  const Image more = apply_weather(base, Weather::fog, 0.8, 1.0, 1);
  for (std::size_t k = 0; k < base.pixels.size(); ++k) {
    EXPECT_GE(half.pixels[k], base.pixels[k]);
    EXPECT_GE(more.pixels[k], half.pixels[k]);
    EXPECT_NEAR(half.pixels[k], 0.5 * base.pixels[k] + 0.5, 1e-12);
  }
}

TEST(Camera, BrightnessScalesBeforeWeather) {
  const Image base = render(build_road(scn(RoadTopology::straight, 0.0)),
                            VehicleState{0, 0, 0, 10}, scn(RoadTopology::straight, 0.0));
  const Image dim = apply_weather(base, Weather::sunny, 0.0, 0.6, 1);
  for (std::size_t k = 0; k < base.pixels.size(); ++k) {
    EXPECT_DOUBLE_EQ(dim.pixels[k], base.pixels[k] * 0.6);
  }
}

TEST(Camera, RainAndSnowDensityGrowsWithIntensity) {
  const Image base = render(build_road(scn(RoadTopology::straight, 0.0)),
                            VehicleState{0, 0, 0, 10}, scn(RoadTopology::straight, 0.0));
  const Image none = apply_weather(base, Weather::rain, 0.0, 1.0, 99);
  EXPECT_EQ(count_diffs(base, none), 0);  // zero intensity leaves pixels alone
  const Image light = apply_weather(base, Weather::rain, 0.3, 1.0, 99);
  const Image heavy = apply_weather(base, Weather::rain, 1.0, 1.0, 99);
  EXPECT_GT(count_diffs(base, light), 0);
  EXPECT_GT(count_diffs(base, heavy), count_diffs(base, light));

  const Image slight = apply_weather(base, Weather::snow, 0.3, 1.0, 99);
  const Image sheavy = apply_weather(base, Weather::snow, 1.0, 1.0, 99);
  EXPECT_GT(count_diffs(base, slight), 0);
  EXPECT_GT(count_diffs(base, sheavy), count_diffs(base, slight));
  // Same seed, same overlay.
  EXPECT_EQ(apply_weather(base, Weather::snow, 1.0, 1.0, 99), sheavy);
  EXPECT_NE(apply_weather(base, Weather::snow, 1.0, 1.0, 100), sheavy);
}

TEST(Camera, PixelsStayInUnitRange) {
  const Scenario stormy = scn(RoadTopology::left_curved, 0.01, Weather::snow, 1.0, 1.0);
  const Road road = build_road(stormy);
  VehicleState st = start_pose(road, 10.0);
  st.y -= 1.0;
  const Image img = render(road, st, stormy);
  for (double p : img.pixels) {
    EXPECT_GE(p, 0.0);
    EXPECT_LE(p, 1.0);
  }
}

TEST(Camera, PgmRoundTripQuantizesOnce) {
  const Scenario s = scn(RoadTopology::s_curve, 0.012, Weather::fog, 0.4, 0.77);
  const Road road = build_road(s);
  const Image img = render(road, start_pose(road, s.ego_speed), s);
  const std::filesystem::path p =
      std::filesystem::path(testing::TempDir()) / "lanebench_cam_roundtrip.pgm";
  write_pgm(img, p);
  const Image back = read_pgm(p);
  ASSERT_EQ(back.width, img.width);
  ASSERT_EQ(back.height, img.height);
  for (std::size_t k = 0; k < img.pixels.size(); ++k) {
    EXPECT_NEAR(back.pixels[k], img.pixels[k], 0.5 / 255.0 + 1e-12);
  }
  // A second trip through disk is lossless: quantization is idempotent.
  write_pgm(back, p);
  const Image again = read_pgm(p);
  EXPECT_EQ(again, back);
  std::filesystem::remove(p);
}

TEST(Camera, ReadPgmRejectsTruncatedAndForeignFiles) {
  const std::filesystem::path dir = testing::TempDir();
  const std::filesystem::path bad = dir / "lanebench_cam_bad.pgm";
  {
    std::ofstream out(bad, std::ios::binary);
    out << "P5\n32 32\n255\n";
    out << "short";
  }
  EXPECT_THROW(read_pgm(bad), IoError);
  {
    std::ofstream out(bad, std::ios::binary);
    out << "P6\n2 2\n255\n000000000000";
  }
  EXPECT_THROW(read_pgm(bad), IoError);
  EXPECT_THROW(read_pgm(dir / "lanebench_cam_missing.pgm"), IoError);
  std::filesystem::remove(bad);
}

TEST(Camera, GroundBeyondRoadEndHasNoMarkings) {
  Scenario s = scn(RoadTopology::straight, 0.0);
  s.road_length = 20.0;  // end right ahead of the camera
  const Road road = build_road(s);
  VehicleState st = start_pose(road, 10.0);
  st.x = 15.0;
  const Image img = render(road, st, s);
  // Rows just below the horizon look past the end: plain ground, no road tone.
  for (int col = 0; col < img.width; ++col) {
    EXPECT_DOUBLE_EQ(img.at(16, col), 0.52);
  }
}
