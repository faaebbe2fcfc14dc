#include "lanebench/camera.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "lanebench/errors.hpp"
#include "lanebench/rng.hpp"

namespace lanebench {
namespace {

// Scene albedos before lighting.
constexpr double kSky = 0.75;
constexpr double kGround = 0.52;
constexpr double kRoad = 0.30;
constexpr double kMarking = 0.95;
constexpr double kMarkingHalfWidth = 0.07;   // 14 cm painted line
constexpr double kMaxGroundDistance = 150.0; // beyond this a ray reads as sky

double clamp01(double v) { return v < 0.0 ? 0.0 : (v > 1.0 ? 1.0 : v); }

// Overlap fraction of [c - hw, c + hw] with [lo, hi], relative to the window 2*hw.
double band_coverage(double c, double hw, double lo, double hi) {
  const double o = std::min(c + hw, hi) - std::max(c - hw, lo);
  if (o <= 0.0) return 0.0;
  return std::min(1.0, o / (2.0 * hw));
}

std::uint64_t pose_hash(const Scenario& scn, const VehicleState& st) {
  std::uint64_t h = scn.rng_seed;
  h = mix64(h ^ std::bit_cast<std::uint64_t>(st.x));
  h = mix64(h ^ std::bit_cast<std::uint64_t>(st.y));
  h = mix64(h ^ std::bit_cast<std::uint64_t>(st.heading));
  return h;
}

}  // namespace

Image make_image(int width, int height, double fill) {
  if (width <= 0 || height <= 0) throw ConfigError("image dimensions must be positive");
  Image img;
  img.width = width;
  img.height = height;
  img.pixels.assign(static_cast<std::size_t>(width) * height, fill);
  return img;
}

Image render(const Road& road, const VehicleState& st, const Scenario& scn,
             const CameraConfig& cam) {
  if (cam.width <= 0 || cam.height <= 0) throw ConfigError("camera dimensions must be positive");
  if (!(cam.fov_deg > 0.0 && cam.fov_deg < 180.0)) throw ConfigError("camera fov out of (0,180)");

  Image img = make_image(cam.width, cam.height);
  const double f = (cam.width / 2.0) / std::tan(cam.fov_deg * M_PI / 360.0);  // focal, px
  const double cos_h = std::cos(st.heading);
  const double sin_h = std::sin(st.heading);
  const double half_lane = road.lane_width() / 2.0;

  for (int row = 0; row < cam.height; ++row) {
    const double v = row + 0.5 - cam.height / 2.0;  // +down from the optical axis
    for (int col = 0; col < cam.width; ++col) {
      const double u = col + 0.5 - cam.width / 2.0;  // +right
      double value = kSky;
      if (v > 0.0) {
        const double depth = f * cam.mount_height / v;     // m ahead along heading
        if (depth <= kMaxGroundDistance) {
          const double right = u * cam.mount_height / v;   // m to the right of heading
          const Vec2 p{st.x + depth * cos_h + right * sin_h,
                       st.y + depth * sin_h - right * cos_h};
          const Road::Projection pr = road.project(p);
          const double px_meters = cam.mount_height / v;   // lateral footprint of one pixel
          const double hw = px_meters / 2.0;
          if (pr.in_range) {
            const double road_cov =
                band_coverage(pr.lateral, hw, -half_lane, half_lane);
            const double mark_cov = std::min(
                1.0, band_coverage(pr.lateral, hw, -half_lane - kMarkingHalfWidth,
                                   -half_lane + kMarkingHalfWidth) +
                         band_coverage(pr.lateral, hw, half_lane - kMarkingHalfWidth,
                                       half_lane + kMarkingHalfWidth));
            value = kGround + (kRoad - kGround) * road_cov;
            value = value + (kMarking - value) * mark_cov;
          } else {
            value = kGround;
          }
        }
      }
      img.at(row, col) = value;
    }
  }
  return apply_weather(img, scn.weather, scn.weather_intensity, scn.brightness,
                       pose_hash(scn, st));
}

Image apply_weather(const Image& base, Weather w, double intensity, double brightness,
                    std::uint64_t seed) {
  Image img = base;
  for (double& p : img.pixels) p = clamp01(p * brightness);

  const double i = clamp01(intensity);
  switch (w) {
    case Weather::sunny:
      break;
    case Weather::fog:
      for (double& p : img.pixels) p = (1.0 - i) * p + i * 1.0;
      break;
    case Weather::rain: {
      std::mt19937_64 g(mix64(seed));
      const int streaks = static_cast<int>(std::lround(i * 24.0));
      for (int k = 0; k < streaks; ++k) {
        const int col = static_cast<int>(uniform_index(g, img.width));
        const int row0 = static_cast<int>(uniform_index(g, img.height));
        const int len = 3 + static_cast<int>(uniform_index(g, 3));
        for (int r = row0; r < std::min(row0 + len, img.height); ++r) {
          double& p = img.at(r, col);
          p = clamp01(0.3 * p + 0.7 * 0.22);
        }
      }
      break;
    }
    case Weather::snow: {
      std::mt19937_64 g(mix64(seed));
      const int specks = static_cast<int>(std::lround(i * 40.0));
      for (int k = 0; k < specks; ++k) {
        const int col = static_cast<int>(uniform_index(g, img.width));
        const int row = static_cast<int>(uniform_index(g, img.height));
        double& p = img.at(row, col);
        p = clamp01(0.15 * p + 0.85 * 0.97);
      }
      break;
    }
  }
  for (double& p : img.pixels) p = clamp01(p);
  return img;
}

void write_pgm(const Image& img, const std::filesystem::path& p) {
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary);
  if (!out) throw IoError("cannot write " + p.string());
  out << "P5\n" << img.width << ' ' << img.height << "\n255\n";
  std::vector<unsigned char> bytes(img.pixels.size());
  for (std::size_t k = 0; k < img.pixels.size(); ++k) {
    bytes[k] = static_cast<unsigned char>(std::lround(clamp01(img.pixels[k]) * 255.0));
  }
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("short write to " + p.string());
}

Image read_pgm(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw IoError("cannot open " + p.string());
  std::string magic;
  int w = 0, h = 0, maxval = 0;
  in >> magic >> w >> h >> maxval;
  if (magic != "P5" || w <= 0 || h <= 0 || maxval != 255) {
    throw IoError("unsupported PGM header in " + p.string());
  }
  in.get();  // single whitespace byte after the header
  Image img = make_image(w, h);
  std::vector<unsigned char> bytes(img.pixels.size());
  in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (in.gcount() != static_cast<std::streamsize>(bytes.size())) {
    throw IoError("truncated PGM data in " + p.string());
  }
  for (std::size_t k = 0; k < bytes.size(); ++k) img.pixels[k] = bytes[k] / 255.0;
  return img;
}

}  // namespace lanebench
