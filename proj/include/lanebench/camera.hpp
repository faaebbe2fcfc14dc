#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "lanebench/dynamics.hpp"
#include "lanebench/scenario.hpp"
#include "lanebench/world.hpp"

namespace lanebench {

// Grayscale image, intensities in [0, 1], row 0 at the top.
struct Image {
  int width = 0;
  int height = 0;
  std::vector<double> pixels;  // row-major

  double at(int row, int col) const { return pixels[static_cast<std::size_t>(row) * width + col]; }
  double& at(int row, int col) { return pixels[static_cast<std::size_t>(row) * width + col]; }
  bool operator==(const Image&) const = default;
};

Image make_image(int width, int height, double fill = 0.0);

struct CameraConfig {
  int width = 32;
  int height = 32;
  double mount_height = 1.2;  // m above the road surface
  double fov_deg = 90.0;      // horizontal field of view
};

// Forward-facing camera at the vehicle pose; pitch 0, horizon at mid-frame.
// Scene geometry (road surface, lane edge lines, off-road ground, sky) is
// ray-cast analytically per pixel; lane lines get horizontal-coverage
// anti-aliasing. Weather and brightness are applied afterwards, seeded from
// the scenario seed and the pose so repeated renders are identical.
Image render(const Road& road, const VehicleState& st, const Scenario& scn,
             const CameraConfig& cam = {});

// Brightness multiply, then the weather overlay. Fog blends toward pure white
// (intensity 1 erases the scene); rain draws dark vertical streaks and snow
// bright specks, counts proportional to intensity, placement from `seed`.
Image apply_weather(const Image& base, Weather w, double intensity, double brightness,
                    std::uint64_t seed);

// Binary 8-bit PGM (P5), maxval 255, round-to-nearest quantization.
void write_pgm(const Image& img, const std::filesystem::path& p);
Image read_pgm(const std::filesystem::path& p);

}  // namespace lanebench
