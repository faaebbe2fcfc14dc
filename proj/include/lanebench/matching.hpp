#pragma once

#include <cstdint>
#include <span>

#include "lanebench/offline.hpp"

namespace lanebench {

inline constexpr double kComparableEpsilon = 0.1;  // mean |angle diff| bound
inline constexpr double kConsistencyTolerance = 0.1;

struct MatchResult {
  std::size_t offset_x = 0;         // start of the best real-sequence window
  std::size_t length_l = 0;         // == sim sequence length
  double mean_abs_angle_diff = 0.0; // at the best offset
  bool comparable = false;          // mean_abs_angle_diff <= epsilon
  std::size_t tie_count = 1;        // offsets sharing the minimal cost
};

// Slides the sim steering sequence over every window of the real sequence and
// returns the offset minimizing the mean absolute steering difference. Cost
// accumulation per offset is left-to-right, so results do not depend on the
// OpenMP schedule. Ties on the minimal cost are broken by a seeded uniform
// draw among the tied offsets. Throws ConfigError when sim is empty or longer
// than real.
MatchResult find_comparable(std::span<const double> sim, std::span<const double> real,
                            double epsilon = kComparableEpsilon, std::uint64_t seed = 0);

MatchResult find_comparable(const LabeledDataset& sim_ds, const LabeledDataset& real_ds,
                            double epsilon = kComparableEpsilon, std::uint64_t seed = 0);

// Plain serial scan, written independently of the parallel kernel; used as the
// correctness reference in tests and as the benchmark baseline.
MatchResult find_comparable_reference(std::span<const double> sim, std::span<const double> real,
                                      double epsilon = kComparableEpsilon, std::uint64_t seed = 0);

// Offline results agree when the simulated and matched-real MAE differ by at
// most `tol`.
bool consistent(double mae_sim, double mae_real, double tol = kConsistencyTolerance);

}  // namespace lanebench
