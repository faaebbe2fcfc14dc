#include "lanebench/matching.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "lanebench/errors.hpp"
#include "lanebench/rng.hpp"

namespace lanebench {
namespace {

void check_inputs(std::span<const double> sim, std::span<const double> real) {
  if (sim.empty()) throw ConfigError("empty sim steering sequence");
  if (sim.size() > real.size()) {
    throw ConfigError("sim sequence (" + std::to_string(sim.size()) +
                      ") longer than the real sequence (" + std::to_string(real.size()) + ")");
  }
}

MatchResult pick_best(const std::vector<double>& costs, std::size_t l, double epsilon,
                      std::uint64_t seed) {
  const double best = *std::min_element(costs.begin(), costs.end());
  std::vector<std::size_t> tied;
  for (std::size_t off = 0; off < costs.size(); ++off) {
    if (costs[off] == best) tied.push_back(off);
  }
  std::mt19937_64 g(mix64(seed));
  MatchResult r;
  r.offset_x = tied[uniform_index(g, tied.size())];
  r.length_l = l;
  r.mean_abs_angle_diff = best / static_cast<double>(l);
  r.comparable = r.mean_abs_angle_diff <= epsilon;
  r.tie_count = tied.size();
  return r;
}

}  // namespace

MatchResult find_comparable(std::span<const double> sim, std::span<const double> real,
                            double epsilon, std::uint64_t seed) {
  check_inputs(sim, real);
  const std::size_t l = sim.size();
  const std::size_t offsets = real.size() - l + 1;
  std::vector<double> costs(offsets);

  // Each offset owns one slot and sums left-to-right: bitwise-identical output
  // for any thread count or schedule.
#pragma omp parallel for schedule(static)
  for (long long off = 0; off < static_cast<long long>(offsets); ++off) {
    double acc = 0.0;
    const double* rp = real.data() + off;
    for (std::size_t j = 0; j < l; ++j) acc += std::abs(sim[j] - rp[j]);
    costs[static_cast<std::size_t>(off)] = acc;
  }
  return pick_best(costs, l, epsilon, seed);
}

MatchResult find_comparable(const LabeledDataset& sim_ds, const LabeledDataset& real_ds,
                            double epsilon, std::uint64_t seed) {
  const std::vector<double> s = sim_ds.labels();
  const std::vector<double> r = real_ds.labels();
  return find_comparable(s, r, epsilon, seed);
}

MatchResult find_comparable_reference(std::span<const double> sim, std::span<const double> real,
                                      double epsilon, std::uint64_t seed) {
  check_inputs(sim, real);
  const std::size_t l = sim.size();
  std::vector<double> costs;
  costs.reserve(real.size() - l + 1);
  for (std::size_t off = 0; off + l <= real.size(); ++off) {
    double acc = 0.0;
    for (std::size_t j = 0; j < l; ++j) acc += std::abs(sim[j] - real[off + j]);
    costs.push_back(acc);
  }
  return pick_best(costs, l, epsilon, seed);
}

bool consistent(double mae_sim, double mae_real, double tol) {
  return std::abs(mae_sim - mae_real) <= tol;
}

}  // namespace lanebench
