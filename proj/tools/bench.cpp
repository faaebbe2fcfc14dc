// Wall-clock comparison of the serial reference kernels against the OpenMP
// ones: the subsequence matcher at recording scale and a batch of closed-loop
// runs. Not registered with ctest; run manually.

#include <chrono>
#include <cstdio>
#include <random>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include <CLI11.hpp>

#include "lanebench/campaign.hpp"
#include "lanebench/matching.hpp"
#include "lanebench/online.hpp"
#include "lanebench/rng.hpp"

namespace lb = lanebench;

namespace {

double ms_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
}

void bench_matcher(std::size_t k, std::size_t n, int reps) {
  std::mt19937_64 g(12345);
  std::vector<double> real(k), sim(n);
  for (double& v : real) v = lb::uniform_in(g, -1.0, 1.0);
  for (double& v : sim) v = lb::uniform_in(g, -1.0, 1.0);

  // Warm-up plus result agreement check.
  const lb::MatchResult a = lb::find_comparable(sim, real, 0.1, 7);
  const lb::MatchResult b = lb::find_comparable_reference(sim, real, 0.1, 7);
  std::printf("matcher agreement: parallel mean=%.6f reference mean=%.6f offsets %zu/%zu\n",
              a.mean_abs_angle_diff, b.mean_abs_angle_diff, a.offset_x, b.offset_x);

  auto t0 = std::chrono::steady_clock::now();
  double sink = 0.0;
  for (int r = 0; r < reps; ++r) {
    sink += lb::find_comparable_reference(sim, real, 0.1, r).mean_abs_angle_diff;
  }
  const double serial_ms = ms_since(t0) / reps;

  t0 = std::chrono::steady_clock::now();
  for (int r = 0; r < reps; ++r) {
    sink += lb::find_comparable(sim, real, 0.1, r).mean_abs_angle_diff;
  }
  const double parallel_ms = ms_since(t0) / reps;

  std::printf("matcher k=%zu n=%zu reps=%d: serial %.3f ms, openmp %.3f ms, speedup %.2fx "
              "(sink %.3f)\n",
              k, n, reps, serial_ms, parallel_ms, serial_ms / parallel_ms, sink);
}

void bench_closed_loop(int scenarios) {
  lb::CampaignConfig cfg = lb::default_campaign_config();
  const lb::ConstraintContext cctx{cfg.sim.duration_T, 10.0};
  std::vector<lb::Scenario> scns;
  for (int i = 0; i < scenarios; ++i) {
    scns.push_back(lb::sample_scenario(cfg.domain_model, 9000 + i, 1000, cctx));
  }
  lb::ControllerSpec oracle_spec;
  oracle_spec.kind = "oracle";

  auto t0 = std::chrono::steady_clock::now();
  double sink = 0.0;
  for (const lb::Scenario& s : scns) {
    const auto c = lb::make_controller(oracle_spec);
    sink += lb::mdcl(lb::run_closed_loop(*c, s, cfg.sim, cfg.camera)).normalized;
  }
  const double serial_ms = ms_since(t0);

  t0 = std::chrono::steady_clock::now();
  std::vector<double> out(scns.size());
#pragma omp parallel for schedule(dynamic)
  for (long long i = 0; i < static_cast<long long>(scns.size()); ++i) {
    const auto c = lb::make_controller(oracle_spec);
    out[i] = lb::mdcl(lb::run_closed_loop(*c, scns[i], cfg.sim, cfg.camera)).normalized;
  }
  const double parallel_ms = ms_since(t0);
  for (double v : out) sink += v;

  std::printf("closed-loop batch of %d: serial %.1f ms, openmp %.1f ms, speedup %.2fx "
              "(sink %.3f)\n",
              scenarios, serial_ms, parallel_ms, serial_ms / parallel_ms, sink);
}

}  // namespace

int main(int argc, char** argv) {
  std::size_t k = 5614, n = 500;
  int reps = 50, scenarios = 8;
  CLI::App app{"serial vs OpenMP kernel benchmark"};
  app.add_option("--k", k, "recording length (frames)");
  app.add_option("--n", n, "sim sequence length (frames)");
  app.add_option("--reps", reps, "matcher repetitions");
  app.add_option("--scenarios", scenarios, "closed-loop batch size");
  CLI11_PARSE(app, argc, argv);

#ifdef _OPENMP
  std::printf("openmp max threads: %d\n", omp_get_max_threads());
#else
  std::printf("built without openmp\n");
#endif
  bench_matcher(k, n, reps);
  bench_closed_loop(scenarios);
  return 0;
}
