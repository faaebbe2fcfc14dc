// Acceptance gate: eight end-to-end criteria, each printing one PASS/FAIL
// line. Criterion 2 runs the full default campaign twice and later criteria
// reuse its first run, so this binary is meant to execute in full.

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "lanebench/camera.hpp"
#include "lanebench/campaign.hpp"
#include "lanebench/rng.hpp"
#include "lanebench/world.hpp"

namespace lanebench {
namespace {

namespace fs = std::filesystem;

void report_line(int index, const char* slug, bool ok, const std::string& detail) {
  std::printf("[%s] criterion %d (%s): %s\n", ok ? "PASS" : "FAIL", index, slug, detail.c_str());
  std::fflush(stdout);
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

Scenario manual_scenario(const std::string& id, RoadTopology topo, double kappa, double length,
                         double speed) {
  Scenario s;
  s.id = id;
  s.road_topology = topo;
  s.curvature = kappa;
  s.road_length = length;
  s.lane_width = 3.5;
  s.weather = Weather::sunny;
  s.weather_intensity = 0.0;
  s.brightness = 1.0;
  s.ego_speed = speed;
  s.rng_seed = 13;
  return s;
}

struct SharedCampaign {
  std::optional<CampaignResult> result;
  fs::path dir_a;
  bool attempted = false;
};

SharedCampaign& shared_campaign() {
  static SharedCampaign sc;
  return sc;
}

TEST(Acceptance, Criterion1SamplingValidity) {
  const DomainModel model = default_domain_model();
  const ConstraintContext cctx;
  int valid = 0, deterministic = 0;
  const int n = 1000;
  for (int i = 0; i < n; ++i) {
    const std::uint64_t seed = static_cast<std::uint64_t>(i) * 2654435761u + 17;
    const Scenario s = sample_scenario(model, seed);
    if (check_constraints(s, model, cctx).empty()) ++valid;
    const Scenario again = sample_scenario(model, seed);
    if (again.id == s.id && again.curvature == s.curvature && again.rng_seed == s.rng_seed &&
        again.road_length == s.road_length && again.ego_speed == s.ego_speed) {
      ++deterministic;
    }
  }
  const bool ok = valid == n && deterministic == n;
  char detail[128];
  std::snprintf(detail, sizeof detail, "%d/%d constraint-valid, %d/%d replay-identical", valid, n,
                deterministic, n);
  report_line(1, "scenario-sampling-validity", ok, detail);
  EXPECT_TRUE(ok);
}

TEST(Acceptance, Criterion2CampaignRerunBitwiseIdentical) {
  SharedCampaign& sc = shared_campaign();
  sc.attempted = true;
  const fs::path base = fs::temp_directory_path() / "lb_acceptance";
  fs::remove_all(base);
  sc.dir_a = base / "run-a";
  const fs::path dir_b = base / "run-b";

  CampaignConfig cfg = default_campaign_config();
  cfg.out_dir = sc.dir_a;
  sc.result = run_campaign(cfg);
  cfg.out_dir = dir_b;
  run_campaign(cfg);

  bool ok = true;
  std::string mismatch;
  for (const char* name :
       {"report.json", "offline_results.csv", "online_results.csv", "matches.csv"}) {
    const std::string a = slurp(sc.dir_a / name);
    const std::string b = slurp(dir_b / name);
    if (a.empty() || a != b) {
      ok = false;
      mismatch += std::string(" ") + name;
    }
  }
  char detail[160];
  std::snprintf(detail, sizeof detail,
                "full rerun of the default campaign%s%s (report %zu bytes)",
                ok ? ": all outputs byte-identical" : ": mismatch in", mismatch.c_str(),
                slurp(sc.dir_a / "report.json").size());
  report_line(2, "campaign-rerun-determinism", ok, detail);
  EXPECT_TRUE(ok);
  fs::remove_all(dir_b);  // keep run-a for later criteria
}

TEST(Acceptance, Criterion3MatcherAgreesWithBruteForceReference) {
  std::mt19937_64 g(31337);
  const std::size_t n = 5614, l = 500;  // recording-scale instance sizes
  int recovered = 0, agreed = 0;
  const int instances = 100;
  for (int i = 0; i < instances; ++i) {
    std::vector<double> real(n);
    for (double& v : real) v = uniform_in(g, -1.0, 1.0);
    const std::size_t x0 = static_cast<std::size_t>(uniform_index(g, n - l + 1));
    std::vector<double> sim(l);
    for (std::size_t j = 0; j < l; ++j) sim[j] = real[x0 + j] + uniform_in(g, -0.04, 0.04);
    const std::uint64_t seed = g();
    const MatchResult fast = find_comparable(sim, real, kComparableEpsilon, seed);
    const MatchResult ref = find_comparable_reference(sim, real, kComparableEpsilon, seed);
    if (fast.offset_x == x0 && fast.comparable) ++recovered;
    if (fast.offset_x == ref.offset_x &&
        fast.mean_abs_angle_diff == ref.mean_abs_angle_diff &&
        fast.comparable == ref.comparable && fast.tie_count == ref.tie_count) {
      ++agreed;
    }
  }
  const bool ok = recovered == instances && agreed == instances;
  char detail[128];
  std::snprintf(detail, sizeof detail, "%d/%d planted offsets recovered, %d/%d kernel==reference",
                recovered, instances, agreed, instances);
  report_line(3, "matcher-reference-agreement", ok, detail);
  EXPECT_TRUE(ok);
}

TEST(Acceptance, Criterion4ComparableRateAndConsistency) {
  SharedCampaign& sc = shared_campaign();
  ASSERT_TRUE(sc.attempted) << "criterion 2 must run first";
  ASSERT_TRUE(sc.result.has_value()) << "campaign did not complete";
  const CampaignResult& r = *sc.result;

  double sum_gap = 0.0;
  int gap_n = 0;
  for (const MatchedPairEntry& e : r.matches) {
    if (e.match.comparable && e.mae_sim && e.mae_real) {
      sum_gap += std::abs(*e.mae_sim - *e.mae_real);
      ++gap_n;
    }
  }
  const double mean_gap = gap_n > 0 ? sum_gap / gap_n : 1.0;
  const bool ok = r.comparable_count >= 92 &&
                  r.consistent_count == r.comparable_count && mean_gap < 0.1;
  char detail[160];
  std::snprintf(detail, sizeof detail,
                "%d/%zu comparable (need >= 92), %d consistent, mean |MAE gap| %.4f (< 0.1)",
                r.comparable_count, r.matches.size(), r.consistent_count, mean_gap);
  report_line(4, "offline-offline-consistency", ok, detail);
  EXPECT_TRUE(ok);
}

TEST(Acceptance, Criterion5AgreementTableHasNoOnlineOkOfflineBadCell) {
  SharedCampaign& sc = shared_campaign();
  ASSERT_TRUE(sc.attempted) << "criterion 2 must run first";
  ASSERT_TRUE(sc.result.has_value()) << "campaign did not complete";
  const ContingencyTable& t = sc.result->table;

  const bool ok = t.total() == 50 && t.n12 == 0;
  char detail[160];
  std::snprintf(detail, sizeof detail,
                "n11=%d n12=%d n21=%d n22=%d over %d scenarios (need n12 == 0, total == 50)",
                t.n11, t.n12, t.n21, t.n22, t.total());
  report_line(5, "no-online-ok-offline-bad", ok, detail);
  EXPECT_TRUE(ok);
}

TEST(Acceptance, Criterion6BiasedOracleSplitsOfflineFromOnline) {
  // Offline the +0.05 bias is invisible below the 0.1 MAE bar; online the
  // uncompensated drift leaves the lane.
  const Scenario curve = manual_scenario("acc6-curve", RoadTopology::left_curved, 0.004, 400, 10);
  const LabeledDataset ds = generate_sim_dataset(curve, SimConfig{});
  BiasedController offline_c(std::make_shared<OracleController>(), 0.05);
  const double mae_off = evaluate_offline(offline_c, ds).mae;
  const bool offline_ok = std::abs(mae_off - 0.05) < 1e-12;

  bool online_departs = true;
  std::string mdcls;
  const Scenario scns[] = {
      manual_scenario("acc6-straight", RoadTopology::straight, 0.0, 400, 10),
      manual_scenario("acc6-left", RoadTopology::left_curved, 0.004, 400, 10),
      manual_scenario("acc6-right", RoadTopology::right_curved, 0.004, 400, 10),
  };
  for (const Scenario& scn : scns) {
    BiasedController c(std::make_shared<OracleController>(), 0.05);
    const double norm = mdcl(run_closed_loop(c, scn, SimConfig{})).normalized;
    char one[32];
    std::snprintf(one, sizeof one, " %.3f", norm);
    mdcls += one;
    if (norm < 0.7) online_departs = false;
  }

  const bool ok = offline_ok && online_departs;
  char detail[160];
  std::snprintf(detail, sizeof detail,
                "offline MAE %.15f (|err| < 1e-12 vs 0.05), MDCL%s (each >= 0.7)", mae_off,
                mdcls.c_str());
  report_line(6, "bias-invisible-offline-fatal-online", ok, detail);
  EXPECT_TRUE(ok);
}

TEST(Acceptance, Criterion7OracleStaysInLaneDeterministically) {
  const DomainModel model = default_domain_model();
  const SimConfig cfg;
  const std::uint64_t master = 42;
  int in_lane = 0, repeatable = 0;
  const int n = 50;
  double worst = 0.0;
  for (int i = 0; i < n; ++i) {
    const Scenario scn =
        sample_scenario(model, master ^ (seed_phase::kTestScenario + static_cast<std::uint64_t>(i)));
    OracleController c1, c2;
    const SimulationTrace a = run_closed_loop(c1, scn, cfg);
    const SimulationTrace b = run_closed_loop(c2, scn, cfg);
    const double norm = mdcl(a).normalized;
    worst = std::max(worst, norm);
    if (norm < 0.2 && !a.aborted) ++in_lane;
    bool same = a.steps.size() == b.steps.size();
    for (std::size_t j = 0; same && j < a.steps.size(); ++j) {
      same = a.steps[j].pose.x == b.steps[j].pose.x && a.steps[j].pose.y == b.steps[j].pose.y &&
             a.steps[j].pose.heading == b.steps[j].pose.heading &&
             a.steps[j].steering == b.steps[j].steering &&
             a.steps[j].lateral_dev == b.steps[j].lateral_dev;
    }
    if (same) ++repeatable;
    if (i < 3) {  // spot-check the on-disk form as well
      const fs::path base = fs::temp_directory_path() / "lb_acc7";
      save_trace(a, base / "a");
      save_trace(b, base / "b");
      if (slurp(base / "a" / "trace.csv") != slurp(base / "b" / "trace.csv")) repeatable = -1000;
      fs::remove_all(base);
    }
  }
  const bool ok = in_lane == n && repeatable == n;
  char detail[160];
  std::snprintf(detail, sizeof detail,
                "%d/%d runs with MDCL < 0.2 (worst %.4f), %d/%d bitwise-repeatable", in_lane, n,
                worst, repeatable, n);
  report_line(7, "oracle-closed-loop-stability", ok, detail);
  EXPECT_TRUE(ok);
}

TEST(Acceptance, Criterion8WeatherDegradesTheLearnedController) {
  SharedCampaign& sc = shared_campaign();
  ASSERT_TRUE(sc.attempted) << "criterion 2 must run first";
  ASSERT_TRUE(sc.result.has_value()) << "campaign did not complete";
  const LoadedModel lm = load_model(sc.dir_a / "model.bin");
  auto params = std::make_shared<const MlpParams>(lm.params);

  // Full fog erases the scene to pure white.
  Scenario foggy = manual_scenario("acc8-fog", RoadTopology::s_curve, 0.01, 400, 10);
  foggy.weather = Weather::fog;
  foggy.weather_intensity = 1.0;
  const Road road = build_road(foggy);
  const Image blank = render(road, start_pose(road, 10.0), foggy);
  bool all_white = true;
  for (double v : blank.pixels) all_white = all_white && v == 1.0;

  // Mean brightness rises monotonically with fog intensity.
  Scenario partial = foggy;
  bool monotone = true;
  double prev_mean = -1.0;
  for (double intensity : {0.0, 0.3, 0.6, 0.9}) {
    partial.weather_intensity = intensity;
    partial.weather = intensity == 0.0 ? Weather::sunny : Weather::fog;
    const Image img = render(road, start_pose(road, 10.0), partial);
    double mean = 0.0;
    for (double v : img.pixels) mean += v;
    mean /= static_cast<double>(img.pixels.size());
    if (mean <= prev_mean) monotone = false;
    prev_mean = mean;
  }

  // The trained controller reads nothing from a whited-out scene, so its
  // open-loop error must exceed the clear-sky error on the same drive.
  Scenario sunny = foggy;
  sunny.id = "acc8-sun";
  sunny.weather = Weather::sunny;
  sunny.weather_intensity = 0.0;
  const LabeledDataset ds_sun = generate_sim_dataset(sunny, SimConfig{});
  const LabeledDataset ds_fog = generate_sim_dataset(foggy, SimConfig{});
  MlpController c_sun(params, lm.history_window), c_fog(params, lm.history_window);
  const double mae_sun = evaluate_offline(c_sun, ds_sun).mae;
  const double mae_fog = evaluate_offline(c_fog, ds_fog).mae;

  const bool ok = all_white && monotone && mae_fog > mae_sun;
  char detail[160];
  std::snprintf(detail, sizeof detail,
                "fog=1 frame all-white: %s, brightness monotone in fog: %s, MAE fog %.4f > sun "
                "%.4f: %s",
                all_white ? "yes" : "no", monotone ? "yes" : "no", mae_fog, mae_sun,
                mae_fog > mae_sun ? "yes" : "no");
  report_line(8, "weather-degrades-learned-controller", ok, detail);
  EXPECT_TRUE(ok);

  fs::remove_all(fs::temp_directory_path() / "lb_acceptance");
}

}  // namespace
}  // namespace lanebench
