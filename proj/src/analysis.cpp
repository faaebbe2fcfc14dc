#include "lanebench/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include <json.hpp>

#include "lanebench/errors.hpp"
#include "lanebench/serialize.hpp"

namespace lanebench {
namespace {

template <typename... Args>
void appendf(std::string& s, const char* f, Args... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  s += buf;
}

void write_text(const std::string& body, const std::filesystem::path& p) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw IoError("cannot write " + p.string());
  out << body;
  if (!out) throw IoError("short write to " + p.string());
}

// MAE on x against MDCL on y, dashed threshold lines, agreement-colored dots.
std::string scatter_svg(const std::vector<AgreementRecord>& records, const Thresholds& th) {
  const double w = 480, h = 360, ml = 56, mr = 16, mt = 16, mb = 44;
  double max_mae = 0.2;
  for (const AgreementRecord& r : records) max_mae = std::max(max_mae, r.mae * 1.1);
  const double pw = w - ml - mr, ph = h - mt - mb;
  auto px = [&](double mae) { return ml + pw * (mae / max_mae); };
  auto py = [&](double mdcl) { return mt + ph * (1.0 - mdcl); };

  std::string s;
  appendf(s, "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%g\" height=\"%g\" viewBox=\"0 0 %g %g\">\n",
          w, h, w, h);
  appendf(s, "<rect width=\"%g\" height=\"%g\" fill=\"white\"/>\n", w, h);
  appendf(s, "<line x1=\"%g\" y1=\"%g\" x2=\"%g\" y2=\"%g\" stroke=\"black\"/>\n", ml, mt + ph, ml + pw,
          mt + ph);
  appendf(s, "<line x1=\"%g\" y1=\"%g\" x2=\"%g\" y2=\"%g\" stroke=\"black\"/>\n", ml, mt, ml, mt + ph);
  for (int k = 0; k <= 4; ++k) {
    const double mv = max_mae * k / 4.0;
    appendf(s, "<text x=\"%g\" y=\"%g\" font-size=\"10\" text-anchor=\"middle\">%.2f</text>\n",
            px(mv), mt + ph + 14.0, mv);
    const double dv = k / 4.0;
    appendf(s, "<text x=\"%g\" y=\"%g\" font-size=\"10\" text-anchor=\"end\">%.2f</text>\n",
            ml - 4.0, py(dv) + 3.0, dv);
  }
  appendf(s, "<text x=\"%g\" y=\"%g\" font-size=\"11\" text-anchor=\"middle\">offline MAE</text>\n",
          ml + pw / 2.0, h - 8.0);
  appendf(s,
          "<text x=\"14\" y=\"%g\" font-size=\"11\" text-anchor=\"middle\" "
          "transform=\"rotate(-90 14 %g)\">online MDCL</text>\n",
          mt + ph / 2.0, mt + ph / 2.0);
  if (th.mae <= max_mae) {
    appendf(s,
            "<line x1=\"%g\" y1=\"%g\" x2=\"%g\" y2=\"%g\" stroke=\"gray\" "
            "stroke-dasharray=\"4 3\"/>\n",
            px(th.mae), mt, px(th.mae), mt + ph);
  }
  appendf(s,
          "<line x1=\"%g\" y1=\"%g\" x2=\"%g\" y2=\"%g\" stroke=\"gray\" "
          "stroke-dasharray=\"4 3\"/>\n",
          ml, py(th.mdcl), ml + pw, py(th.mdcl));
  for (const AgreementRecord& r : records) {
    appendf(s, "<circle cx=\"%g\" cy=\"%g\" r=\"3\" fill=\"%s\" fill-opacity=\"0.75\"/>\n",
            px(std::min(r.mae, max_mae)), py(std::min(r.mdcl_normalized, 1.0)),
            r.in_agreement ? "#2b6cb0" : "#c53030");
  }
  s += "</svg>\n";
  return s;
}

std::string hist_svg(const std::vector<AgreementRecord>& records, const Thresholds& th) {
  const double w = 480, h = 300, ml = 48, mr = 16, mt = 16, mb = 40;
  const int bins = 20;
  double max_mae = 0.2;
  for (const AgreementRecord& r : records) max_mae = std::max(max_mae, r.mae * 1.05);
  std::vector<int> count(bins, 0);
  for (const AgreementRecord& r : records) {
    int b = static_cast<int>(std::floor(r.mae / max_mae * bins));
    b = std::clamp(b, 0, bins - 1);
    ++count[b];
  }
  const int peak = std::max(1, *std::max_element(count.begin(), count.end()));
  const double pw = w - ml - mr, ph = h - mt - mb;

  std::string s;
  appendf(s, "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%g\" height=\"%g\" viewBox=\"0 0 %g %g\">\n",
          w, h, w, h);
  appendf(s, "<rect width=\"%g\" height=\"%g\" fill=\"white\"/>\n", w, h);
  for (int b = 0; b < bins; ++b) {
    const double bh = ph * count[b] / peak;
    appendf(s, "<rect x=\"%g\" y=\"%g\" width=\"%g\" height=\"%g\" fill=\"#2b6cb0\"/>\n",
            ml + pw * b / bins + 1.0, mt + ph - bh, pw / bins - 2.0, bh);
  }
  appendf(s, "<line x1=\"%g\" y1=\"%g\" x2=\"%g\" y2=\"%g\" stroke=\"black\"/>\n", ml, mt + ph,
          ml + pw, mt + ph);
  if (th.mae <= max_mae) {
    appendf(s,
            "<line x1=\"%g\" y1=\"%g\" x2=\"%g\" y2=\"%g\" stroke=\"gray\" "
            "stroke-dasharray=\"4 3\"/>\n",
            ml + pw * (th.mae / max_mae), mt, ml + pw * (th.mae / max_mae), mt + ph);
  }
  for (int k = 0; k <= 4; ++k) {
    appendf(s, "<text x=\"%g\" y=\"%g\" font-size=\"10\" text-anchor=\"middle\">%.2f</text>\n",
            ml + pw * k / 4.0, mt + ph + 14.0, max_mae * k / 4.0);
  }
  appendf(s, "<text x=\"%g\" y=\"%g\" font-size=\"11\" text-anchor=\"middle\">offline MAE</text>\n",
          ml + pw / 2.0, h - 8.0);
  s += "</svg>\n";
  return s;
}

}  // namespace

AgreementRecord classify(const std::string& scenario_id, double mae_value,
                         double mdcl_normalized, const Thresholds& th) {
  AgreementRecord r;
  r.scenario_id = scenario_id;
  r.mae = mae_value;
  r.mdcl_normalized = mdcl_normalized;
  r.offline_acceptable = mae_value < th.mae;    // strictly below
  r.online_acceptable = mdcl_normalized < th.mdcl;
  r.in_agreement = r.offline_acceptable == r.online_acceptable;
  return r;
}

ContingencyTable contingency(const std::vector<AgreementRecord>& records) {
  ContingencyTable t;
  for (const AgreementRecord& r : records) {
    if (r.online_acceptable) {
      (r.offline_acceptable ? t.n11 : t.n12) += 1;
    } else {
      (r.offline_acceptable ? t.n21 : t.n22) += 1;
    }
  }
  return t;
}

void emit_report(std::vector<AgreementRecord> records, const std::vector<MatchedPairEntry>& matches,
                 const std::filesystem::path& out_dir, const Thresholds& th) {
  std::filesystem::create_directories(out_dir);
  std::sort(records.begin(), records.end(),
            [](const AgreementRecord& a, const AgreementRecord& b) {
              return a.scenario_id < b.scenario_id;
            });
  std::vector<MatchedPairEntry> pairs = matches;
  std::sort(pairs.begin(), pairs.end(),
            [](const MatchedPairEntry& a, const MatchedPairEntry& b) { return a.sim_id < b.sim_id; });

  const ContingencyTable t = contingency(records);
  nlohmann::json j;
  j["thresholds"] = {{"mae", th.mae}, {"mdcl", th.mdcl}};
  j["scenarios"] = nlohmann::json::array();
  for (const AgreementRecord& r : records) {
    j["scenarios"].push_back({{"scenario_id", r.scenario_id},
                              {"mae", r.mae},
                              {"mdcl_normalized", r.mdcl_normalized},
                              {"offline_acceptable", r.offline_acceptable},
                              {"online_acceptable", r.online_acceptable},
                              {"in_agreement", r.in_agreement}});
  }
  j["contingency"] = {{"n11", t.n11}, {"n12", t.n12}, {"n21", t.n21},
                      {"n22", t.n22}, {"total", t.total()}};
  int agreed = 0;
  for (const AgreementRecord& r : records) agreed += r.in_agreement ? 1 : 0;
  j["agreement_rate"] =
      records.empty() ? 0.0 : static_cast<double>(agreed) / static_cast<double>(records.size());

  nlohmann::json jm = nlohmann::json::array();
  int comparable_count = 0, consistent_count = 0;
  for (const MatchedPairEntry& e : pairs) {
    nlohmann::json one{{"sim_id", e.sim_id},
                       {"real_id", e.real_id},
                       {"offset_x", e.match.offset_x},
                       {"length_l", e.match.length_l},
                       {"mean_abs_angle_diff", e.match.mean_abs_angle_diff},
                       {"comparable", e.match.comparable}};
    if (e.mae_sim) one["mae_sim"] = *e.mae_sim;
    if (e.mae_real) one["mae_real"] = *e.mae_real;
    if (e.consistent) one["consistent"] = *e.consistent;
    comparable_count += e.match.comparable ? 1 : 0;
    consistent_count += (e.consistent && *e.consistent) ? 1 : 0;
    jm.push_back(std::move(one));
  }
  j["matching"] = {{"pairs", std::move(jm)},
                   {"pair_count", pairs.size()},
                   {"comparable_count", comparable_count},
                   {"consistent_count", consistent_count}};
  if (comparable_count > 0) {
    j["matching"]["consistency_rate"] =
        static_cast<double>(consistent_count) / static_cast<double>(comparable_count);
  }

  save_json_file(j, out_dir / "report.json");
  write_text(scatter_svg(records, th), out_dir / "scatter.svg");
  write_text(hist_svg(records, th), out_dir / "mae_hist.svg");
}

}  // namespace lanebench
