#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "lanebench/matching.hpp"

namespace lanebench {

// Acceptability cutoffs; a result is acceptable strictly below the threshold.
struct Thresholds {
  double mae = 0.1;
  double mdcl = 0.7;
};

struct AgreementRecord {
  std::string scenario_id;
  double mae = 0.0;
  double mdcl_normalized = 0.0;
  bool offline_acceptable = false;
  bool online_acceptable = false;
  bool in_agreement = false;
};

// Counts over the acceptability grid. Rows split on the online verdict,
// columns on the offline verdict:
//   n11: online ok,   offline ok      n12: online ok,   offline bad
//   n21: online bad,  offline ok      n22: online bad,  offline bad
// n12 is the safe direction (offline pessimism); n21 is the dangerous one —
// offline testing missed a lane departure.
struct ContingencyTable {
  int n11 = 0, n12 = 0, n21 = 0, n22 = 0;
  int total() const { return n11 + n12 + n21 + n22; }
};

AgreementRecord classify(const std::string& scenario_id, double mae_value,
                         double mdcl_normalized, const Thresholds& th = {});
ContingencyTable contingency(const std::vector<AgreementRecord>& records);

// One matched sim/real pair from the comparable-subsequence study.
struct MatchedPairEntry {
  std::string sim_id;
  std::string real_id;
  MatchResult match;
  std::optional<double> mae_sim;
  std::optional<double> mae_real;   // filled only for comparable pairs
  std::optional<bool> consistent;   // likewise
};

// Writes report.json plus scatter.svg (MAE vs MDCL, threshold lines) and
// mae_hist.svg into out_dir. Records are sorted by scenario_id first, so the
// same inputs produce byte-identical files regardless of arrival order.
void emit_report(std::vector<AgreementRecord> records, const std::vector<MatchedPairEntry>& matches,
                 const std::filesystem::path& out_dir, const Thresholds& th = {});

}  // namespace lanebench
