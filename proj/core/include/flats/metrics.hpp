#pragma once

#include <cstddef>
#include <vector>

#include "flats/score_series.hpp"

namespace flats {

// OOD is the positive class throughout: a detector flags x when its score
// is at or above the threshold.

/// P(random OOD score > random IND score), ties counted 1/2. Exact, by
/// sorting. Throws EmptySeries.
double auroc(const ScoreSeries& ind, const ScoreSeries& ood);

struct FprAtTpr {
  double fpr = 0.0;
  double threshold = 0.0;
};

/// Threshold t is the largest score with fraction(ood >= t) >= level; no
/// interpolation. Returns fraction(ind >= t) with t.
/// Errors: EmptySeries, InvalidArgument (level outside (0, 1]).
FprAtTpr fpr_at_tpr(const ScoreSeries& ind, const ScoreSeries& ood, double level = 0.95);

struct RocPoint {
  double fpr = 0.0;
  double tpr = 0.0;
  friend bool operator==(const RocPoint&, const RocPoint&) = default;
};

/// (0, 0) followed by one point per distinct score, thresholds descending,
/// ending at (1, 1).
std::vector<RocPoint> roc_curve(const ScoreSeries& ind, const ScoreSeries& ood);

/// Trapezoidal area under a curve from roc_curve. Tied scores produce
/// diagonal segments, which is where the 1/2 tie credit comes from.
double roc_area(const std::vector<RocPoint>& curve);

struct EvalReport {
  double auroc = 0.0;
  double fpr95 = 0.0;
  std::size_t n_ind = 0;
  std::size_t n_ood = 0;
  double threshold = 0.0;
};

EvalReport evaluate(const ScoreSeries& ind, const ScoreSeries& ood);

}  // namespace flats
