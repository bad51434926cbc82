#include "flats/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>

#include "flats/error.hpp"

namespace flats {

namespace {

void check_nonempty(const ScoreSeries& ind, const ScoreSeries& ood) {
  if (ind.empty() || ood.empty()) {
    throw Error(ErrorCode::EmptySeries, "need non-empty IND and OOD series (got " + std::to_string(ind.size()) +
                                            " and " + std::to_string(ood.size()) + ")");
  }
}

std::vector<double> sorted(const ScoreSeries& s) {
  std::vector<double> v(s.begin(), s.end());
  std::sort(v.begin(), v.end());
  return v;
}

}  // namespace

double auroc(const ScoreSeries& ind, const ScoreSeries& ood) {
  check_nonempty(ind, ood);
  const auto a = sorted(ind);
  const auto b = sorted(ood);

  // Twice the Mann-Whitney count stays an exact integer.
  std::uint64_t twice = 0;
  std::size_t below = 0;  // IND scores strictly below the current OOD value
  std::size_t upto = 0;   // IND scores <= the current OOD value
  for (std::size_t j = 0; j < b.size();) {
    const double v = b[j];
    std::size_t run = 0;
    while (j < b.size() && b[j] == v) {
      ++run;
      ++j;
    }
    while (below < a.size() && a[below] < v) ++below;
    upto = std::max(upto, below);
    while (upto < a.size() && a[upto] == v) ++upto;
    twice += run * (2 * below + (upto - below));
  }
  return static_cast<double>(twice) / (2.0 * static_cast<double>(a.size()) * static_cast<double>(b.size()));
}

FprAtTpr fpr_at_tpr(const ScoreSeries& ind, const ScoreSeries& ood, double level) {
  check_nonempty(ind, ood);
  if (!(level > 0.0 && level <= 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "TPR level must lie in (0, 1], got " + std::to_string(level));
  }
  auto desc = sorted(ood);
  std::reverse(desc.begin(), desc.end());
  const double n_ood = static_cast<double>(desc.size());

  std::size_t need = desc.size();
  for (std::size_t c = 1; c <= desc.size(); ++c) {
    if (static_cast<double>(c) / n_ood >= level) {
      need = c;
      break;
    }
  }
  const double t = desc[need - 1];
  const auto flagged = std::count_if(ind.begin(), ind.end(), [t](double s) { return s >= t; });
  return {static_cast<double>(flagged) / static_cast<double>(ind.size()), t};
}

std::vector<RocPoint> roc_curve(const ScoreSeries& ind, const ScoreSeries& ood) {
  check_nonempty(ind, ood);
  auto a = sorted(ind);
  auto b = sorted(ood);
  std::reverse(a.begin(), a.end());
  std::reverse(b.begin(), b.end());
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());

  std::vector<RocPoint> curve{{0.0, 0.0}};
  std::size_t i = 0;
  std::size_t j = 0;
  while (i < a.size() || j < b.size()) {
    double t = -INFINITY;
    if (i < a.size()) t = std::max(t, a[i]);
    if (j < b.size()) t = std::max(t, b[j]);
    while (i < a.size() && a[i] == t) ++i;
    while (j < b.size() && b[j] == t) ++j;
    curve.push_back({static_cast<double>(i) / na, static_cast<double>(j) / nb});
  }
  return curve;
}

double roc_area(const std::vector<RocPoint>& curve) {
  double area = 0.0;
  for (std::size_t p = 1; p < curve.size(); ++p) {
    area += (curve[p].fpr - curve[p - 1].fpr) * (curve[p].tpr + curve[p - 1].tpr) / 2.0;
  }
  return area;
}

EvalReport evaluate(const ScoreSeries& ind, const ScoreSeries& ood) {
  const auto fpr = fpr_at_tpr(ind, ood, 0.95);
  return {auroc(ind, ood), fpr.fpr, ind.size(), ood.size(), fpr.threshold};
}

}  // namespace flats
