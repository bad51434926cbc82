#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "flats/knn.hpp"
#include "flats/score_series.hpp"

namespace flats {

/// Added to mean reachability distances before inverting, so exact
/// duplicates give a large but finite local reachability density.
inline constexpr double kLofDensityEpsilon = 1e-10;

/**
 * Local outlier factor against a fixed reference set, with MinPts = k of the
 * underlying index and distances between normalized features.
 *
 * Construction precomputes, for every reference row o (its own row
 * excluded from its neighbourhood): k-distance(o) and
 * lrd(o) = 1 / (mean_{p in N_k(o)} max(k-distance(p), d(o, p)) + eps).
 * A query q is not part of the reference set, so its neighbourhood is the
 * plain k nearest rows and
 * LOF(q) = mean_{o in N_k(q)} lrd(o) / lrd(q).
 */
class LofModel {
 public:
  /// Errors: KTooLarge unless n_ref > k.
  explicit LofModel(KnnIndex index);

  const KnnIndex& index() const noexcept { return index_; }
  std::span<const double> k_distances() const noexcept { return k_distance_; }
  std::span<const double> local_reachability() const noexcept { return lrd_; }

 private:
  KnnIndex index_;
  std::vector<double> k_distance_;
  std::vector<double> lrd_;
};

/// Errors: DimMismatch, ZeroVector.
double lof_score(const LofModel& model, std::span<const float> query);
double lof_score(const LofModel& model, std::span<const double> query);

ScoreSeries lof_scores(const LofModel& model, const FeaturePack& queries);

}  // namespace flats
