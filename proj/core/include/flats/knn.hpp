#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "flats/feature_pack.hpp"
#include "flats/score_series.hpp"

namespace flats {

/// A reference row at distance below this is treated as the query itself
/// when self-exclusion is requested.
inline constexpr double kSelfMatchDistance = 1e-12;

struct Neighbor {
  std::uint32_t index = 0;
  double distance = 0.0;  // Euclidean, between unit vectors
};

/**
 * Exact nearest-neighbour index over L2-normalized reference rows.
 *
 * Rows are stored in double precision after dividing by their norm. Search
 * is brute force: every reference distance is computed, then a partial
 * selection picks the k nearest. Equal distances resolve to the lower row
 * index. Immutable after construction and safe to query concurrently.
 */
class KnnIndex {
 public:
  /// Errors: ZeroVector (reports the row), KTooLarge (k = 0 or k > n_rows).
  KnnIndex(const FeaturePack& features, std::size_t k);

  std::size_t k() const noexcept { return k_; }
  std::size_t n_ref() const noexcept { return n_ref_; }
  std::size_t dim() const noexcept { return dim_; }

  std::span<const double> row(std::size_t i) const noexcept { return {reference_.data() + i * dim_, dim_}; }

  /// The `count` nearest references in ascending (distance, index) order.
  /// With `exclude_self`, the nearest reference is dropped once if it lies
  /// within kSelfMatchDistance. `skip_row`, when set, is never returned.
  std::vector<Neighbor> neighbors(std::span<const double> unit_query, std::size_t count, bool exclude_self = false,
                                  std::int64_t skip_row = -1) const;

 private:
  std::vector<double> reference_;
  std::size_t n_ref_ = 0;
  std::size_t dim_ = 0;
  std::size_t k_ = 0;
};

KnnIndex build_knn_index(const FeaturePack& features, std::size_t k);

/// z / ||z||_2 in double precision. Throws ZeroVector.
std::vector<double> normalize(std::span<const float> z);
std::vector<double> normalize(std::span<const double> z);

/// Distance from the normalized query to its k-th nearest reference, in [0, 2].
/// Errors: DimMismatch, ZeroVector, KTooLarge (exclude_self leaves < k rows).
double knn_score(const KnnIndex& index, std::span<const float> query, bool exclude_self = false);
double knn_score(const KnnIndex& index, std::span<const double> query, bool exclude_self = false);

ScoreSeries knn_scores(const KnnIndex& index, const FeaturePack& queries, bool exclude_self = false);

/// ln of k * Gamma((m-1)/2 + 1) / (pi^((m-1)/2) * n): the factor linking the
/// k-th neighbour radius to a density on the unit sphere in R^m.
double knn_density_log_constant(std::size_t k, std::size_t n, std::size_t m);

/// k * Gamma((m-1)/2 + 1) / (pi^((m-1)/2) * n * r^(m-1)) with r = knn_score.
/// Errors: InvalidArgument (m < 2), DegenerateRadius (r = 0), plus those of
/// knn_score. May overflow to +inf for large m and small r; use the log form.
double knn_density(const KnnIndex& index, std::span<const float> query);
double knn_density(const KnnIndex& index, std::span<const double> query);
double knn_log_density(const KnnIndex& index, std::span<const float> query);
double knn_log_density(const KnnIndex& index, std::span<const double> query);

}  // namespace flats
