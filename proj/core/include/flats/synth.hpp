#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "flats/feature_pack.hpp"

namespace flats {

/// Axis-aligned Gaussian N(mean, diag(stddev^2)).
class GaussianSpec {
 public:
  /// Throws InvalidArgument unless dims agree, dim >= 1, and every stddev is
  /// finite and > 0.
  GaussianSpec(std::vector<double> mean, std::vector<double> stddev);
  static GaussianSpec isotropic(std::size_t dim, double mean, double stddev);

  std::size_t dim() const noexcept { return mean_.size(); }
  std::span<const double> mean() const noexcept { return mean_; }
  std::span<const double> stddev() const noexcept { return stddev_; }

  /// Exact log density. Throws DimMismatch.
  double log_density(std::span<const double> x) const;

 private:
  std::vector<double> mean_;
  std::vector<double> stddev_;
};

/// The toy pair: IND N(0, 1), OOD N(0, 0.01) (variance 0.01, stddev 0.1).
GaussianSpec toy_in_spec();
GaussianSpec toy_out_spec();

struct SynthRun {
  static constexpr std::size_t kMinPerSide = 100;

  std::uint64_t seed = 7;
  std::size_t n_per_side = 10000;
  GaussianSpec in_spec = toy_in_spec();
  GaussianSpec out_spec = toy_out_spec();

  /// Throws InvalidArgument (n_per_side below minimum) or DimMismatch.
  void validate() const;
};

/// n i.i.d. draws, stored as float32. Same (spec, n, seed) -> same bytes.
FeaturePack sample(const GaussianSpec& spec, std::size_t n, std::uint64_t seed);

/// log(p_out(x) / p_in(x)); higher = more OOD. Throws DimMismatch.
double analytic_lr_score(const GaussianSpec& in_spec, const GaussianSpec& out_spec, std::span<const double> x);

using Scorer = std::function<double(std::span<const double>)>;

struct UmpCheck {
  double auroc_candidate = 0.0;
  double auroc_lr = 0.0;
};

/// Samples n_per_side from each side (IND stream 0, OOD stream 1 of the
/// seed), scores both with the candidate and with analytic_lr_score.
UmpCheck ump_auroc_check(const SynthRun& run, const Scorer& candidate);

struct DominanceCase {
  std::size_t pair = 0;
  std::string candidate;
  double auroc_candidate = 0.0;
  double auroc_lr = 0.0;
};

/// Random Gaussian pairs (dims 1..4) scored by three rival detectors:
/// negative IND log-density, OOD log-density, and a random projection.
std::vector<DominanceCase> ump_dominance_suite(std::uint64_t seed, std::size_t n_pairs, std::size_t n_per_side);

/// k-th smallest distance between the normalized query and the normalized
/// reference rows, by full sort. Independent of KnnIndex.
/// Errors: KTooLarge, DimMismatch, ZeroVector.
double brute_force_knn(const FeaturePack& reference, std::span<const float> query, std::size_t k);

/// n points uniform on the unit circle in R^2.
FeaturePack sample_unit_circle(std::size_t n, std::uint64_t seed);

struct DensityPoint {
  std::size_t n = 0;
  double mean_estimate = 0.0;
  /// |mean_estimate - 1/(2 pi)| / (1/(2 pi)).
  double relative_error = 0.0;
};

/// k-NN density estimates at n_queries uniform circle queries against n
/// uniform circle references, for each n.
std::vector<DensityPoint> knn_density_consistency(std::uint64_t seed, std::size_t k, std::span<const std::size_t> ns,
                                                  std::size_t n_queries);

/**
 * Two-dimensional nested-cluster benchmark.
 *
 * IND features have angle ~ N(0, 1) rad on a circle and radius ~ U(0.5, 2);
 * auxiliary and OOD test features share the angle law N(0, 0.1). So OOD
 * points sit where IND density is highest, and only the auxiliary term can
 * tell them apart. Labels split IND by the sign of the angle; logits are
 * 3 cos(angle -/+ 0.5).
 */
struct NestedBenchmark {
  FeaturePack ind_train;
  LabelPack labels_train;
  FeaturePack aux;
  FeaturePack ind_test;
  FeaturePack ood_test;
  LogitPack logits_ind_test;
  LogitPack logits_ood_test;
};

struct NestedBenchmarkSizes {
  std::size_t ind_train = 2000;
  std::size_t aux = 2000;
  std::size_t ind_test = 1000;
  std::size_t ood_test = 1000;
};

NestedBenchmark nested_circle_benchmark(std::uint64_t seed, NestedBenchmarkSizes sizes = {});

}  // namespace flats
