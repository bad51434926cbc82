#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string_view>
#include <variant>

#include "flats/feature_pack.hpp"
#include "flats/gaussian.hpp"
#include "flats/knn.hpp"
#include "flats/score_series.hpp"

namespace flats {

/**
 * @file ratio.hpp
 *
 * @brief Likelihood-ratio scores built from two energies.
 *
 * An OOD score of the form log(p_out / p_in) becomes E_in - E_out once the
 * normalizing constants are dropped, since they shift every score equally.
 * Any distance-style OOD score can stand in for an energy. The feature-space
 * instance uses the k-NN distance to the IND training set for E_in and the
 * k-NN distance to an auxiliary corpus for E_out, weighted by alpha.
 */

/// E_in - alpha * E_out. Throws NonFinite on non-finite input or result.
double compose_score(double e_in, double e_out, double alpha);

/// knn_score(ind, q) - alpha * knn_score(aux, q).
/// Errors: DimMismatch, ZeroVector, NonFinite (alpha).
double flats_score(const KnnIndex& ind_index, const KnnIndex& aux_index, std::span<const float> query, double alpha);

ScoreSeries flats_scores(const KnnIndex& ind_index, const KnnIndex& aux_index, const FeaturePack& queries,
                         double alpha);

/// Element-wise compose_score(baseline_i, aux_i, alpha). Throws LengthMismatch.
ScoreSeries setting1_enhance(const ScoreSeries& baseline, const ScoreSeries& aux_knn, double alpha);

enum class EstimatorKind { Uniform, Maha, Knn };

inline constexpr std::array<EstimatorKind, 3> kEstimatorKinds{EstimatorKind::Uniform, EstimatorKind::Maha,
                                                              EstimatorKind::Knn};

std::string_view estimator_name(EstimatorKind kind) noexcept;

/// An energy estimator with its fitted artifact. Uniform carries nothing
/// and scores every query 0.
class Estimator {
 public:
  static Estimator uniform();
  static Estimator maha(GaussianModel model);
  static Estimator knn(KnnIndex index);

  EstimatorKind kind() const noexcept;
  ScoreSeries score(const FeaturePack& queries) const;

 private:
  using Artifact = std::variant<std::monostate, GaussianModel, KnnIndex>;
  explicit Estimator(Artifact a) : artifact_(std::move(a)) {}
  Artifact artifact_;
};

/// E_in and E_out estimators plus alpha. With a uniform E_out alpha has no
/// effect.
struct RatioSpec {
  Estimator ind_estimator = Estimator::uniform();
  Estimator ood_estimator = Estimator::uniform();
  double alpha = 0.5;

  ScoreSeries score(const FeaturePack& queries) const;
};

/// Score table indexed [E_in][E_out] in kEstimatorKinds order.
using Grid = std::array<std::array<ScoreSeries, 3>, 3>;

/**
 * Every (E_in, E_out) pair over {uniform, maha, knn}^2.
 *
 * IND estimators are fitted on the labelled training set. The auxiliary
 * corpus is unlabeled, so its Mahalanobis estimator uses one pseudo-class
 * centred on the corpus mean.
 */
class Setting2Estimators {
 public:
  Setting2Estimators(const FeaturePack& ind_train, const LabelPack& labels, const FeaturePack& aux, std::size_t k,
                     double ridge = kDefaultRidge);

  const Estimator& ind(EstimatorKind kind) const noexcept { return ind_[static_cast<std::size_t>(kind)]; }
  const Estimator& ood(EstimatorKind kind) const noexcept { return ood_[static_cast<std::size_t>(kind)]; }

  Grid score(const FeaturePack& queries, double alpha) const;

 private:
  std::array<Estimator, 3> ind_;
  std::array<Estimator, 3> ood_;
};

Grid setting2_grid(const FeaturePack& ind_train, const LabelPack& labels, const FeaturePack& aux,
                   const FeaturePack& queries, std::size_t k, double alpha, double ridge = kDefaultRidge);

}  // namespace flats
