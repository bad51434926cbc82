#include "flats/ratio.hpp"

#include <cmath>
#include <string>
#include <vector>

#include "flats/error.hpp"
#include "flats/parallel.hpp"

namespace flats {

double compose_score(double e_in, double e_out, double alpha) {
  if (!std::isfinite(e_in) || !std::isfinite(e_out) || !std::isfinite(alpha)) {
    throw Error(ErrorCode::NonFinite, "compose_score inputs must be finite");
  }
  const double s = e_in - alpha * e_out;
  if (!std::isfinite(s)) {
    throw Error(ErrorCode::NonFinite, "composed score overflowed");
  }
  return s;
}

double flats_score(const KnnIndex& ind_index, const KnnIndex& aux_index, std::span<const float> query, double alpha) {
  return compose_score(knn_score(ind_index, query), knn_score(aux_index, query), alpha);
}

ScoreSeries flats_scores(const KnnIndex& ind_index, const KnnIndex& aux_index, const FeaturePack& queries,
                         double alpha) {
  return setting1_enhance(knn_scores(ind_index, queries), knn_scores(aux_index, queries), alpha);
}

ScoreSeries setting1_enhance(const ScoreSeries& baseline, const ScoreSeries& aux_knn, double alpha) {
  if (baseline.size() != aux_knn.size()) {
    throw Error(ErrorCode::LengthMismatch, "baseline has " + std::to_string(baseline.size()) +
                                               " scores, aux has " + std::to_string(aux_knn.size()));
  }
  std::vector<double> out(baseline.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = compose_score(baseline[i], aux_knn[i], alpha);
  return ScoreSeries(std::move(out));
}

std::string_view estimator_name(EstimatorKind kind) noexcept {
  switch (kind) {
    case EstimatorKind::Uniform: return "uniform";
    case EstimatorKind::Maha: return "maha";
    case EstimatorKind::Knn: return "knn";
  }
  return "unknown";
}

Estimator Estimator::uniform() { return Estimator(std::monostate{}); }
Estimator Estimator::maha(GaussianModel model) { return Estimator(std::move(model)); }
Estimator Estimator::knn(KnnIndex index) { return Estimator(std::move(index)); }

EstimatorKind Estimator::kind() const noexcept {
  switch (artifact_.index()) {
    case 1: return EstimatorKind::Maha;
    case 2: return EstimatorKind::Knn;
    default: return EstimatorKind::Uniform;
  }
}

ScoreSeries Estimator::score(const FeaturePack& queries) const {
  if (const auto* g = std::get_if<GaussianModel>(&artifact_)) return maha_scores(*g, queries);
  if (const auto* idx = std::get_if<KnnIndex>(&artifact_)) return knn_scores(*idx, queries);
  return ScoreSeries(std::vector<double>(queries.rows(), 0.0));
}

ScoreSeries RatioSpec::score(const FeaturePack& queries) const {
  return setting1_enhance(ind_estimator.score(queries), ood_estimator.score(queries), alpha);
}

Setting2Estimators::Setting2Estimators(const FeaturePack& ind_train, const LabelPack& labels, const FeaturePack& aux,
                                       std::size_t k, double ridge)
    : ind_{Estimator::uniform(), Estimator::maha(fit_gaussian(ind_train, labels, ridge)),
           Estimator::knn(build_knn_index(ind_train, k))},
      ood_{Estimator::uniform(), Estimator::maha(fit_gaussian_unlabeled(aux, ridge)),
           Estimator::knn(build_knn_index(aux, k))} {
  if (ind_train.dim() != aux.dim()) {
    throw Error(ErrorCode::DimMismatch, "ind_train has dim " + std::to_string(ind_train.dim()) + ", aux has dim " +
                                            std::to_string(aux.dim()));
  }
}

Grid Setting2Estimators::score(const FeaturePack& queries, double alpha) const {
  std::array<ScoreSeries, 3> e_in;
  std::array<ScoreSeries, 3> e_out;
  for (std::size_t i = 0; i < 3; ++i) {
    e_in[i] = ind_[i].score(queries);
    e_out[i] = ood_[i].score(queries);
  }
  Grid grid;
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t o = 0; o < 3; ++o) grid[i][o] = setting1_enhance(e_in[i], e_out[o], alpha);
  }
  return grid;
}

Grid setting2_grid(const FeaturePack& ind_train, const LabelPack& labels, const FeaturePack& aux,
                   const FeaturePack& queries, std::size_t k, double alpha, double ridge) {
  return Setting2Estimators(ind_train, labels, aux, k, ridge).score(queries, alpha);
}

}  // namespace flats
