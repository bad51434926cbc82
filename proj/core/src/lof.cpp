#include "flats/lof.hpp"

#include <algorithm>
#include <string>
#include <utility>

#include "flats/error.hpp"
#include "flats/parallel.hpp"

namespace flats {

LofModel::LofModel(KnnIndex idx) : index_(std::move(idx)) {
  const KnnIndex& index = index_;
  const std::size_t n = index.n_ref();
  const std::size_t k = index.k();
  if (n <= k) {
    throw Error(ErrorCode::KTooLarge, "LOF needs more than k = " + std::to_string(k) + " reference rows, got " +
                                          std::to_string(n));
  }

  std::vector<std::vector<Neighbor>> hoods(n);
  k_distance_.resize(n);
  parallel_for(n, [&](std::size_t i) {
    hoods[i] = index.neighbors(index.row(i), k, false, static_cast<std::int64_t>(i));
    k_distance_[i] = hoods[i].back().distance;
  });

  lrd_.resize(n);
  parallel_for(n, [&](std::size_t i) {
    double reach = 0.0;
    for (const auto& nb : hoods[i]) reach += std::max(k_distance_[nb.index], nb.distance);
    lrd_[i] = 1.0 / (reach / static_cast<double>(k) + kLofDensityEpsilon);
  });
}

namespace {

template <typename T>
double lof_impl(const LofModel& model, std::span<const T> query) {
  const auto& index = model.index();
  if (query.size() != index.dim()) {
    throw Error(ErrorCode::DimMismatch,
                "query has dim " + std::to_string(query.size()) + ", index has dim " + std::to_string(index.dim()));
  }
  const auto unit = normalize(query);
  const auto hood = index.neighbors(unit, index.k());
  const auto kd = model.k_distances();
  const auto lrd = model.local_reachability();

  double reach = 0.0;
  double neighbour_lrd = 0.0;
  for (const auto& nb : hood) {
    reach += std::max(kd[nb.index], nb.distance);
    neighbour_lrd += lrd[nb.index];
  }
  const double k = static_cast<double>(hood.size());
  const double query_lrd = 1.0 / (reach / k + kLofDensityEpsilon);
  return (neighbour_lrd / k) / query_lrd;
}

}  // namespace

double lof_score(const LofModel& model, std::span<const float> query) { return lof_impl(model, query); }
double lof_score(const LofModel& model, std::span<const double> query) { return lof_impl(model, query); }

ScoreSeries lof_scores(const LofModel& model, const FeaturePack& queries) {
  if (queries.dim() != model.index().dim()) {
    throw Error(ErrorCode::DimMismatch, "queries have dim " + std::to_string(queries.dim()) + ", index has dim " +
                                            std::to_string(model.index().dim()));
  }
  std::vector<double> out(queries.rows());
  parallel_for(queries.rows(), [&](std::size_t i) { out[i] = lof_score(model, queries.row(i)); });
  return ScoreSeries(std::move(out));
}

}  // namespace flats
