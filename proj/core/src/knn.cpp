#include "flats/knn.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <utility>

#include "flats/error.hpp"
#include "flats/parallel.hpp"

namespace flats {

namespace {

template <typename T>
std::vector<double> normalize_impl(std::span<const T> z) {
  double sq = 0.0;
  for (T v : z) sq += static_cast<double>(v) * static_cast<double>(v);
  const double norm = std::sqrt(sq);
  if (!(norm > 0.0)) {
    throw Error(ErrorCode::ZeroVector, "cannot normalize a zero vector");
  }
  std::vector<double> out(z.size());
  for (std::size_t i = 0; i < z.size(); ++i) out[i] = static_cast<double>(z[i]) / norm;
  return out;
}

double squared_distance(const double* a, const double* b, std::size_t m) {
  double s = 0.0;
  for (std::size_t j = 0; j < m; ++j) {
    const double d = a[j] - b[j];
    s += d * d;
  }
  return s;
}

using Candidate = std::pair<double, std::uint32_t>;  // (squared distance, row)

void check_dim(const KnnIndex& index, std::size_t got) {
  if (got != index.dim()) {
    throw Error(ErrorCode::DimMismatch,
                "query has dim " + std::to_string(got) + ", index has dim " + std::to_string(index.dim()));
  }
}

}  // namespace

std::vector<double> normalize(std::span<const float> z) { return normalize_impl(z); }
std::vector<double> normalize(std::span<const double> z) { return normalize_impl(z); }

KnnIndex::KnnIndex(const FeaturePack& features, std::size_t k)
    : n_ref_(features.rows()), dim_(features.dim()), k_(k) {
  if (k_ == 0 || k_ > n_ref_) {
    throw Error(ErrorCode::KTooLarge,
                "k = " + std::to_string(k_) + " must lie in [1, " + std::to_string(n_ref_) + "]");
  }
  reference_.reserve(n_ref_ * dim_);
  for (std::size_t i = 0; i < n_ref_; ++i) {
    try {
      auto unit = normalize(features.row(i));
      reference_.insert(reference_.end(), unit.begin(), unit.end());
    } catch (const Error&) {
      throw Error(ErrorCode::ZeroVector, "reference row " + std::to_string(i) + " has zero norm");
    }
  }
}

std::vector<Neighbor> KnnIndex::neighbors(std::span<const double> unit_query, std::size_t count, bool exclude_self,
                                          std::int64_t skip_row) const {
  thread_local std::vector<Candidate> cand;
  cand.clear();
  cand.reserve(n_ref_);
  const double* ref = reference_.data();
  for (std::size_t i = 0; i < n_ref_; ++i, ref += dim_) {
    if (static_cast<std::int64_t>(i) == skip_row) continue;
    cand.emplace_back(squared_distance(unit_query.data(), ref, dim_), static_cast<std::uint32_t>(i));
  }

  auto first = cand.begin();
  if (exclude_self && !cand.empty()) {
    auto nearest = std::min_element(cand.begin(), cand.end());
    if (std::sqrt(nearest->first) < kSelfMatchDistance) {
      std::iter_swap(cand.begin(), nearest);
      ++first;
    }
  }
  const auto available = static_cast<std::size_t>(cand.end() - first);
  if (count == 0 || count > available) {
    throw Error(ErrorCode::KTooLarge, "requested " + std::to_string(count) + " neighbours but only " +
                                          std::to_string(available) + " reference rows are eligible");
  }

  // Lexicographic (distance, row) order makes the k-th element unique.
  std::nth_element(first, first + static_cast<std::ptrdiff_t>(count - 1), cand.end());
  std::sort(first, first + static_cast<std::ptrdiff_t>(count - 1));

  std::vector<Neighbor> out(count);
  for (std::size_t j = 0; j < count; ++j) {
    out[j] = {first[static_cast<std::ptrdiff_t>(j)].second, std::sqrt(first[static_cast<std::ptrdiff_t>(j)].first)};
  }
  return out;
}

KnnIndex build_knn_index(const FeaturePack& features, std::size_t k) { return KnnIndex(features, k); }

double knn_score(const KnnIndex& index, std::span<const double> query, bool exclude_self) {
  check_dim(index, query.size());
  const auto unit = normalize(query);
  return index.neighbors(unit, index.k(), exclude_self).back().distance;
}

double knn_score(const KnnIndex& index, std::span<const float> query, bool exclude_self) {
  check_dim(index, query.size());
  const auto unit = normalize(query);
  return index.neighbors(unit, index.k(), exclude_self).back().distance;
}

ScoreSeries knn_scores(const KnnIndex& index, const FeaturePack& queries, bool exclude_self) {
  check_dim(index, queries.dim());
  std::vector<double> out(queries.rows());
  parallel_for(queries.rows(), [&](std::size_t i) { out[i] = knn_score(index, queries.row(i), exclude_self); });
  return ScoreSeries(std::move(out));
}

double knn_density_log_constant(std::size_t k, std::size_t n, std::size_t m) {
  if (m < 2) {
    throw Error(ErrorCode::InvalidArgument, "k-NN density needs m >= 2, got " + std::to_string(m));
  }
  const double half = (static_cast<double>(m) - 1.0) / 2.0;
  return std::log(static_cast<double>(k)) + std::lgamma(half + 1.0) - half * std::log(std::numbers::pi) -
         std::log(static_cast<double>(n));
}

namespace {

template <typename T>
double log_density_impl(const KnnIndex& index, std::span<const T> query) {
  // Validate m before searching so a 1-D index reports the right error.
  const double log_c = knn_density_log_constant(index.k(), index.n_ref(), index.dim());
  const double r = knn_score(index, query);
  if (r == 0.0) {
    throw Error(ErrorCode::DegenerateRadius, "k-th neighbour distance is 0; density undefined");
  }
  return log_c - (static_cast<double>(index.dim()) - 1.0) * std::log(r);
}

template <typename T>
double density_impl(const KnnIndex& index, std::span<const T> query) {
  const double log_c = knn_density_log_constant(index.k(), index.n_ref(), index.dim());
  const double r = knn_score(index, query);
  if (r == 0.0) {
    throw Error(ErrorCode::DegenerateRadius, "k-th neighbour distance is 0; density undefined");
  }
  return std::exp(log_c) / std::pow(r, static_cast<double>(index.dim()) - 1.0);
}

}  // namespace

double knn_density(const KnnIndex& index, std::span<const float> query) { return density_impl(index, query); }
double knn_density(const KnnIndex& index, std::span<const double> query) { return density_impl(index, query); }
double knn_log_density(const KnnIndex& index, std::span<const float> query) {
  return log_density_impl(index, query);
}
double knn_log_density(const KnnIndex& index, std::span<const double> query) {
  return log_density_impl(index, query);
}

}  // namespace flats
