#include "flats/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "flats/error.hpp"
#include "flats/knn.hpp"
#include "flats/metrics.hpp"
#include "flats/random.hpp"

namespace flats {

namespace {

constexpr double kLog2Pi = 1.8378770664093454835606594728112;

void check_same_dim(std::size_t a, std::size_t b) {
  if (a != b) {
    throw Error(ErrorCode::DimMismatch, "dims differ: " + std::to_string(a) + " vs " + std::to_string(b));
  }
}

std::vector<double> as_double(std::span<const float> row) { return {row.begin(), row.end()}; }

ScoreSeries score_rows(const FeaturePack& pack, const Scorer& scorer) {
  std::vector<double> out(pack.rows());
  for (std::size_t i = 0; i < pack.rows(); ++i) {
    const auto x = as_double(pack.row(i));
    out[i] = scorer(x);
  }
  return ScoreSeries(std::move(out));
}

}  // namespace

// ---- GaussianSpec ----------------------------------------------------------

GaussianSpec::GaussianSpec(std::vector<double> mean, std::vector<double> stddev)
    : mean_(std::move(mean)), stddev_(std::move(stddev)) {
  if (mean_.empty() || mean_.size() != stddev_.size()) {
    throw Error(ErrorCode::InvalidArgument, "mean and stddev must be non-empty and equally long");
  }
  for (std::size_t j = 0; j < mean_.size(); ++j) {
    if (!std::isfinite(mean_[j]) || !std::isfinite(stddev_[j]) || !(stddev_[j] > 0.0)) {
      throw Error(ErrorCode::InvalidArgument, "axis " + std::to_string(j) + ": need finite mean and stddev > 0");
    }
  }
}

GaussianSpec GaussianSpec::isotropic(std::size_t dim, double mean, double stddev) {
  return GaussianSpec(std::vector<double>(dim, mean), std::vector<double>(dim, stddev));
}

double GaussianSpec::log_density(std::span<const double> x) const {
  check_same_dim(x.size(), dim());
  double s = 0.0;
  for (std::size_t j = 0; j < dim(); ++j) {
    const double z = (x[j] - mean_[j]) / stddev_[j];
    s += -0.5 * z * z - std::log(stddev_[j]) - 0.5 * kLog2Pi;
  }
  return s;
}

GaussianSpec toy_in_spec() { return GaussianSpec({0.0}, {1.0}); }
GaussianSpec toy_out_spec() { return GaussianSpec({0.0}, {0.1}); }

void SynthRun::validate() const {
  if (n_per_side < kMinPerSide) {
    throw Error(ErrorCode::InvalidArgument, "n_per_side = " + std::to_string(n_per_side) + " is below the minimum " +
                                                std::to_string(kMinPerSide));
  }
  check_same_dim(in_spec.dim(), out_spec.dim());
}

// ---- sampling and the analytic ratio ----------------------------------------

FeaturePack sample(const GaussianSpec& spec, std::size_t n, std::uint64_t seed) {
  if (n == 0) {
    throw Error(ErrorCode::InvalidArgument, "sample size must be >= 1");
  }
  Rng rng(seed);
  std::vector<float> values(n * spec.dim());
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < spec.dim(); ++j) {
      values[i * spec.dim() + j] = static_cast<float>(spec.mean()[j] + spec.stddev()[j] * rng.normal());
    }
  }
  return FeaturePack(n, spec.dim(), std::move(values));
}

double analytic_lr_score(const GaussianSpec& in_spec, const GaussianSpec& out_spec, std::span<const double> x) {
  check_same_dim(in_spec.dim(), out_spec.dim());
  check_same_dim(x.size(), in_spec.dim());
  // The 2 pi terms cancel axis by axis.
  double s = 0.0;
  for (std::size_t j = 0; j < x.size(); ++j) {
    const double zi = (x[j] - in_spec.mean()[j]) / in_spec.stddev()[j];
    const double zo = (x[j] - out_spec.mean()[j]) / out_spec.stddev()[j];
    s += std::log(in_spec.stddev()[j] / out_spec.stddev()[j]) + 0.5 * (zi * zi - zo * zo);
  }
  return s;
}

UmpCheck ump_auroc_check(const SynthRun& run, const Scorer& candidate) {
  run.validate();
  const auto ind = sample(run.in_spec, run.n_per_side, Rng::for_stream(run.seed, 0).next());
  const auto ood = sample(run.out_spec, run.n_per_side, Rng::for_stream(run.seed, 1).next());
  const Scorer lr = [&](std::span<const double> x) { return analytic_lr_score(run.in_spec, run.out_spec, x); };
  return {auroc(score_rows(ind, candidate), score_rows(ood, candidate)), auroc(score_rows(ind, lr), score_rows(ood, lr))};
}

std::vector<DominanceCase> ump_dominance_suite(std::uint64_t seed, std::size_t n_pairs, std::size_t n_per_side) {
  std::vector<DominanceCase> cases;
  Rng meta = Rng::for_stream(seed, 100);
  for (std::size_t p = 0; p < n_pairs; ++p) {
    const std::size_t dim = 1 + meta.below(4);
    std::vector<double> mi(dim), si(dim), mo(dim), so(dim), w(dim);
    for (std::size_t j = 0; j < dim; ++j) {
      mi[j] = meta.normal();
      mo[j] = meta.normal();
      si[j] = meta.uniform(0.3, 2.0);
      so[j] = meta.uniform(0.3, 2.0);
      w[j] = meta.normal();
    }
    SynthRun run;
    run.seed = meta.next();
    run.n_per_side = n_per_side;
    run.in_spec = GaussianSpec(mi, si);
    run.out_spec = GaussianSpec(mo, so);

    const GaussianSpec in = run.in_spec;
    const GaussianSpec out = run.out_spec;
    const std::vector<std::pair<std::string, Scorer>> candidates{
        {"neg_ind_density", [in](std::span<const double> x) { return -in.log_density(x); }},
        {"ood_density", [out](std::span<const double> x) { return out.log_density(x); }},
        {"random_projection",
         [w](std::span<const double> x) {
           double s = 0.0;
           for (std::size_t j = 0; j < x.size(); ++j) s += w[j] * x[j];
           return s;
         }},
    };
    for (const auto& [name, scorer] : candidates) {
      const auto r = ump_auroc_check(run, scorer);
      cases.push_back({p, name, r.auroc_candidate, r.auroc_lr});
    }
  }
  return cases;
}

// ---- oracles ---------------------------------------------------------------

double brute_force_knn(const FeaturePack& reference, std::span<const float> query, std::size_t k) {
  if (k == 0 || k > reference.rows()) {
    throw Error(ErrorCode::KTooLarge, "k = " + std::to_string(k) + " with " + std::to_string(reference.rows()) +
                                          " reference rows");
  }
  check_same_dim(query.size(), reference.dim());
  auto unit = [](std::span<const float> v) {
    double sq = 0.0;
    for (float x : v) sq += static_cast<double>(x) * static_cast<double>(x);
    const double norm = std::sqrt(sq);
    if (!(norm > 0.0)) throw Error(ErrorCode::ZeroVector, "zero vector in brute_force_knn");
    std::vector<double> out;
    out.reserve(v.size());
    for (float x : v) out.push_back(static_cast<double>(x) / norm);
    return out;
  };
  const auto q = unit(query);
  std::vector<double> dist;
  dist.reserve(reference.rows());
  for (std::size_t i = 0; i < reference.rows(); ++i) {
    const auto r = unit(reference.row(i));
    double s = 0.0;
    for (std::size_t j = 0; j < q.size(); ++j) s += (q[j] - r[j]) * (q[j] - r[j]);
    dist.push_back(std::sqrt(s));
  }
  std::sort(dist.begin(), dist.end());
  return dist[k - 1];
}

FeaturePack sample_unit_circle(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<float> values(2 * n);
  for (std::size_t i = 0; i < n; ++i) {
    const double a = 2.0 * std::numbers::pi * rng.uniform();
    values[2 * i] = static_cast<float>(std::cos(a));
    values[2 * i + 1] = static_cast<float>(std::sin(a));
  }
  return FeaturePack(n, 2, std::move(values));
}

std::vector<DensityPoint> knn_density_consistency(std::uint64_t seed, std::size_t k, std::span<const std::size_t> ns,
                                                  std::size_t n_queries) {
  const double truth = 1.0 / (2.0 * std::numbers::pi);
  std::vector<DensityPoint> out;
  for (std::size_t t = 0; t < ns.size(); ++t) {
    const auto refs = sample_unit_circle(ns[t], Rng::for_stream(seed, 2 * t).next());
    const auto queries = sample_unit_circle(n_queries, Rng::for_stream(seed, 2 * t + 1).next());
    const KnnIndex index(refs, k);
    double sum = 0.0;
    for (std::size_t q = 0; q < queries.rows(); ++q) sum += knn_density(index, queries.row(q));
    const double mean = sum / static_cast<double>(queries.rows());
    out.push_back({ns[t], mean, std::abs(mean - truth) / truth});
  }
  return out;
}

// ---- nested benchmark --------------------------------------------------------

NestedBenchmark nested_circle_benchmark(std::uint64_t seed, NestedBenchmarkSizes sizes) {
  constexpr double kIndSpread = 1.0;
  constexpr double kOodSpread = 0.1;

  struct Drawn {
    std::vector<float> features;
    std::vector<float> logits;
    std::vector<std::int32_t> labels;
  };
  auto draw = [](std::size_t n, double spread, std::uint64_t stream_seed) {
    Rng rng(stream_seed);
    Drawn d;
    d.features.reserve(2 * n);
    d.logits.reserve(2 * n);
    d.labels.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double angle = spread * rng.normal();
      const double radius = rng.uniform(0.5, 2.0);
      d.features.push_back(static_cast<float>(radius * std::cos(angle)));
      d.features.push_back(static_cast<float>(radius * std::sin(angle)));
      d.logits.push_back(static_cast<float>(3.0 * std::cos(angle + 0.5)));
      d.logits.push_back(static_cast<float>(3.0 * std::cos(angle - 0.5)));
      d.labels.push_back(angle < 0.0 ? 0 : 1);
    }
    return d;
  };

  auto train = draw(sizes.ind_train, kIndSpread, Rng::for_stream(seed, 10).next());
  auto aux = draw(sizes.aux, kOodSpread, Rng::for_stream(seed, 11).next());
  auto ind_test = draw(sizes.ind_test, kIndSpread, Rng::for_stream(seed, 12).next());
  auto ood_test = draw(sizes.ood_test, kOodSpread, Rng::for_stream(seed, 13).next());

  return NestedBenchmark{
      FeaturePack(sizes.ind_train, 2, std::move(train.features)),
      LabelPack(std::move(train.labels), 2),
      FeaturePack(sizes.aux, 2, std::move(aux.features)),
      FeaturePack(sizes.ind_test, 2, std::move(ind_test.features)),
      FeaturePack(sizes.ood_test, 2, std::move(ood_test.features)),
      LogitPack(sizes.ind_test, 2, std::move(ind_test.logits)),
      LogitPack(sizes.ood_test, 2, std::move(ood_test.logits)),
  };
}

}  // namespace flats
