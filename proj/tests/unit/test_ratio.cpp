#include <cmath>
#include <cstring>
#include <numbers>

#include "doctest.h"
#include "flats/metrics.hpp"
#include "flats/random.hpp"
#include "flats/ratio.hpp"
#include "flats/synth.hpp"
#include "test_support.hpp"

using namespace flats;
using flats::test::error_code_of;
using flats::test::series;

namespace {

FeaturePack random_pack(Rng& rng, std::size_t n, std::size_t m, double shift = 0.0) {
  std::vector<float> v(n * m);
  for (auto& x : v) x = static_cast<float>(rng.normal() + shift);
  return FeaturePack(n, m, std::move(v));
}

bool bitwise_equal(const ScoreSeries& a, const ScoreSeries& b) {
  return a.size() == b.size() && std::memcmp(a.values().data(), b.values().data(), a.size() * sizeof(double)) == 0;
}

}  // namespace

TEST_CASE("compose_score arithmetic") {
  CHECK(compose_score(1.0, 0.8, 0.5) == doctest::Approx(0.6).epsilon(1e-15));
  CHECK(compose_score(3.25, 123.0, 0.0) == 3.25);
  for (double a : {0.0, 0.1, 2.0, 100.0}) CHECK(compose_score(0.0, 0.0, a) == 0.0);
  CHECK(error_code_of([] { compose_score(NAN, 0.0, 0.5); }) == ErrorCode::NonFinite);
  CHECK(error_code_of([] { compose_score(0.0, 0.0, INFINITY); }) == ErrorCode::NonFinite);
  CHECK(error_code_of([] { compose_score(1e308, -1e308, 10.0); }) == ErrorCode::NonFinite);
}

TEST_CASE("FLatS on the unit circle: ind {0, 90}, aux {180}, query at 0 degrees") {
  const auto ind = build_knn_index(FeaturePack::from_rows({{1, 0}, {0, 1}}), 1);
  const auto aux = build_knn_index(FeaturePack::from_rows({{-1, 0}}), 1);
  const float q[] = {1.0f, 0.0f};
  CHECK(flats_score(ind, aux, q, 0.5) == -1.0);
}

TEST_CASE("a query inside the aux corpus scores above its mirror inside the IND corpus") {
  const auto ind = build_knn_index(FeaturePack::from_rows({{1, 0}, {1, 0.1}, {1, -0.1}}), 1);
  const auto aux = build_knn_index(FeaturePack::from_rows({{-1, 0}, {-1, 0.1}, {-1, -0.1}}), 1);
  const float in_aux[] = {-1.0f, 0.05f};
  const float in_ind[] = {1.0f, 0.05f};
  CHECK(flats_score(ind, aux, in_aux, 0.5) > flats_score(ind, aux, in_ind, 0.5));
}

TEST_CASE("alpha = 0 reduces FLatS to KNN bitwise") {
  Rng rng(12);
  const auto train = random_pack(rng, 200, 8);
  const auto aux = random_pack(rng, 150, 8, 1.0);
  const auto q = random_pack(rng, 100, 8, 0.5);
  const auto ind = build_knn_index(train, 10);
  const auto out = build_knn_index(aux, 10);
  CHECK(bitwise_equal(flats_scores(ind, out, q, 0.0), knn_scores(ind, q)));
}

TEST_CASE("setting 1") {
  const auto r = setting1_enhance(series({1, 2}), series({2, 2}), 0.5);
  CHECK(r.values()[0] == 0.0);
  CHECK(r.values()[1] == 1.0);
  CHECK(setting1_enhance(series({1, 2, 3}), series({7, 8, 9}), 0.0) == series({1, 2, 3}));
  CHECK(error_code_of([] { setting1_enhance(series({1}), series({1, 2}), 0.5); }) == ErrorCode::LengthMismatch);
}

TEST_CASE("a common constant aux score leaves AUROC unchanged") {
  Rng rng(13);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> ind(50), ood(60);
    for (auto& v : ind) v = rng.normal();
    for (auto& v : ood) v = rng.normal() + 0.7;
    const double c = rng.normal() * 10.0;
    const double alpha = rng.uniform(0.0, 2.0);
    const auto base = auroc(series(ind), series(ood));
    const auto enhanced = auroc(setting1_enhance(series(ind), series(std::vector<double>(50, c)), alpha),
                                setting1_enhance(series(ood), series(std::vector<double>(60, c)), alpha));
    CHECK(std::abs(base - enhanced) <= 1e-12);
  }
}

TEST_CASE("setting 2 grid") {
  Rng rng(14);
  const auto train = random_pack(rng, 120, 4);
  std::vector<std::int32_t> y(120);
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = static_cast<std::int32_t>(i % 3);
  const LabelPack labels(y);
  const auto aux = random_pack(rng, 100, 4, 2.0);
  const auto ind_test = random_pack(rng, 40, 4);
  const auto ood_test = random_pack(rng, 40, 4, 2.0);
  const double alpha = 0.5;

  const auto in_grid = setting2_grid(train, labels, aux, ind_test, 10, alpha);
  const auto out_grid = setting2_grid(train, labels, aux, ood_test, 10, alpha);
  constexpr auto U = static_cast<std::size_t>(EstimatorKind::Uniform);
  constexpr auto M = static_cast<std::size_t>(EstimatorKind::Maha);
  constexpr auto K = static_cast<std::size_t>(EstimatorKind::Knn);

  CHECK(auroc(in_grid[U][U], out_grid[U][U]) == 0.5);
  for (double v : in_grid[U][U]) CHECK(v == 0.0);

  const auto ind_index = build_knn_index(train, 10);
  const auto aux_index = build_knn_index(aux, 10);
  CHECK(in_grid[K][K] == flats_scores(ind_index, aux_index, ind_test, alpha));
  CHECK(out_grid[K][K] == flats_scores(ind_index, aux_index, ood_test, alpha));
  CHECK(in_grid[K][U] == knn_scores(ind_index, ind_test));

  const auto maha = fit_gaussian(train, labels);
  CHECK(in_grid[M][U] == maha_scores(maha, ind_test));
  const auto aux_maha = fit_gaussian_unlabeled(aux);
  const auto e_out = maha_scores(aux_maha, ind_test);
  for (std::size_t i = 0; i < ind_test.rows(); ++i) CHECK(in_grid[U][M][i] == compose_score(0.0, e_out[i], alpha));
}

TEST_CASE("estimator names and kinds") {
  CHECK(estimator_name(EstimatorKind::Uniform) == "uniform");
  CHECK(estimator_name(EstimatorKind::Maha) == "maha");
  CHECK(estimator_name(EstimatorKind::Knn) == "knn");
  CHECK(Estimator::uniform().kind() == EstimatorKind::Uniform);
  const auto x = FeaturePack::from_rows({{1, 0}, {0, 1}});
  CHECK(Estimator::knn(build_knn_index(x, 1)).kind() == EstimatorKind::Knn);
}

TEST_CASE("with exact energies and alpha = 1 the composed score ranks like the true ratio") {
  const auto in = GaussianSpec::isotropic(2, 0.0, 1.0);
  const auto out = GaussianSpec::isotropic(2, 1.0, 0.5);
  const auto xi = sample(in, 500, 1);
  const auto xo = sample(out, 500, 2);
  auto score = [&](const FeaturePack& x, bool lr) {
    std::vector<double> s(x.rows());
    for (std::size_t i = 0; i < x.rows(); ++i) {
      const std::vector<double> z(x.row(i).begin(), x.row(i).end());
      s[i] = lr ? analytic_lr_score(in, out, z) : compose_score(-in.log_density(z), -out.log_density(z), 1.0);
    }
    return series(s);
  };
  CHECK(auroc(score(xi, false), score(xo, false)) == auroc(score(xi, true), score(xo, true)));
}
