#include <cmath>
#include <numbers>

#include "doctest.h"
#include "flats/gaussian.hpp"
#include "flats/random.hpp"
#include "test_support.hpp"

using namespace flats;
using flats::test::error_code_of;

namespace {

FeaturePack random_pack(Rng& rng, std::size_t n, std::size_t m, double scale) {
  std::vector<float> v(n * m);
  for (auto& x : v) x = static_cast<float>(rng.normal() * scale);
  return FeaturePack(n, m, std::move(v));
}

std::vector<std::int32_t> cycling_labels(std::size_t n, std::int32_t k) {
  std::vector<std::int32_t> y(n);
  for (std::size_t i = 0; i < n; ++i) y[i] = static_cast<std::int32_t>(i % static_cast<std::size_t>(k));
  return y;
}

}  // namespace

TEST_CASE("two-class fixture: means, pooled covariance and one Mahalanobis value") {
  const auto x = FeaturePack::from_rows({{0, 0}, {2, 0}, {0, 2}, {0, 4}});
  const LabelPack y({0, 0, 1, 1});
  const auto model = fit_gaussian(x, y, 0.0);

  CHECK(model.means()(0, 0) == 1.0);
  CHECK(model.means()(0, 1) == 0.0);
  CHECK(model.means()(1, 0) == 0.0);
  CHECK(model.means()(1, 1) == 3.0);
  CHECK(model.covariance()(0, 0) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(model.covariance()(1, 1) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(model.covariance()(0, 1) == 0.0);

  const double q[] = {1.0, 1.0};
  CHECK(maha_score(model, std::span<const double>(q)) == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("ridge is proportional to the covariance trace") {
  const auto x = FeaturePack::from_rows({{0, 0}, {2, 0}, {0, 2}, {0, 4}});
  const auto model = fit_gaussian(x, LabelPack({0, 0, 1, 1}), 0.1);
  // trace/m = 0.5, so each diagonal entry gains 0.05.
  CHECK(model.covariance()(0, 0) == doctest::Approx(0.55).epsilon(1e-14));
}

TEST_CASE("singular covariance without ridge") {
  const auto x = FeaturePack::from_rows({{1, 1}, {2, 2}, {3, 3}, {4, 4}});
  const LabelPack y({0, 0, 1, 1});
  CHECK(error_code_of([&] { fit_gaussian(x, y, 0.0); }) == ErrorCode::SingularCovariance);
  CHECK_NOTHROW(fit_gaussian(x, y, kDefaultRidge));
}

TEST_CASE("label count must match rows") {
  const auto x = FeaturePack::from_rows({{0, 0}, {2, 0}, {0, 2}});
  CHECK(error_code_of([&] { fit_gaussian(x, LabelPack({0, 0, 1, 1}), 0.0); }) == ErrorCode::SizeMismatch);
}

TEST_CASE("query dimension is checked") {
  const auto x = FeaturePack::from_rows({{0, 0}, {2, 0}, {0, 2}, {0, 4}});
  const auto model = fit_gaussian(x, LabelPack({0, 0, 1, 1}), 0.0);
  const double q[] = {1.0, 1.0, 1.0};
  CHECK(error_code_of([&] { maha_score(model, std::span<const double>(q)); }) == ErrorCode::DimMismatch);
}

TEST_CASE("one-dimensional standard normal log-likelihood") {
  // Large symmetric sample whose mean is exactly 0 and variance exactly 1.
  const FeaturePack x(4, 1, {-1.0f, 1.0f, -1.0f, 1.0f});
  const auto model = fit_gaussian_unlabeled(x, 0.0);
  const double one[] = {1.0};
  const double zero[] = {0.0};
  const double ln2pi = std::log(2.0 * std::numbers::pi);
  CHECK(gaussian_max_loglik(model, std::span<const double>(one)) == doctest::Approx(-0.5 - 0.5 * ln2pi).epsilon(1e-14));
  CHECK(gaussian_max_loglik(model, std::span<const double>(zero)) == doctest::Approx(-0.5 * ln2pi).epsilon(1e-14));
}

TEST_CASE("2-D standard normal at its mode has log-likelihood -ln 2 pi") {
  const auto x = FeaturePack::from_rows({{1, 0}, {-1, 0}, {0, 1}, {0, -1}, {1, 0}, {-1, 0}, {0, 1}, {0, -1}});
  // Per-axis variance is 0.5, so rescale the fixture to unit variance.
  std::vector<float> v(x.values().begin(), x.values().end());
  for (auto& e : v) e *= static_cast<float>(std::sqrt(2.0));
  const auto model = fit_gaussian_unlabeled(FeaturePack(8, 2, v), 0.0);
  const double mode[] = {0.0, 0.0};
  CHECK(gaussian_max_loglik(model, std::span<const double>(mode)) ==
        doctest::Approx(-std::log(2.0 * std::numbers::pi)).epsilon(1e-6));
}

TEST_CASE("Mahalanobis and log-likelihood identity over random models") {
  Rng rng(11);
  const double ln2pi = std::log(2.0 * std::numbers::pi);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t m = 2 + rng.below(6);
    const auto k = static_cast<std::int32_t>(1 + rng.below(3));
    const auto x = random_pack(rng, 60, m, 1.0 + rng.uniform());
    const auto model = fit_gaussian(x, cycling_labels(60, k), static_cast<std::size_t>(k), kDefaultRidge);
    for (int q = 0; q < 20; ++q) {
      std::vector<double> z(m);
      for (auto& e : z) e = rng.normal() * 2.0;
      const double lhs = maha_score(model, std::span<const double>(z));
      const double rhs = -2.0 * gaussian_max_loglik(model, std::span<const double>(z)) -
                         static_cast<double>(m) * ln2pi - model.log_det_covariance();
      CHECK(std::abs(lhs - rhs) <= 1e-8);
    }
  }
}

TEST_CASE("Mahalanobis score is invariant under invertible affine maps") {
  Rng rng(5);
  for (int trial = 0; trial < 10; ++trial) {
    const std::size_t m = 3;
    const auto x = random_pack(rng, 50, m, 1.0);
    const auto y = cycling_labels(50, 2);
    Eigen::Matrix3d a;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) a(i, j) = rng.normal();
    a += 3.0 * Eigen::Matrix3d::Identity();
    const Eigen::Vector3d b(rng.normal(), rng.normal(), rng.normal());

    std::vector<float> mapped;
    for (std::size_t r = 0; r < x.rows(); ++r) {
      Eigen::Vector3d v(x.row(r)[0], x.row(r)[1], x.row(r)[2]);
      const Eigen::Vector3d w = a * v + b;
      for (int i = 0; i < 3; ++i) mapped.push_back(static_cast<float>(w(i)));
    }
    // Float32 storage of the mapped data limits agreement to ~1e-5 relative.
    const auto plain = fit_gaussian(x, y, 2, 0.0);
    const auto moved = fit_gaussian(FeaturePack(50, 3, mapped), y, 2, 0.0);
    for (int q = 0; q < 10; ++q) {
      const Eigen::Vector3d z(rng.normal(), rng.normal(), rng.normal());
      const Eigen::Vector3d zw = a * z + b;
      const double s0 = maha_score(plain, std::span<const double>(z.data(), 3));
      const double s1 = maha_score(moved, std::span<const double>(zw.data(), 3));
      CHECK(s1 == doctest::Approx(s0).epsilon(1e-3));
    }
  }
}

TEST_CASE("batch scoring matches per-row scoring") {
  Rng rng(3);
  const auto x = random_pack(rng, 40, 4, 1.0);
  const auto model = fit_gaussian(x, cycling_labels(40, 2), 2, kDefaultRidge);
  const auto q = random_pack(rng, 15, 4, 1.5);
  const auto batch = maha_scores(model, q);
  for (std::size_t i = 0; i < q.rows(); ++i) CHECK(batch[i] == maha_score(model, q.row(i)));
}

TEST_CASE("score is the minimum over class means") {
  const auto x = FeaturePack::from_rows({{-5, 0}, {-5, 2}, {5, 0}, {5, 2}});
  const auto model = fit_gaussian(x, LabelPack({0, 0, 1, 1}), kDefaultRidge);
  const double near0[] = {-5.0, 1.0};
  const double near1[] = {5.0, 1.0};
  const double far[] = {0.0, 1.0};
  CHECK(maha_score(model, std::span<const double>(near0)) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(maha_score(model, std::span<const double>(near1)) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(maha_score(model, std::span<const double>(far)) > 1e3);
}
