#pragma once

#include <cstddef>
#include <span>

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include "flats/feature_pack.hpp"
#include "flats/score_series.hpp"

namespace flats {

/// Ridge added to the pooled covariance, as a multiple of trace(S)/m.
inline constexpr double kDefaultRidge = 1e-6;

/**
 * Class-conditional Gaussians with one shared covariance.
 *
 * `means()` is K x m (one centroid per row). The covariance is the pooled
 * within-class scatter divided by n, plus ridge * trace / m on the diagonal,
 * and is held together with its Cholesky factor L (covariance = L L^T).
 * Immutable once fitted.
 */
class GaussianModel {
 public:
  std::size_t dim() const noexcept { return static_cast<std::size_t>(means_.cols()); }
  std::size_t n_classes() const noexcept { return static_cast<std::size_t>(means_.rows()); }

  const Eigen::MatrixXd& means() const noexcept { return means_; }
  const Eigen::MatrixXd& covariance() const noexcept { return covariance_; }
  /// Lower-triangular Cholesky factor of the covariance.
  Eigen::MatrixXd precision_factor() const { return factor_.matrixL(); }
  double log_det_covariance() const noexcept { return log_det_; }

  /// L^{-1} x: the whitened coordinates of x.
  Eigen::VectorXd whiten(const Eigen::VectorXd& x) const;

 private:
  friend GaussianModel fit_gaussian(const FeaturePack&, std::span<const std::int32_t>, std::size_t, double);

  Eigen::MatrixXd means_;
  Eigen::MatrixXd covariance_;
  Eigen::LLT<Eigen::MatrixXd> factor_;
  Eigen::MatrixXd whitened_means_;  // K x m, row c = (L^{-1} mu_c)^T
  double log_det_ = 0.0;

  friend double maha_score(const GaussianModel&, std::span<const double>);
};

/// Errors: SizeMismatch (row counts differ), ClassTooSmall, SingularCovariance
/// (message carries the smallest eigenvalue of the regularized covariance),
/// InvalidArgument (negative ridge).
GaussianModel fit_gaussian(const FeaturePack& features, const LabelPack& labels, double ridge = kDefaultRidge);

/// One pseudo-class centred on the sample mean; used for unlabeled corpora.
GaussianModel fit_gaussian_unlabeled(const FeaturePack& features, double ridge = kDefaultRidge);

/// Core fitting routine over raw class ids in [0, n_classes).
GaussianModel fit_gaussian(const FeaturePack& features, std::span<const std::int32_t> labels, std::size_t n_classes,
                           double ridge);

/// min_c (z - mu_c)^T Sigma^{-1} (z - mu_c), via triangular solves. >= 0.
double maha_score(const GaussianModel& model, std::span<const double> query);
double maha_score(const GaussianModel& model, std::span<const float> query);

/// max_c ln N(z; mu_c, Sigma) = -maha/2 - m ln(2 pi)/2 - ln det(Sigma)/2.
double gaussian_max_loglik(const GaussianModel& model, std::span<const double> query);
double gaussian_max_loglik(const GaussianModel& model, std::span<const float> query);

/// Batch form, parallel over rows, output in row order.
ScoreSeries maha_scores(const GaussianModel& model, const FeaturePack& queries);

}  // namespace flats
