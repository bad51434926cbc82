#include "flats/gaussian.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>

#include "flats/error.hpp"
#include "flats/parallel.hpp"

namespace flats {

namespace {

template <typename T>
Eigen::VectorXd to_vector(std::span<const T> v) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) out[static_cast<Eigen::Index>(i)] = static_cast<double>(v[i]);
  return out;
}

void check_dim(const GaussianModel& model, std::size_t got) {
  if (got != model.dim()) {
    throw Error(ErrorCode::DimMismatch,
                "query has dim " + std::to_string(got) + ", model has dim " + std::to_string(model.dim()));
  }
}

}  // namespace

Eigen::VectorXd GaussianModel::whiten(const Eigen::VectorXd& x) const {
  return factor_.matrixL().solve(x);
}

GaussianModel fit_gaussian(const FeaturePack& features, std::span<const std::int32_t> labels, std::size_t n_classes,
                           double ridge) {
  if (!(ridge >= 0.0) || !std::isfinite(ridge)) {
    throw Error(ErrorCode::InvalidArgument, "ridge must be finite and >= 0, got " + std::to_string(ridge));
  }
  if (labels.size() != features.rows()) {
    throw Error(ErrorCode::SizeMismatch, "labels have " + std::to_string(labels.size()) + " rows, features have " +
                                             std::to_string(features.rows()));
  }
  const auto n = static_cast<Eigen::Index>(features.rows());
  const auto m = static_cast<Eigen::Index>(features.dim());
  const auto K = static_cast<Eigen::Index>(n_classes);

  std::vector<std::size_t> counts(n_classes, 0);
  for (auto l : labels) {
    if (l < 0 || static_cast<std::size_t>(l) >= n_classes) {
      throw Error(ErrorCode::InvalidLabel, "class id " + std::to_string(l) + " outside [0, " +
                                               std::to_string(n_classes) + ")");
    }
    ++counts[static_cast<std::size_t>(l)];
  }
  for (std::size_t c = 0; c < n_classes; ++c) {
    if (counts[c] < 2) {
      throw Error(ErrorCode::ClassTooSmall,
                  "class " + std::to_string(c) + " has " + std::to_string(counts[c]) + " samples; need >= 2");
    }
  }

  Eigen::MatrixXd x(n, m);
  for (Eigen::Index i = 0; i < n; ++i) {
    auto row = features.row(static_cast<std::size_t>(i));
    for (Eigen::Index j = 0; j < m; ++j) x(i, j) = row[static_cast<std::size_t>(j)];
  }

  GaussianModel model;
  model.means_ = Eigen::MatrixXd::Zero(K, m);
  for (Eigen::Index i = 0; i < n; ++i) model.means_.row(labels[i]) += x.row(i);
  for (Eigen::Index c = 0; c < K; ++c) model.means_.row(c) /= static_cast<double>(counts[c]);

  for (Eigen::Index i = 0; i < n; ++i) x.row(i) -= model.means_.row(labels[i]);
  Eigen::MatrixXd cov = (x.transpose() * x) / static_cast<double>(n);
  cov = 0.5 * (cov + cov.transpose());
  if (ridge > 0.0) {
    cov.diagonal().array() += ridge * cov.trace() / static_cast<double>(m);
  }
  model.covariance_ = cov;

  model.factor_.compute(model.covariance_);
  bool ok = model.factor_.info() == Eigen::Success;
  if (ok) {
    const auto& l = model.factor_.matrixLLT();
    for (Eigen::Index j = 0; j < m && ok; ++j) ok = std::isfinite(l(j, j)) && l(j, j) > 0.0;
  }
  if (!ok) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(model.covariance_, Eigen::EigenvaluesOnly);
    throw Error(ErrorCode::SingularCovariance,
                "covariance is not positive definite (smallest eigenvalue estimate " +
                    std::to_string(eig.eigenvalues().minCoeff()) + " at ridge " + std::to_string(ridge) + ")");
  }

  model.log_det_ = 2.0 * model.factor_.matrixLLT().diagonal().array().log().sum();

  model.whitened_means_.resize(K, m);
  for (Eigen::Index c = 0; c < K; ++c) {
    model.whitened_means_.row(c) = model.whiten(model.means_.row(c).transpose()).transpose();
  }
  return model;
}

GaussianModel fit_gaussian(const FeaturePack& features, const LabelPack& labels, double ridge) {
  return fit_gaussian(features, labels.labels(), labels.n_classes(), ridge);
}

GaussianModel fit_gaussian_unlabeled(const FeaturePack& features, double ridge) {
  std::vector<std::int32_t> labels(features.rows(), 0);
  return fit_gaussian(features, labels, 1, ridge);
}

double maha_score(const GaussianModel& model, std::span<const double> query) {
  check_dim(model, query.size());
  const Eigen::VectorXd y = model.whiten(to_vector(query));
  double best = std::numeric_limits<double>::infinity();
  for (Eigen::Index c = 0; c < model.whitened_means_.rows(); ++c) {
    best = std::min(best, (y - model.whitened_means_.row(c).transpose()).squaredNorm());
  }
  return best;
}

double maha_score(const GaussianModel& model, std::span<const float> query) {
  check_dim(model, query.size());
  std::vector<double> q(query.begin(), query.end());
  return maha_score(model, std::span<const double>(q));
}

double gaussian_max_loglik(const GaussianModel& model, std::span<const double> query) {
  const double m = static_cast<double>(model.dim());
  return -0.5 * maha_score(model, query) - 0.5 * m * std::log(2.0 * std::numbers::pi) -
         0.5 * model.log_det_covariance();
}

double gaussian_max_loglik(const GaussianModel& model, std::span<const float> query) {
  std::vector<double> q(query.begin(), query.end());
  return gaussian_max_loglik(model, std::span<const double>(q));
}

ScoreSeries maha_scores(const GaussianModel& model, const FeaturePack& queries) {
  check_dim(model, queries.dim());
  std::vector<double> out(queries.rows());
  parallel_for(queries.rows(), [&](std::size_t i) { out[i] = maha_score(model, queries.row(i)); });
  return ScoreSeries(std::move(out));
}

}  // namespace flats
