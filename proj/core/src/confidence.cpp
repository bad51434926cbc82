#include "flats/confidence.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "flats/error.hpp"

namespace flats {

namespace {

void check_logits(std::span<const float> logits) {
  if (logits.empty()) {
    throw Error(ErrorCode::InvalidArgument, "empty logit vector");
  }
  for (std::size_t i = 0; i < logits.size(); ++i) {
    if (!std::isfinite(logits[i])) {
      throw Error(ErrorCode::NonFinite, "logit " + std::to_string(i) + " is not finite");
    }
  }
}

double max_logit(std::span<const float> logits) {
  return static_cast<double>(*std::max_element(logits.begin(), logits.end()));
}

// Largest softmax probability of logits / t: exp(0) / sum_c exp((l_c - max) / t).
double max_softmax(std::span<const float> logits, double t) {
  const double top = max_logit(logits);
  double denom = 0.0;
  for (float l : logits) denom += std::exp((static_cast<double>(l) - top) / t);
  return 1.0 / denom;
}

}  // namespace

TemperatureConfig::TemperatureConfig(double temperature) : temperature_(temperature) {
  if (!std::isfinite(temperature) || !(temperature > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "temperature must be finite and > 0, got " + std::to_string(temperature));
  }
}

double msp_score(std::span<const float> logits) {
  check_logits(logits);
  return -max_softmax(logits, 1.0);
}

double energy_score(std::span<const float> logits, TemperatureConfig cfg) {
  check_logits(logits);
  const double t = cfg.temperature();
  const double top = max_logit(logits) / t;
  double sum = 0.0;
  for (float l : logits) sum += std::exp(static_cast<double>(l) / t - top);
  return -t * (top + std::log(sum));
}

double mls_score(std::span<const float> logits) {
  check_logits(logits);
  return -max_logit(logits);
}

double odin_score(std::span<const float> logits, TemperatureConfig cfg) {
  check_logits(logits);
  return -max_softmax(logits, cfg.temperature());
}

double d2u_score(std::span<const float> logits) {
  check_logits(logits);
  const double top = max_logit(logits);
  std::vector<double> shifted(logits.size());
  double denom = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    shifted[i] = static_cast<double>(logits[i]) - top;
    denom += std::exp(shifted[i]);
  }
  const double log_denom = std::log(denom);
  // KL(p || u) = sum_c p_c (ln p_c + ln K), with ln p_c = s_c - ln denom.
  double kl = std::log(static_cast<double>(logits.size()));
  for (double s : shifted) {
    const double log_p = s - log_denom;
    kl += std::exp(log_p) * log_p;
  }
  return -std::max(kl, 0.0);
}

ScoreSeries confidence_scores(const LogitPack& logits, ConfidenceScore which, double temperature) {
  const TemperatureConfig cfg(temperature);
  std::vector<double> out(logits.rows());
  for (std::size_t i = 0; i < logits.rows(); ++i) {
    const auto row = logits.row(i);
    switch (which) {
      case ConfidenceScore::Msp: out[i] = msp_score(row); break;
      case ConfidenceScore::Energy: out[i] = energy_score(row, cfg); break;
      case ConfidenceScore::Odin: out[i] = odin_score(row, cfg); break;
      case ConfidenceScore::D2u: out[i] = d2u_score(row); break;
      case ConfidenceScore::Mls: out[i] = mls_score(row); break;
    }
  }
  return ScoreSeries(std::move(out));
}

}  // namespace flats
