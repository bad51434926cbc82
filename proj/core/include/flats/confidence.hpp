#pragma once

#include <span>

#include "flats/feature_pack.hpp"
#include "flats/score_series.hpp"

namespace flats {

// Logit-based baselines. Every score is negated where necessary so that
// higher means more OOD. All throw NonFinite on non-finite logits and
// InvalidArgument on an empty logit vector.

struct TemperatureConfig {
  static constexpr double kEnergyDefault = 1.0;
  static constexpr double kOdinDefault = 1000.0;

  /// Throws InvalidArgument unless temperature is finite and > 0.
  explicit TemperatureConfig(double temperature);

  double temperature() const noexcept { return temperature_; }

 private:
  double temperature_;
};

/// -max_c softmax(logits)_c.
double msp_score(std::span<const float> logits);
/// -T * logsumexp(logits / T).
double energy_score(std::span<const float> logits, TemperatureConfig cfg = TemperatureConfig(1.0));
/// -max_c logits_c.
double mls_score(std::span<const float> logits);
/// ODIN-T: -max_c softmax(logits / T)_c. Temperature scaling only; no input
/// perturbation, which needs encoder gradients.
double odin_score(std::span<const float> logits, TemperatureConfig cfg = TemperatureConfig(1000.0));
/// -KL(softmax(logits) || uniform) = -(ln K - H(p)). A monotone transform of
/// the predictive entropy.
double d2u_score(std::span<const float> logits);

enum class ConfidenceScore { Msp, Energy, Odin, D2u, Mls };

/// Row-wise batch form. `temperature` is used by Energy and ODIN only.
ScoreSeries confidence_scores(const LogitPack& logits, ConfidenceScore which, double temperature);

}  // namespace flats
