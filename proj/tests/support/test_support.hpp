#pragma once

// Test-only helpers and brute-force oracles. Nothing here calls into the
// code paths it is used to check.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <stdexcept>
#include <unistd.h>
#include <vector>

#include "flats/error.hpp"
#include "flats/score_series.hpp"

namespace flats::test {

/// Unique scratch directory, removed on destruction.
class TempDir {
 public:
  TempDir() {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("flats_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

template <typename F>
ErrorCode error_code_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  throw std::logic_error("expected flats::Error, nothing was thrown");
}

/// AUROC by enumerating every (IND, OOD) pair.
inline double auroc_by_pairs(const std::vector<double>& ind, const std::vector<double>& ood) {
  std::uint64_t twice = 0;
  for (double o : ood) {
    for (double i : ind) {
      if (o > i) twice += 2;
      else if (o == i) twice += 1;
    }
  }
  return static_cast<double>(twice) / (2.0 * static_cast<double>(ind.size()) * static_cast<double>(ood.size()));
}

struct SweepResult {
  double fpr;
  double threshold;
};

/// Tries every observed score as a threshold and keeps the largest one whose
/// OOD detection rate reaches `level`.
inline SweepResult fpr_by_sweep(const std::vector<double>& ind, const std::vector<double>& ood, double level) {
  std::vector<double> candidates = ind;
  candidates.insert(candidates.end(), ood.begin(), ood.end());
  double best = -INFINITY;
  for (double t : candidates) {
    std::size_t hit = 0;
    for (double o : ood) hit += o >= t;
    if (static_cast<double>(hit) / static_cast<double>(ood.size()) >= level) best = std::max(best, t);
  }
  std::size_t fp = 0;
  for (double i : ind) fp += i >= best;
  return {static_cast<double>(fp) / static_cast<double>(ind.size()), best};
}

/// Scores drawn with deliberate ties: values on a coarse grid.
inline std::vector<double> tied_scores(std::mt19937_64& gen, std::size_t n, int levels) {
  std::uniform_int_distribution<int> pick(0, levels - 1);
  std::vector<double> out(n);
  for (auto& v : out) v = static_cast<double>(pick(gen)) / levels;
  return out;
}

inline ScoreSeries series(std::vector<double> v) { return ScoreSeries(std::move(v)); }

}  // namespace flats::test
