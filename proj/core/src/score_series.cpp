#include "flats/score_series.hpp"

#include <cmath>
#include <string>

#include "flats/error.hpp"

namespace flats {

ScoreSeries::ScoreSeries(std::vector<double> values) : values_(std::move(values)) {
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (!std::isfinite(values_[i])) {
      throw Error(ErrorCode::NonFinite, "score " + std::to_string(i) + " is not finite");
    }
  }
}

}  // namespace flats
