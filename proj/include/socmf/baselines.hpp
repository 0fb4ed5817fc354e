#pragma once

#include <optional>
#include <vector>

#include "socmf/srn.hpp"

namespace socmf {

/// Naive predictor: an item's rating is the mean of its observed ratings,
/// falling back to the global mean, then to the scale midpoint.
struct NaiveModel {
  std::vector<std::optional<double>> item_means;
  std::optional<double> global_mean;
  RatingScale scale;
};

NaiveModel fit_naive(const RatingsTable& ratings, const RatingScale& scale = {});

/// Throws DataError when j is outside the fitted item range.
double predict_naive(const NaiveModel& model, ItemId j);

}  // namespace socmf
