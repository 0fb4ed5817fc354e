#include "socmf/baselines.hpp"

#include <string>

#include "socmf/error.hpp"

namespace socmf {

NaiveModel fit_naive(const RatingsTable& ratings, const RatingScale& scale) {
  std::vector<double> sums(ratings.n_items(), 0.0);
  std::vector<std::size_t> counts(ratings.n_items(), 0);
  double total = 0.0;
  for (const Rating& r : ratings.entries()) {
    sums[r.item.value] += r.value;
    ++counts[r.item.value];
    total += r.value;
  }

  NaiveModel model;
  model.scale = scale;
  model.item_means.resize(ratings.n_items());
  for (std::size_t j = 0; j < sums.size(); ++j) {
    if (counts[j] > 0) model.item_means[j] = sums[j] / static_cast<double>(counts[j]);
  }
  if (!ratings.empty()) model.global_mean = total / static_cast<double>(ratings.size());
  return model;
}

double predict_naive(const NaiveModel& model, ItemId j) {
  if (j.value >= model.item_means.size()) {
    throw DataError("naive predict: item " + std::to_string(j.value) + " out of range");
  }
  if (const auto& m = model.item_means[j.value]) return *m;
  if (model.global_mean) return *model.global_mean;
  return model.scale.midpoint();
}

}  // namespace socmf
