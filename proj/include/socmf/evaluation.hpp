#pragma once

// Train/test splitting, RMSE scoring and the k / mu sweep experiments.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "socmf/baselines.hpp"
#include "socmf/factorization.hpp"
#include "socmf/srn.hpp"

namespace socmf {

struct SplitSpec {
  double train_fraction = 0.8;
  std::uint64_t seed = 7;

  void validate() const;
};

struct Split {
  RatingsTable train;
  RatingsTable test;
};

/// Independent Bernoulli(train_fraction) draw per observed entry, in table
/// order. Both halves keep the full index space.
Split split(const RatingsTable& ratings, const SplitSpec& spec);

inline constexpr std::string_view kNaive = "Naive";
inline constexpr std::string_view kNmf = "NMF";
inline constexpr std::string_view kOa = "OA";

struct EvalReport {
  std::string method;
  std::optional<std::size_t> k;
  std::optional<double> lambda;
  std::optional<double> mu;
  std::optional<double> beta;
  std::optional<std::size_t> iters;  // iterations actually run
  std::optional<std::uint64_t> seed;
  double rmse = 0.0;
  std::size_t scored = 0;
  std::size_t skipped = 0;

  friend bool operator==(const EvalReport&, const EvalReport&) = default;
};

/// Returns nullopt for entries the predictor cannot score.
using Predictor = std::function<std::optional<double>(UserId, ItemId)>;

Predictor factor_predictor(const FactorModel& model);
Predictor naive_predictor(const NaiveModel& model);

/// sqrt(mean squared error) over scorable test entries. Predictions are
/// clipped into `clamp` when given. Throws DataError when nothing is scorable.
EvalReport rmse(const Predictor& predictor, const RatingsTable& test,
                const std::optional<RatingScale>& clamp);

struct EvalConfig {
  SplitSpec split;
  RatingScale scale;
  bool clamp = true;
  unsigned threads = 0;  // 0 = hardware concurrency
};

/// For each k: Naive, NMF (mu = 0) and OA (hp_template.mu), all on one split.
/// Rows sorted by method (Naive, NMF, OA) then k.
std::vector<EvalReport> sweep_k(const SocialRatingNetwork& srn,
                                const std::vector<std::size_t>& k_values,
                                const Hyperparams& hp_template, const EvalConfig& config);

/// OA at hp_template.k for each mu, all on one split. Rows sorted by mu.
std::vector<EvalReport> sweep_mu(const SocialRatingNetwork& srn, const std::vector<double>& mu_values,
                                 const Hyperparams& hp_template, const EvalConfig& config);

/// JSON array of {method, k, lambda, mu, beta, iters, seed, rmse, scored, skipped}.
std::string reports_to_json(const std::vector<EvalReport>& reports);
std::vector<EvalReport> reports_from_json(std::string_view text);

/// Aligned text table: one row per k, one RMSE column per method.
std::string format_k_table(const std::vector<EvalReport>& reports);
/// Aligned text table: one row per mu (descending), RMSE column.
std::string format_mu_table(const std::vector<EvalReport>& reports);

}  // namespace socmf
