#pragma once

// Latent factor model with optional social regularization, trained by
// full-batch gradient descent with a backtracking step-size safeguard.
//
// Objective minimized (mask = observed entries of the ratings table):
//
//   L(P, Q) = 1/2 sum_{(x,j) observed} (R_xj - p_x . q_j)^2
//           + lambda/2 (|P|_F^2 + |Q|_F^2)
//           + mu/2 sum_x sum_{y in N(x)} |p_x - p_y|^2
//
// With mu = 0 (or no edges) this is the ratings-only factorization.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "socmf/matrix.hpp"
#include "socmf/srn.hpp"

namespace socmf {

/// How grad_p treats the social term.
///  - kPrinted: mu * sum_{y in N(x)} (p_x - p_y), outgoing ties only.
///  - kFull:    additionally mu * sum_{z : x in N(z)} (p_x - p_z), which makes
///              grad_p the exact gradient of the objective above.
enum class SocialGradient { kPrinted, kFull };

const char* to_string(SocialGradient mode);
SocialGradient parse_social_gradient(const std::string& s);

struct Hyperparams {
  std::size_t k = 10;
  double lambda = 0.001;
  double mu = 1e-3;
  double beta = 0.005;
  std::size_t max_iters = 5000;
  double epsilon = 1e-8;
  std::uint64_t seed = 42;
  double init_scale = 0.1;
  SocialGradient social_gradient = SocialGradient::kPrinted;
  bool nonneg_projection = false;

  /// Throws ConfigError when a field is out of range.
  void validate() const;
};

/// Halvings of beta tried within one iteration before giving up.
inline constexpr int kMaxStepHalvings = 20;

struct FactorModel {
  Matrix p;  // n_users x k
  Matrix q;  // n_items x k

  std::size_t k() const noexcept { return p.cols(); }
  std::size_t n_users() const noexcept { return p.rows(); }
  std::size_t n_items() const noexcept { return q.rows(); }

  friend bool operator==(const FactorModel&, const FactorModel&) = default;
};

enum class StopReason {
  kBudgetExhausted,  // max_iters accepted steps
  kConverged,        // loss improvement below epsilon
  kStepExhausted,    // no non-increasing step found after kMaxStepHalvings
};

const char* to_string(StopReason reason);

/// One firing of the backtracking safeguard.
struct Backtrack {
  std::size_t iteration = 0;
  double beta = 0.0;  // step size after halving
};

struct TrainTrace {
  double initial_loss = 0.0;
  std::vector<double> losses;  // loss after each accepted iteration
  std::vector<Backtrack> backtracks;
  StopReason stop = StopReason::kBudgetExhausted;
  double final_beta = 0.0;

  std::size_t iterations() const noexcept { return losses.size(); }
};

/// Called after every accepted iteration with the 1-based iteration count.
using IterationObserver = std::function<void(std::size_t, const FactorModel&)>;

/// Entries i.i.d. uniform on [0, init_scale), P row-major first, then Q.
FactorModel init_model(std::size_t n_users, std::size_t n_items, const Hyperparams& hp);

/// p_x . q_j, unclamped. Throws DataError for out-of-range indices.
double predict(const FactorModel& model, UserId x, ItemId j);

double loss_ratings(const FactorModel& model, const RatingsTable& ratings, double lambda);
double loss_social(const FactorModel& model, const SocialRatingNetwork& srn, double lambda,
                   double mu);

/// Value of mu/2 sum_x sum_{y in N(x)} |p_x - p_y|^2 alone.
double social_penalty(const Matrix& p, const SocialGraph& social, double mu);

Matrix grad_p(const FactorModel& model, const SocialRatingNetwork& srn, double lambda, double mu,
              SocialGradient mode);
Matrix grad_q(const FactorModel& model, const SocialRatingNetwork& srn, double lambda);

/// Gradient descent on loss_social. Deterministic given `hp`.
/// Throws DivergenceError if the loss cannot be kept finite.
std::pair<FactorModel, TrainTrace> train(const SocialRatingNetwork& srn, const Hyperparams& hp,
                                         const IterationObserver& observer = {});

/// Same trainer on the ratings alone; never reads a social graph and ignores hp.mu.
std::pair<FactorModel, TrainTrace> train_ratings_only(const RatingsTable& ratings,
                                                      const Hyperparams& hp,
                                                      const IterationObserver& observer = {});

/// Mean |p_x - p_y| over all directed ties.
double mean_tie_distance(const FactorModel& model, const SocialGraph& social);

// Model file: header `socmf-model v1 <n_u> <n_i> <k>`, then n_u lines of P rows
// and n_i lines of Q rows, shortest round-trip decimal, space separated.
void write_model(std::ostream& out, const FactorModel& model);
FactorModel read_model(std::istream& in);
void save_model(const std::string& path, const FactorModel& model);
FactorModel load_model(const std::string& path);

}  // namespace socmf
