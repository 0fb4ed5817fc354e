#include "socmf/evaluation.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <map>
#include <mutex>
#include <random>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "socmf/error.hpp"

namespace socmf {

void SplitSpec::validate() const {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw ConfigError("train fraction must lie strictly between 0 and 1");
  }
}

Split split(const RatingsTable& ratings, const SplitSpec& spec) {
  spec.validate();
  std::mt19937_64 rng(spec.seed);
  std::vector<Rating> train, test;
  for (const Rating& r : ratings.entries()) {
    if (std::generate_canonical<double, 53>(rng) < spec.train_fraction) {
      train.push_back(r);
    } else {
      test.push_back(r);
    }
  }
  return {RatingsTable(ratings.n_users(), ratings.n_items(), std::move(train)),
          RatingsTable(ratings.n_users(), ratings.n_items(), std::move(test))};
}

Predictor factor_predictor(const FactorModel& model) {
  return [&model](UserId x, ItemId j) -> std::optional<double> {
    if (x.value >= model.n_users() || j.value >= model.n_items()) return std::nullopt;
    return predict(model, x, j);
  };
}

Predictor naive_predictor(const NaiveModel& model) {
  return [&model](UserId, ItemId j) -> std::optional<double> {
    if (j.value >= model.item_means.size()) return std::nullopt;
    return predict_naive(model, j);
  };
}

EvalReport rmse(const Predictor& predictor, const RatingsTable& test,
                const std::optional<RatingScale>& clamp) {
  EvalReport report;
  double sum = 0.0;
  for (const Rating& r : test.entries()) {
    auto prediction = predictor(r.user, r.item);
    if (!prediction) {
      ++report.skipped;
      continue;
    }
    const double p = clamp ? clamp->clamp(*prediction) : *prediction;
    const double e = r.value - p;
    sum += e * e;
    ++report.scored;
  }
  if (report.scored == 0) throw DataError("rmse: no scorable test entries");
  report.rmse = std::sqrt(sum / static_cast<double>(report.scored));
  return report;
}

namespace {

int method_rank(const std::string& method) {
  if (method == kNaive) return 0;
  if (method == kNmf) return 1;
  if (method == kOa) return 2;
  return 3;
}

void sort_reports(std::vector<EvalReport>& reports) {
  std::stable_sort(reports.begin(), reports.end(), [](const EvalReport& a, const EvalReport& b) {
    const int ra = method_rank(a.method), rb = method_rank(b.method);
    if (ra != rb) return ra < rb;
    if (a.method != b.method) return a.method < b.method;
    if (a.k != b.k) return a.k < b.k;
    return a.mu < b.mu;
  });
}

// Runs every task, at most `threads` at a time. The first exception thrown by
// any task is rethrown after all workers join.
void run_parallel(std::vector<std::function<void()>>& tasks, unsigned threads) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min<unsigned>(threads, static_cast<unsigned>(tasks.size()));
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (std::size_t i = next++; i < tasks.size(); i = next++) {
      try {
        tasks[i]();
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (failure) std::rethrow_exception(failure);
}

EvalReport factor_cell(const SocialRatingNetwork& train_srn, const RatingsTable& test,
                       const Hyperparams& hp, std::string_view method, const EvalConfig& config) {
  auto [model, trace] = train(train_srn, hp);
  auto report = rmse(factor_predictor(model), test,
                     config.clamp ? std::optional<RatingScale>(config.scale) : std::nullopt);
  report.method = method;
  report.k = hp.k;
  report.lambda = hp.lambda;
  report.mu = hp.mu;
  report.beta = hp.beta;
  report.iters = trace.iterations();
  report.seed = hp.seed;
  return report;
}

EvalReport naive_cell(const RatingsTable& train_ratings, const RatingsTable& test,
                      std::size_t k, std::uint64_t seed, const EvalConfig& config) {
  const NaiveModel naive = fit_naive(train_ratings, config.scale);
  auto report = rmse(naive_predictor(naive), test,
                     config.clamp ? std::optional<RatingScale>(config.scale) : std::nullopt);
  report.method = kNaive;
  report.k = k;
  report.seed = seed;
  return report;
}

}  // namespace

std::vector<EvalReport> sweep_k(const SocialRatingNetwork& srn,
                                const std::vector<std::size_t>& k_values,
                                const Hyperparams& hp_template, const EvalConfig& config) {
  if (k_values.empty()) throw ConfigError("sweep_k: no k values");
  config.scale.validate();
  hp_template.validate();
  auto [train_ratings, test] = split(srn.ratings(), config.split);
  const SocialRatingNetwork train_srn = srn.with_ratings(train_ratings);

  std::vector<EvalReport> reports(3 * k_values.size());
  std::vector<std::function<void()>> tasks;
  for (std::size_t i = 0; i < k_values.size(); ++i) {
    Hyperparams hp = hp_template;
    hp.k = k_values[i];
    hp.validate();
    Hyperparams nmf = hp;
    nmf.mu = 0.0;
    tasks.emplace_back([&, i, hp] {
      reports[3 * i] = naive_cell(train_ratings, test, hp.k, hp.seed, config);
    });
    tasks.emplace_back([&, i, nmf] {
      reports[3 * i + 1] = factor_cell(train_srn, test, nmf, kNmf, config);
    });
    tasks.emplace_back([&, i, hp] {
      reports[3 * i + 2] = factor_cell(train_srn, test, hp, kOa, config);
    });
  }
  run_parallel(tasks, config.threads);
  sort_reports(reports);
  return reports;
}

std::vector<EvalReport> sweep_mu(const SocialRatingNetwork& srn, const std::vector<double>& mu_values,
                                 const Hyperparams& hp_template, const EvalConfig& config) {
  if (mu_values.empty()) throw ConfigError("sweep_mu: no mu values");
  config.scale.validate();
  hp_template.validate();
  auto [train_ratings, test] = split(srn.ratings(), config.split);
  const SocialRatingNetwork train_srn = srn.with_ratings(train_ratings);

  std::vector<EvalReport> reports(mu_values.size());
  std::vector<std::function<void()>> tasks;
  for (std::size_t i = 0; i < mu_values.size(); ++i) {
    Hyperparams hp = hp_template;
    hp.mu = mu_values[i];
    hp.validate();
    tasks.emplace_back([&, i, hp] {
      reports[i] = factor_cell(train_srn, test, hp, kOa, config);
    });
  }
  run_parallel(tasks, config.threads);
  sort_reports(reports);
  return reports;
}

// ---------------------------------------------------------------------------
// Report output

namespace {

template <typename T>
nlohmann::json optional_json(const std::optional<T>& v) {
  return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

template <typename T>
std::optional<T> optional_from(const nlohmann::json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<T>();
}

std::string fixed3(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3f", v);
  return buf;
}

std::string general(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%g", v);
  return buf;
}

std::string pad_left(const std::string& s, std::size_t width) {
  return s.size() >= width ? s : std::string(width - s.size(), ' ') + s;
}

}  // namespace

std::string reports_to_json(const std::vector<EvalReport>& reports) {
  nlohmann::json doc = nlohmann::json::array();
  for (const auto& r : reports) {
    doc.push_back({{"method", r.method},
                   {"k", optional_json(r.k)},
                   {"lambda", optional_json(r.lambda)},
                   {"mu", optional_json(r.mu)},
                   {"beta", optional_json(r.beta)},
                   {"iters", optional_json(r.iters)},
                   {"seed", optional_json(r.seed)},
                   {"rmse", r.rmse},
                   {"scored", r.scored},
                   {"skipped", r.skipped}});
  }
  return doc.dump(2) + "\n";
}

std::vector<EvalReport> reports_from_json(std::string_view text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("report JSON: ") + e.what());
  }
  if (!doc.is_array()) throw DataError("report JSON: expected an array");
  std::vector<EvalReport> out;
  try {
    for (const auto& j : doc) {
      EvalReport r;
      r.method = j.at("method").get<std::string>();
      r.k = optional_from<std::size_t>(j, "k");
      r.lambda = optional_from<double>(j, "lambda");
      r.mu = optional_from<double>(j, "mu");
      r.beta = optional_from<double>(j, "beta");
      r.iters = optional_from<std::size_t>(j, "iters");
      r.seed = optional_from<std::uint64_t>(j, "seed");
      r.rmse = j.at("rmse").get<double>();
      r.scored = j.at("scored").get<std::size_t>();
      r.skipped = j.at("skipped").get<std::size_t>();
      out.push_back(std::move(r));
    }
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("report JSON: ") + e.what());
  }
  return out;
}

std::string format_k_table(const std::vector<EvalReport>& reports) {
  std::vector<std::string> methods;
  std::map<std::size_t, std::map<std::string, double>> rows;
  for (const auto& r : reports) {
    if (!r.k) continue;
    if (std::find(methods.begin(), methods.end(), r.method) == methods.end()) {
      methods.push_back(r.method);
    }
    rows[*r.k][r.method] = r.rmse;
  }
  std::sort(methods.begin(), methods.end(), [](const std::string& a, const std::string& b) {
    return method_rank(a) < method_rank(b) || (method_rank(a) == method_rank(b) && a < b);
  });

  constexpr std::size_t kWidth = 8;
  std::ostringstream out;
  out << pad_left("k", 4);
  for (const auto& m : methods) out << "  " << pad_left(m, kWidth);
  out << '\n';
  for (const auto& [k, cells] : rows) {
    out << pad_left(std::to_string(k), 4);
    for (const auto& m : methods) {
      auto it = cells.find(m);
      out << "  " << pad_left(it == cells.end() ? "-" : fixed3(it->second), kWidth);
    }
    out << '\n';
  }
  return out.str();
}

std::string format_mu_table(const std::vector<EvalReport>& reports) {
  std::vector<std::pair<double, double>> rows;
  for (const auto& r : reports) {
    if (r.mu) rows.emplace_back(*r.mu, r.rmse);
  }
  std::sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) { return a.first > b.first; });

  std::ostringstream out;
  out << pad_left("mu", 8) << "  " << pad_left("RMSE", 8) << '\n';
  for (const auto& [mu, value] : rows) {
    out << pad_left(general(mu), 8) << "  " << pad_left(fixed3(value), 8) << '\n';
  }
  return out.str();
}

}  // namespace socmf
