#include "socmf/factorization.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <random>
#include <sstream>
#include <string>

#include "socmf/error.hpp"

namespace socmf {

const char* to_string(SocialGradient mode) {
  return mode == SocialGradient::kFull ? "full" : "printed";
}

SocialGradient parse_social_gradient(const std::string& s) {
  if (s == "printed") return SocialGradient::kPrinted;
  if (s == "full") return SocialGradient::kFull;
  throw ConfigError("social gradient mode must be 'printed' or 'full', got '" + s + "'");
}

const char* to_string(StopReason reason) {
  switch (reason) {
    case StopReason::kBudgetExhausted: return "budget_exhausted";
    case StopReason::kConverged: return "converged";
    case StopReason::kStepExhausted: return "step_exhausted";
  }
  return "unknown";
}

void Hyperparams::validate() const {
  auto finite_nonneg = [](double v) { return std::isfinite(v) && v >= 0.0; };
  if (k < 1) throw ConfigError("k must be >= 1");
  if (!finite_nonneg(lambda)) throw ConfigError("lambda must be finite and >= 0");
  if (!finite_nonneg(mu)) throw ConfigError("mu must be finite and >= 0");
  if (!std::isfinite(beta) || beta <= 0.0) throw ConfigError("beta must be finite and > 0");
  if (!finite_nonneg(epsilon)) throw ConfigError("epsilon must be finite and >= 0");
  if (!finite_nonneg(init_scale)) throw ConfigError("init_scale must be finite and >= 0");
}

FactorModel init_model(std::size_t n_users, std::size_t n_items, const Hyperparams& hp) {
  std::mt19937_64 rng(hp.seed);
  FactorModel model{Matrix(n_users, hp.k), Matrix(n_items, hp.k)};
  for (double& v : model.p.values()) v = hp.init_scale * std::generate_canonical<double, 53>(rng);
  for (double& v : model.q.values()) v = hp.init_scale * std::generate_canonical<double, 53>(rng);
  return model;
}

double predict(const FactorModel& model, UserId x, ItemId j) {
  if (x.value >= model.n_users() || j.value >= model.n_items()) {
    throw DataError("predict: (" + std::to_string(x.value) + ", " + std::to_string(j.value) +
                    ") outside model of " + std::to_string(model.n_users()) + "x" +
                    std::to_string(model.n_items()));
  }
  return dot(model.p.row(x.value), model.q.row(j.value));
}

namespace {

void check_dims(const FactorModel& model, const RatingsTable& ratings) {
  if (model.n_users() != ratings.n_users() || model.n_items() != ratings.n_items() ||
      model.q.cols() != model.p.cols()) {
    throw DataError("model is " + std::to_string(model.n_users()) + "x" +
                    std::to_string(model.n_items()) + " but ratings are " +
                    std::to_string(ratings.n_users()) + "x" + std::to_string(ratings.n_items()));
  }
}

// The objective and its gradient over one ratings table and an optional graph.
// `social == nullptr` is the ratings-only problem; the social code paths are
// also skipped when mu == 0 so both configurations run identical arithmetic.
struct Objective {
  const RatingsTable& ratings;
  const SocialGraph* social;
  double lambda;
  double mu;
  SocialGradient mode;

  bool uses_social() const { return social != nullptr && mu != 0.0; }

  double value(const FactorModel& m) const {
    double data = 0.0;
    for (const Rating& r : ratings.entries()) {
      const double e = r.value - dot(m.p.row(r.user.value), m.q.row(r.item.value));
      data += e * e;
    }
    double loss = 0.5 * data +
                  0.5 * lambda * (squared_norm(m.p.values()) + squared_norm(m.q.values()));
    if (uses_social()) loss += social_penalty(m.p, *social, mu);
    return loss;
  }

  void gradient(const FactorModel& m, Matrix& gp, Matrix& gq) const {
    const std::size_t k = m.k();
    gp = Matrix(m.n_users(), k);
    gq = Matrix(m.n_items(), k);
    for (const Rating& r : ratings.entries()) {
      auto px = m.p.row(r.user.value);
      auto qj = m.q.row(r.item.value);
      const double e = dot(px, qj) - r.value;
      auto gpx = gp.row(r.user.value);
      auto gqj = gq.row(r.item.value);
      for (std::size_t f = 0; f < k; ++f) {
        gpx[f] += e * qj[f];
        gqj[f] += e * px[f];
      }
    }
    auto p = m.p.values();
    auto q = m.q.values();
    auto gpv = gp.values();
    auto gqv = gq.values();
    for (std::size_t i = 0; i < gpv.size(); ++i) gpv[i] += lambda * p[i];
    for (std::size_t i = 0; i < gqv.size(); ++i) gqv[i] += lambda * q[i];
    if (!uses_social()) return;

    for (std::uint32_t x = 0; x < m.n_users(); ++x) {
      auto px = m.p.row(x);
      auto gpx = gp.row(x);
      for (UserId y : social->neighbors(UserId{x})) {
        auto py = m.p.row(y.value);
        for (std::size_t f = 0; f < k; ++f) gpx[f] += mu * (px[f] - py[f]);
      }
      if (mode == SocialGradient::kFull) {
        for (UserId z : social->followers(UserId{x})) {
          auto pz = m.p.row(z.value);
          for (std::size_t f = 0; f < k; ++f) gpx[f] += mu * (px[f] - pz[f]);
        }
      }
    }
  }
};

std::pair<FactorModel, TrainTrace> run_descent(const Objective& objective, const Hyperparams& hp,
                                               const IterationObserver& observer) {
  hp.validate();
  const auto& ratings = objective.ratings;
  FactorModel model = init_model(ratings.n_users(), ratings.n_items(), hp);
  TrainTrace trace;
  trace.final_beta = hp.beta;
  if (hp.max_iters == 0) {
    trace.initial_loss = objective.value(model);
    return {std::move(model), std::move(trace)};
  }

  double loss = objective.value(model);
  trace.initial_loss = loss;
  if (!std::isfinite(loss)) {
    throw DivergenceError(0, "initial loss is not finite");
  }

  double beta = hp.beta;
  Matrix gp, gq;
  FactorModel candidate = model;
  for (std::size_t it = 0; it < hp.max_iters; ++it) {
    objective.gradient(model, gp, gq);

    double candidate_loss = 0.0;
    int halvings = 0;
    while (true) {
      auto p = model.p.values();
      auto q = model.q.values();
      auto cp = candidate.p.values();
      auto cq = candidate.q.values();
      auto gpv = gp.values();
      auto gqv = gq.values();
      for (std::size_t i = 0; i < cp.size(); ++i) cp[i] = p[i] - beta * gpv[i];
      for (std::size_t i = 0; i < cq.size(); ++i) cq[i] = q[i] - beta * gqv[i];
      if (hp.nonneg_projection) {
        for (double& v : cp) v = v < 0.0 ? 0.0 : v;
        for (double& v : cq) v = v < 0.0 ? 0.0 : v;
      }
      candidate_loss = objective.value(candidate);
      if (std::isfinite(candidate_loss) && candidate_loss <= loss) break;

      if (halvings == kMaxStepHalvings) {
        trace.final_beta = beta;
        if (!std::isfinite(candidate_loss)) {
          throw DivergenceError(it, "loss became non-finite at iteration " + std::to_string(it) +
                                        " after " + std::to_string(kMaxStepHalvings) +
                                        " step halvings");
        }
        trace.stop = StopReason::kStepExhausted;
        return {std::move(model), std::move(trace)};
      }
      beta *= 0.5;
      ++halvings;
      trace.backtracks.push_back({it, beta});
    }

    std::swap(model, candidate);
    const double improvement = loss - candidate_loss;
    loss = candidate_loss;
    trace.losses.push_back(loss);
    if (observer) observer(trace.losses.size(), model);
    if (improvement < hp.epsilon) {
      trace.stop = StopReason::kConverged;
      break;
    }
  }
  trace.final_beta = beta;
  return {std::move(model), std::move(trace)};
}

}  // namespace

double loss_ratings(const FactorModel& model, const RatingsTable& ratings, double lambda) {
  check_dims(model, ratings);
  return Objective{ratings, nullptr, lambda, 0.0, SocialGradient::kPrinted}.value(model);
}

double social_penalty(const Matrix& p, const SocialGraph& social, double mu) {
  double sum = 0.0;
  for (std::uint32_t x = 0; x < social.n_users(); ++x) {
    auto px = p.row(x);
    for (UserId y : social.neighbors(UserId{x})) {
      auto py = p.row(y.value);
      for (std::size_t f = 0; f < px.size(); ++f) {
        const double d = px[f] - py[f];
        sum += d * d;
      }
    }
  }
  return 0.5 * mu * sum;
}

double loss_social(const FactorModel& model, const SocialRatingNetwork& srn, double lambda,
                   double mu) {
  check_dims(model, srn.ratings());
  return Objective{srn.ratings(), &srn.social(), lambda, mu, SocialGradient::kPrinted}.value(model);
}

Matrix grad_p(const FactorModel& model, const SocialRatingNetwork& srn, double lambda, double mu,
              SocialGradient mode) {
  check_dims(model, srn.ratings());
  Matrix gp, gq;
  Objective{srn.ratings(), &srn.social(), lambda, mu, mode}.gradient(model, gp, gq);
  return gp;
}

Matrix grad_q(const FactorModel& model, const SocialRatingNetwork& srn, double lambda) {
  check_dims(model, srn.ratings());
  Matrix gp, gq;
  Objective{srn.ratings(), nullptr, lambda, 0.0, SocialGradient::kPrinted}.gradient(model, gp, gq);
  return gq;
}

std::pair<FactorModel, TrainTrace> train(const SocialRatingNetwork& srn, const Hyperparams& hp,
                                         const IterationObserver& observer) {
  return run_descent(Objective{srn.ratings(), &srn.social(), hp.lambda, hp.mu, hp.social_gradient},
                     hp, observer);
}

std::pair<FactorModel, TrainTrace> train_ratings_only(const RatingsTable& ratings,
                                                      const Hyperparams& hp,
                                                      const IterationObserver& observer) {
  return run_descent(Objective{ratings, nullptr, hp.lambda, 0.0, SocialGradient::kPrinted}, hp,
                     observer);
}

double mean_tie_distance(const FactorModel& model, const SocialGraph& social) {
  if (social.empty()) return 0.0;
  double total = 0.0;
  for (const auto& [x, y] : social.edges()) {
    auto px = model.p.row(x.value);
    auto py = model.p.row(y.value);
    double d2 = 0.0;
    for (std::size_t f = 0; f < px.size(); ++f) d2 += (px[f] - py[f]) * (px[f] - py[f]);
    total += std::sqrt(d2);
  }
  return total / static_cast<double>(social.edge_count());
}

// ---------------------------------------------------------------------------
// Serialization

namespace {

void write_double(std::ostream& out, double v) {
  char buf[32];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  out.write(buf, end - buf);
}

void write_rows(std::ostream& out, const Matrix& m) {
  for (std::size_t r = 0; r < m.rows(); ++r) {
    auto row = m.row(r);
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c) out.put(' ');
      write_double(out, row[c]);
    }
    out.put('\n');
  }
}

void read_rows(std::istream& in, Matrix& m, const char* name) {
  std::string line;
  for (std::size_t r = 0; r < m.rows(); ++r) {
    if (!std::getline(in, line)) {
      throw DataError(std::string("model file truncated in ") + name + " row " + std::to_string(r));
    }
    const char* cur = line.data();
    const char* end = line.data() + line.size();
    for (std::size_t c = 0; c < m.cols(); ++c) {
      while (cur < end && *cur == ' ') ++cur;
      double v = 0.0;
      auto [next, ec] = std::from_chars(cur, end, v);
      if (ec != std::errc() || !std::isfinite(v)) {
        throw DataError(std::string("model file: bad value in ") + name + " row " +
                        std::to_string(r) + " column " + std::to_string(c));
      }
      m(r, c) = v;
      cur = next;
    }
    while (cur < end && (*cur == ' ' || *cur == '\r')) ++cur;
    if (cur != end) {
      throw DataError(std::string("model file: extra values in ") + name + " row " +
                      std::to_string(r));
    }
  }
}

}  // namespace

void write_model(std::ostream& out, const FactorModel& model) {
  out << "socmf-model v1 " << model.n_users() << ' ' << model.n_items() << ' ' << model.k()
      << '\n';
  write_rows(out, model.p);
  write_rows(out, model.q);
}

FactorModel read_model(std::istream& in) {
  std::string header;
  if (!std::getline(in, header)) throw DataError("model file is empty");
  std::istringstream hs(header);
  std::string magic, version;
  std::size_t n_users = 0, n_items = 0, k = 0;
  if (!(hs >> magic >> version >> n_users >> n_items >> k) || magic != "socmf-model" ||
      version != "v1") {
    throw DataError("model file: expected header 'socmf-model v1 <n_u> <n_i> <k>'");
  }
  if (k < 1) throw DataError("model file: k must be >= 1");
  FactorModel model{Matrix(n_users, k), Matrix(n_items, k)};
  read_rows(in, model.p, "P");
  read_rows(in, model.q, "Q");
  return model;
}

void save_model(const std::string& path, const FactorModel& model) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot open '" + path + "' for writing");
  write_model(out, model);
  if (!out) throw DataError("failed writing '" + path + "'");
}

FactorModel load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path + "'");
  return read_model(in);
}

}  // namespace socmf
