#include <doctest.h>

#include <random>
#include <sstream>

#include "oracles.hpp"
#include "socmf/error.hpp"
#include "socmf/factorization.hpp"

using namespace socmf;

namespace {

SocialRatingNetwork tiny_srn(std::vector<std::pair<UserId, UserId>> edges = {}) {
  std::vector<Rating> entries{{UserId{0}, ItemId{0}, 5.0},
                              {UserId{0}, ItemId{1}, 3.0},
                              {UserId{1}, ItemId{1}, 4.0},
                              {UserId{2}, ItemId{0}, 1.0},
                              {UserId{2}, ItemId{2}, 2.0}};
  return build_srn(RatingsTable(3, 3, entries), SocialGraph(3, std::move(edges)));
}

Hyperparams tiny_hp() {
  Hyperparams hp;
  hp.k = 2;
  hp.beta = 0.01;
  hp.lambda = 0.001;
  hp.max_iters = 2000;
  return hp;
}

}  // namespace

TEST_CASE("predict is the inner product") {
  FactorModel m{Matrix(1, 4), Matrix(1, 4)};
  m.p(0, 0) = 0.5;
  m.p(0, 1) = 0.7;
  for (std::size_t f = 0; f < 4; ++f) m.q(0, f) = 1.0;
  CHECK(predict(m, UserId{0}, ItemId{0}) == doctest::Approx(1.2));

  FactorModel s{Matrix(1, 1), Matrix(1, 1)};
  s.p(0, 0) = 2.0;
  s.q(0, 0) = 3.0;
  CHECK(predict(s, UserId{0}, ItemId{0}) == 6.0);
  CHECK_THROWS_AS(predict(s, UserId{1}, ItemId{0}), DataError);
}

TEST_CASE("loss examples") {
  SUBCASE("zero model, single rating") {
    const auto srn = build_srn(RatingsTable(1, 1, {{UserId{0}, ItemId{0}, 2.0}}), SocialGraph(1, {}));
    FactorModel m{Matrix(1, 3), Matrix(1, 3)};
    CHECK(loss_ratings(m, srn.ratings(), 0.5) == 2.0);
    CHECK(loss_social(m, srn, 0.5, 1.0) == 2.0);
  }
  SUBCASE("social penalty of one tie") {
    Matrix p(2, 2);
    p(0, 0) = 1.0;
    p(1, 0) = -1.0;
    const SocialGraph g(2, {{UserId{0}, UserId{1}}});
    CHECK(social_penalty(p, g, 1.0) == 2.0);
  }
}

TEST_CASE("loss agrees with the dense oracle") {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 200; ++trial) {
    const auto d = oracle::random_instance(rng);
    const auto srn = d.srn();
    const auto m = d.model();
    const double lambda = 0.01 * (trial % 5), mu = 0.1 * (trial % 3);
    const double expected = oracle::loss_social(d, d.p, d.q, lambda, mu);
    CHECK(std::abs(loss_social(m, srn, lambda, mu) - expected) <= 1e-12 * std::max(1.0, expected));
    const double ratings_only = oracle::loss_ratings(d, d.p, d.q, lambda);
    CHECK(std::abs(loss_ratings(m, srn.ratings(), lambda) - ratings_only) <=
          1e-12 * std::max(1.0, ratings_only));
  }
}

TEST_CASE("full-mode gradients match finite differences") {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 100; ++trial) {
    const auto d = oracle::random_instance(rng);
    const auto srn = d.srn();
    const auto m = d.model();
    const double lambda = 0.05, mu = 0.3;
    const auto [fp, fq] = oracle::fd_gradient(d, lambda, mu);
    CHECK(oracle::relative_error(grad_p(m, srn, lambda, mu, SocialGradient::kFull), fp) < 1e-5);
    CHECK(oracle::relative_error(grad_q(m, srn, lambda), fq) < 1e-5);
  }
}

TEST_CASE("on a symmetric graph the full social term is twice the printed one") {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 30; ++trial) {
    auto d = oracle::random_instance(rng);
    for (std::size_t x = 0; x < d.n_users; ++x)
      for (std::size_t y = 0; y < d.n_users; ++y)
        if (d.ties[x][y]) d.ties[y][x] = true;
    const auto srn = d.srn();
    const auto m = d.model();
    const Matrix base = grad_p(m, srn, 0.1, 0.0, SocialGradient::kPrinted);
    const Matrix printed = grad_p(m, srn, 0.1, 0.5, SocialGradient::kPrinted);
    const Matrix full = grad_p(m, srn, 0.1, 0.5, SocialGradient::kFull);
    for (std::size_t i = 0; i < base.values().size(); ++i) {
      const double sp = printed.values()[i] - base.values()[i];
      const double sf = full.values()[i] - base.values()[i];
      CHECK(sf == doctest::Approx(2.0 * sp).epsilon(1e-10).scale(1.0));
    }
  }
}

TEST_CASE("printed mode ignores followers") {
  // Only 1 -> 0: user 0 feels no social pull in printed mode.
  const auto srn = build_srn(RatingsTable(2, 1, {}), SocialGraph(2, {{UserId{1}, UserId{0}}}));
  FactorModel m{Matrix(2, 1), Matrix(1, 1)};
  m.p(0, 0) = 1.0;
  m.p(1, 0) = 3.0;
  const Matrix printed = grad_p(m, srn, 0.0, 1.0, SocialGradient::kPrinted);
  CHECK(printed(0, 0) == 0.0);
  CHECK(printed(1, 0) == 2.0);
  const Matrix full = grad_p(m, srn, 0.0, 1.0, SocialGradient::kFull);
  CHECK(full(0, 0) == -2.0);
}

TEST_CASE("grad_q reduces to lambda Q when every residual is zero") {
  FactorModel m{Matrix(1, 2), Matrix(2, 2)};
  m.p(0, 0) = 1.0;
  m.q(0, 0) = 2.0;
  m.q(1, 1) = 3.0;
  const auto srn = build_srn(
      RatingsTable(1, 2, {{UserId{0}, ItemId{0}, 2.0}, {UserId{0}, ItemId{1}, 0.0}}),
      SocialGraph(1, {}));
  const Matrix g = grad_q(m, srn, 0.25);
  CHECK(g(0, 0) == 0.5);
  CHECK(g(0, 1) == 0.0);
  CHECK(g(1, 0) == 0.0);
  CHECK(g(1, 1) == 0.75);
}

TEST_CASE("doubling lambda doubles the regularization term") {
  std::mt19937_64 rng(31);
  const auto d = oracle::random_instance(rng, 4, 2);
  const auto srn = d.srn();
  const auto m = d.model();
  const double fit = loss_ratings(m, srn.ratings(), 0.0);
  const double reg1 = loss_ratings(m, srn.ratings(), 0.2) - fit;
  const double reg2 = loss_ratings(m, srn.ratings(), 0.4) - fit;
  CHECK(reg2 == doctest::Approx(2.0 * reg1));
}

TEST_CASE("init_model") {
  Hyperparams hp;
  hp.k = 3;
  const auto a = init_model(4, 5, hp);
  CHECK(a == init_model(4, 5, hp));
  for (double v : a.p.values()) CHECK((v >= 0.0 && v < 0.1));
  hp.seed = 43;
  CHECK(!(a == init_model(4, 5, hp)));
  hp.init_scale = 0.0;
  const auto zero = init_model(4, 5, hp);
  for (double v : zero.q.values()) CHECK(v == 0.0);
}

TEST_CASE("zero iterations returns the initial model") {
  Hyperparams hp = tiny_hp();
  hp.max_iters = 0;
  const auto srn = tiny_srn();
  const auto [model, trace] = train(srn, hp);
  CHECK(model == init_model(3, 3, hp));
  CHECK(trace.iterations() == 0);
  CHECK(trace.initial_loss == loss_social(model, srn, hp.lambda, hp.mu));
}

TEST_CASE("mu = 0 reproduces ratings-only training at every iteration") {
  const auto srn = tiny_srn({{UserId{0}, UserId{1}}, {UserId{1}, UserId{2}}});
  Hyperparams hp = tiny_hp();
  hp.mu = 0.0;
  hp.max_iters = 300;
  std::vector<FactorModel> a, b;
  train(srn, hp, [&](std::size_t, const FactorModel& m) { a.push_back(m); });
  train_ratings_only(srn.ratings(), hp, [&](std::size_t, const FactorModel& m) { b.push_back(m); });
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == b[i]);
}

TEST_CASE("training loss is non-increasing and the fit improves") {
  const auto srn = tiny_srn({{UserId{0}, UserId{2}}});
  for (auto mode : {SocialGradient::kPrinted, SocialGradient::kFull}) {
    Hyperparams hp = tiny_hp();
    hp.social_gradient = mode;
    const auto [model, trace] = train(srn, hp);
    REQUIRE(trace.iterations() > 0);
    double prev = trace.initial_loss;
    for (double l : trace.losses) {
      CHECK(l <= prev);
      prev = l;
    }
    CHECK(trace.losses.back() < 0.1 * trace.initial_loss);
    CHECK(trace.losses.back() == doctest::Approx(loss_social(model, srn, hp.lambda, hp.mu)));
  }
}

TEST_CASE("an oversized step triggers the safeguard instead of diverging") {
  Hyperparams hp = tiny_hp();
  hp.beta = 5.0;
  hp.max_iters = 200;
  const auto srn = tiny_srn({{UserId{0}, UserId{1}}});
  const auto [model, trace] = train(srn, hp);
  CHECK(!trace.backtracks.empty());
  CHECK(trace.final_beta < hp.beta);
  double prev = trace.initial_loss;
  for (double l : trace.losses) {
    CHECK(l <= prev);
    prev = l;
  }
}

TEST_CASE("an overflowing step raises DivergenceError") {
  Hyperparams hp = tiny_hp();
  hp.beta = 1e300;
  CHECK_THROWS_AS(train(tiny_srn(), hp), DivergenceError);
}

TEST_CASE("nonnegative projection keeps factors nonnegative") {
  Hyperparams hp = tiny_hp();
  hp.nonneg_projection = true;
  const auto [model, trace] = train(tiny_srn(), hp);
  for (double v : model.p.values()) CHECK(v >= 0.0);
  for (double v : model.q.values()) CHECK(v >= 0.0);
}

TEST_CASE("hyperparameter validation") {
  Hyperparams hp;
  hp.k = 0;
  CHECK_THROWS_AS(hp.validate(), ConfigError);
  hp = {};
  hp.beta = 0.0;
  CHECK_THROWS_AS(hp.validate(), ConfigError);
  hp = {};
  hp.mu = -1.0;
  CHECK_THROWS_AS(hp.validate(), ConfigError);
  CHECK_THROWS_AS(parse_social_gradient("both"), ConfigError);
  CHECK(parse_social_gradient("full") == SocialGradient::kFull);
}

TEST_CASE("model text round trip is exact") {
  std::mt19937_64 rng(8);
  const auto m = oracle::random_instance(rng, 5, 4).model();
  std::stringstream buf;
  write_model(buf, m);
  CHECK(read_model(buf) == m);

  std::istringstream bad("socmf-model v1 1 1 2\n0.5\n0.1 0.2\n");
  CHECK_THROWS_AS(read_model(bad), DataError);
  std::istringstream wrong("not-a-model\n");
  CHECK_THROWS_AS(read_model(wrong), DataError);
}

TEST_CASE("mean tie distance") {
  FactorModel m{Matrix(2, 2), Matrix(0, 2)};
  m.p(0, 0) = 3.0;
  m.p(1, 1) = 4.0;
  CHECK(mean_tie_distance(m, SocialGraph(2, {{UserId{0}, UserId{1}}})) == 5.0);
  CHECK(mean_tie_distance(m, SocialGraph(2, {})) == 0.0);
}
