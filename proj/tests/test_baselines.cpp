#include <doctest.h>

#include <random>

#include "oracles.hpp"
#include "socmf/baselines.hpp"
#include "socmf/error.hpp"
#include "socmf/evaluation.hpp"

using namespace socmf;

TEST_CASE("item mean of two ratings") {
  const RatingsTable t(2, 1, {{UserId{0}, ItemId{0}, 2.0}, {UserId{1}, ItemId{0}, 4.0}});
  const auto m = fit_naive(t);
  CHECK(predict_naive(m, ItemId{0}) == 3.0);
}

TEST_CASE("fallback chain: item mean, global mean, scale midpoint") {
  const RatingsTable t(2, 3, {{UserId{0}, ItemId{0}, 2.0}, {UserId{1}, ItemId{1}, 5.0}});
  const auto m = fit_naive(t);
  CHECK(predict_naive(m, ItemId{0}) == 2.0);
  CHECK(predict_naive(m, ItemId{2}) == 3.5);

  const auto empty = fit_naive(RatingsTable(1, 2, {}), RatingScale{1.0, 5.0});
  CHECK(predict_naive(empty, ItemId{1}) == 3.0);
  const auto wide = fit_naive(RatingsTable(1, 2, {}), RatingScale{0.0, 10.0});
  CHECK(predict_naive(wide, ItemId{0}) == 5.0);
  CHECK_THROWS_AS(predict_naive(empty, ItemId{2}), DataError);
}

TEST_CASE("predictor output does not depend on the user") {
  std::mt19937_64 rng(2);
  const auto d = oracle::random_instance(rng, 6);
  const auto m = fit_naive(d.srn().ratings());
  const auto predictor = naive_predictor(m);
  for (std::uint32_t j = 0; j < d.n_items; ++j) {
    const auto first = predictor(UserId{0}, ItemId{j});
    for (std::uint32_t x = 1; x < 10; ++x) CHECK(predictor(UserId{x}, ItemId{j}) == first);
  }
}

TEST_CASE("naive means agree with the dense oracle") {
  std::mt19937_64 rng(41);
  for (int trial = 0; trial < 200; ++trial) {
    const auto d = oracle::random_instance(rng, 6, 1, 0.3);
    const auto expected = oracle::naive_means(d);
    const auto m = fit_naive(d.srn().ratings());
    for (std::size_t j = 0; j < d.n_items; ++j) {
      const double want = expected.item[j] ? *expected.item[j]
                          : expected.global ? *expected.global
                                            : 3.0;
      CHECK(predict_naive(m, ItemId{static_cast<std::uint32_t>(j)}) ==
            doctest::Approx(want).epsilon(1e-12));
    }
  }
}

TEST_CASE("predictions stay within the observed rating range") {
  std::mt19937_64 rng(43);
  for (int trial = 0; trial < 100; ++trial) {
    const auto d = oracle::random_instance(rng, 6, 1, 0.4);
    const auto srn = d.srn();
    const auto& table = srn.ratings();
    if (table.empty()) continue;
    double lo = 1e300, hi = -1e300;
    for (const Rating& r : table.entries()) {
      lo = std::min(lo, r.value);
      hi = std::max(hi, r.value);
    }
    const auto m = fit_naive(table);
    for (std::uint32_t j = 0; j < d.n_items; ++j) {
      const double v = predict_naive(m, ItemId{j});
      CHECK(v >= lo);
      CHECK(v <= hi);
    }
  }
}
