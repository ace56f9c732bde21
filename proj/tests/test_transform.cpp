#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "ldptail/error.hpp"
#include "ldptail/transform.hpp"

using namespace ldptail;

namespace {

Sample column_sample(std::vector<double> values) {
  Sample s;
  const std::size_t n = values.size();
  s.rows = PointMatrix(n, 1, std::move(values));
  s.column_names = {"x"};
  return s;
}

}  // namespace

TEST_CASE("rank transform of a single column") {
  const PseudoSample p = rank_transform(column_sample({3.0, 1.0, 2.0, 4.0}));
  const std::size_t expected_ranks[] = {3, 1, 2, 4};
  const double expected[] = {0.9808292530117262, 0.1335313926245226, 0.4700036292457356,
                             2.0794415416798357};
  for (std::size_t i = 0; i < 4; ++i) {
    CHECK(p.rank(i, 0) == expected_ranks[i]);
    CHECK(p.points(i, 0) == doctest::Approx(expected[i]).epsilon(1e-15));
    CHECK(p.points(i, 0) == doctest::Approx(-std::log(1.0 - (expected_ranks[i] - 0.5) / 4.0)).epsilon(1e-15));
  }
  CHECK_FALSE(p.has_ties());
}

TEST_CASE("rank transform edge cases") {
  const PseudoSample one = rank_transform(column_sample({7.5}));
  CHECK(one.rank(0, 0) == 1);
  CHECK(one.points(0, 0) == std::log(2.0));

  const PseudoSample tied = rank_transform(column_sample({1.0, 1.0}));
  CHECK(tied.rank(0, 0) == 1);
  CHECK(tied.rank(1, 0) == 2);
  CHECK(tied.has_ties());
  CHECK(tied.tied_columns == std::vector<std::size_t>{0});

  Sample empty;
  empty.rows = PointMatrix(0, 2);
  CHECK_THROWS_AS(rank_transform(empty), ConfigError);
}

TEST_CASE("pseudo observations form the fixed grid and top rank is log 2n") {
  std::mt19937_64 gen(11);
  std::normal_distribution<double> norm;
  const std::size_t n = 500;
  Sample s;
  s.rows = PointMatrix(n, 3);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < 3; ++j) s.rows(i, j) = norm(gen);
  }
  const PseudoSample p = rank_transform(s);
  std::vector<double> grid(n);
  for (std::size_t i = 1; i <= n; ++i) grid[i - 1] = pseudo_exponential(i, n);
  for (std::size_t j = 0; j < 3; ++j) {
    std::vector<double> col = p.points.column(j);
    std::sort(col.begin(), col.end());
    CHECK(col == grid);
    CHECK(col.back() == -std::log(1.0 / (2.0 * n)));
    std::vector<std::size_t> ranks;
    for (std::size_t i = 0; i < n; ++i) ranks.push_back(p.rank(i, j));
    std::sort(ranks.begin(), ranks.end());
    for (std::size_t i = 0; i < n; ++i) CHECK(ranks[i] == i + 1);
  }
  for (double v : p.points.data()) {
    CHECK(v > 0.0);
    CHECK(v <= std::log(2.0 * n));
  }

  // Invariance under strictly increasing per-column maps.
  Sample t = s;
  for (std::size_t i = 0; i < n; ++i) {
    t.rows(i, 0) = std::exp(s.rows(i, 0));
    t.rows(i, 1) = s.rows(i, 1) * s.rows(i, 1) * s.rows(i, 1) + 4.0;
    t.rows(i, 2) = std::atan(s.rows(i, 2));
  }
  CHECK(rank_transform(t).points == p.points);
}

TEST_CASE("margin maps") {
  const double in[] = {1.0, 2.0};
  double out[2];
  MarginMap::identity().apply(in, out);
  CHECK(out[0] == 1.0);
  CHECK(out[1] == 2.0);
  const MarginMap sq = MarginMap::per_coordinate({[](double x) { return x * x; }, [](double x) { return -x; }});
  sq.apply(in, out);
  CHECK(out[0] == 1.0);
  CHECK(out[1] == -2.0);
  double alias[] = {3.0, 4.0};
  sq.apply(alias, alias);
  CHECK(alias[0] == 9.0);
  CHECK(alias[1] == -4.0);
  const double three[] = {1.0, 2.0, 3.0};
  double out3[3];
  CHECK_THROWS_AS(sq.apply(three, out3), ConfigError);
}

TEST_CASE("fitted quantile map is coordinatewise") {
  const std::size_t n = 4096;
  Sample s;
  s.rows = PointMatrix(n, 2);
  for (std::size_t k = 1; k <= n; ++k) {
    const double z = std::log(static_cast<double>(n) / static_cast<double>(k));
    s.rows(n - k, 0) = std::exp(z);
    s.rows(k - 1, 1) = std::exp(z);  // same marginal, reversed row order
  }
  const FittedMarginals fm = fit_marginals(s, 16, 2.0);
  const double y_n = fm.fits[0].y_n;
  const double x[] = {2.0 * y_n, y_n};
  const std::vector<double> q = q_hat_map(fm.fits, fm.margs, x);
  CHECK(q[0] == doctest::Approx(16.0).epsilon(1e-12));
  CHECK(q[1] == doctest::Approx(4.0).epsilon(1e-12));
  const double zero[] = {0.0, 0.0};
  const std::vector<double> mins = q_hat_map(fm.fits, fm.margs, zero);
  CHECK(mins[0] == fm.margs[0].order_stat(1));
  CHECK(mins[1] == fm.margs[1].order_stat(1));

  double via_map[2];
  fm.q_hat().apply(x, via_map);
  CHECK(via_map[0] == q[0]);
  CHECK(via_map[1] == q[1]);
  // m = 1 reduces to quantile_hat.
  const std::vector<double> single = q_hat_map(std::span(fm.fits).first(1), std::span(fm.margs).first(1),
                                               std::span<const double>(x, 1));
  CHECK(single[0] == quantile_hat(fm.fits[0], fm.margs[0], x[0]));
  CHECK_THROWS_AS(q_hat_map(fm.fits, fm.margs, std::span<const double>(x, 1)), ConfigError);
}

TEST_CASE("empirical probability") {
  CHECK(empirical_probability({true, false, false, false}) == 0.25);
  CHECK(empirical_probability({false, false}) == 0.0);
  std::vector<bool> flags(70128, false);
  for (std::size_t i = 0; i < 41; ++i) flags[i * 1000] = true;
  const double p = empirical_probability(flags);
  CHECK(p == 41.0 / 70128.0);
  // Three significant figures of the published ratio.
  CHECK(std::fabs(p - 5.85e-4) < 0.005e-4);
  CHECK_THROWS_AS(empirical_probability({}), ConfigError);
}
