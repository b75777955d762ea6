#include "qcde/empirical.hpp"
#include "qcde/numerics.hpp"

#include <doctest.h>

#include <stdexcept>

#include <algorithm>
#include <cmath>
#include <random>

using namespace qcde;

TEST_CASE("ecdf examples")
{
  const std::vector<double> d{ 1, 2, 3 };
  const auto f = ecdf_fit(d, false);
  CHECK(f(2.0) == doctest::Approx(2.0 / 3.0));
  CHECK(f(0.5) == 0.0);
  CHECK(f(3.0) == 1.0);
  const auto g = ecdf_fit(d, true);
  CHECK(g(3.0) == doctest::Approx(0.75));
  CHECK(g(100.0) == doctest::Approx(0.75));
  CHECK_THROWS_AS(ecdf_fit(std::vector<double>{}, false), std::invalid_argument);
}

TEST_CASE("ecdf matches brute-force counting")
{
  std::mt19937_64 rng(11);
  std::normal_distribution<double> nd;
  std::vector<double> data(257);
  for (auto& v : data) {
    v = std::round(nd(rng) * 4.0) / 4.0; // force ties
  }
  const Ecdf f(data, false);
  const Ecdf fr(data, true);
  for (int q = 0; q < 1000; ++q) {
    const double x = nd(rng) * 1.5;
    const auto count = std::count_if(
      data.begin(), data.end(), [&](double v) { return v <= x; });
    CHECK(f(x) == static_cast<double>(count) / 257.0);
    CHECK(fr(x) == static_cast<double>(count) / 258.0);
    CHECK(f(x) >= 0.0);
    CHECK(f(x) <= 1.0);
  }
}

TEST_CASE("pseudo-observations")
{
  {
    const PairedSample s({ 1, 2 }, { 10, 20 });
    const auto p = pseudo_observations(s, true);
    REQUIRE(p.size() == 2);
    CHECK(p[0].u == doctest::Approx(1.0 / 3.0));
    CHECK(p[0].v == doctest::Approx(1.0 / 3.0));
    CHECK(p[1].u == doctest::Approx(2.0 / 3.0));
    CHECK(p[1].v == doctest::Approx(2.0 / 3.0));
  }
  {
    const PairedSample s({ 3, 1, 2 }, { 20, 10, 30 });
    const auto p = pseudo_observations(s, true);
    CHECK(p[0] == UnitPoint{ 0.75, 0.5 });
    CHECK(p[1] == UnitPoint{ 0.25, 0.25 });
    CHECK(p[2] == UnitPoint{ 0.5, 0.75 });
  }
}

TEST_CASE("pseudo-observations are rank-based")
{
  std::mt19937_64 rng(5);
  std::normal_distribution<double> nd;
  std::vector<double> xs(200);
  std::vector<double> ys(200);
  for (std::size_t i = 0; i < xs.size(); ++i) {
    xs[i] = nd(rng);
    ys[i] = xs[i] + nd(rng);
  }
  const auto p = pseudo_observations(PairedSample(xs, ys), true);

  // distinct coordinates: u-multiset is {k / (n + 1)}
  std::vector<double> us;
  for (const auto& q : p) {
    us.push_back(q.u);
    CHECK(q.u >= 1.0 / 201.0);
    CHECK(q.u <= 200.0 / 201.0);
    CHECK(q.v < 1.0);
  }
  std::sort(us.begin(), us.end());
  for (std::size_t k = 0; k < us.size(); ++k) {
    CHECK(us[k] == static_cast<double>(k + 1) / 201.0);
  }

  std::vector<double> ex(xs.size());
  std::transform(xs.begin(), xs.end(), ex.begin(), [](double x) {
    return std::exp(x);
  });
  const auto pe = pseudo_observations(PairedSample(ex, ys), true);
  for (std::size_t i = 0; i < p.size(); ++i) {
    CHECK(pe[i].u == p[i].u);
    CHECK(pe[i].v == p[i].v);
  }
}

TEST_CASE("tied inputs share pseudo-coordinates")
{
  const PairedSample s({ 1, 1, 2 }, { 5, 6, 7 });
  const auto p = pseudo_observations(s, false);
  CHECK(p[0].u == p[1].u);
  CHECK(p[0].u == doctest::Approx(2.0 / 3.0));
}

TEST_CASE("paired sample validation")
{
  CHECK_THROWS_AS(PairedSample({}, {}), std::invalid_argument);
  CHECK_THROWS_AS(PairedSample({ 1, 2 }, { 1 }), std::invalid_argument);
  CHECK_THROWS_AS(PairedSample({ NAN }, { 1 }), std::invalid_argument);
  CHECK_THROWS_AS(PairedSample({ 1 }, { INFINITY }), std::invalid_argument);
}

TEST_CASE("ks statistic examples")
{
  auto identity = [](double x) { return std::clamp(x, 0.0, 1.0); };
  CHECK(ks_statistic(std::vector<double>{ 0.5 }, identity) ==
        doctest::Approx(0.5));
  // one-sided gaps at 0.2: 0.2, 0.3; at 0.8: 0.3, 0.2
  CHECK(ks_statistic(std::vector<double>{ 0.2, 0.8 }, identity) ==
        doctest::Approx(0.3));
  for (int n : { 1, 7, 50 }) {
    std::vector<double> q;
    for (int i = 1; i <= n; ++i) {
      q.push_back((i - 0.5) / n);
    }
    CHECK(ks_statistic(q, identity) == doctest::Approx(0.5 / n));
  }
}

TEST_CASE("sqrt(n) KS of uniform samples is bounded in probability")
{
  auto identity = [](double x) { return std::clamp(x, 0.0, 1.0); };
  std::vector<double> scaled;
  for (int r = 0; r < 200; ++r) {
    std::mt19937_64 rng(1000 + r);
    std::uniform_real_distribution<double> ud;
    std::vector<double> d(500);
    for (auto& v : d) {
      v = ud(rng);
    }
    scaled.push_back(std::sqrt(500.0) * ks_statistic(d, identity));
  }
  CHECK(median(scaled) < 1.5);
}
