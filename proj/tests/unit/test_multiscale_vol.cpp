#include <doctest.h>

#include <boost/math/distributions/chi_squared.hpp>

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <vector>

#include "../test_util.hpp"
#include "lrsim/errors.hpp"
#include "lrsim/multiscale_vol.hpp"
#include "lrsim/rng.hpp"
#include "lrsim/stats_core.hpp"

using namespace lrsim;
using namespace lrsim::msvol;

namespace {

/// Every family interval checked against the chi-squared band with Boost
/// quantiles computed here, independently of the library's cache.
bool feasible_everywhere(const std::vector<double>& r, const std::vector<double>& sigma, const IntervalFamily& fam,
                         double alpha_n) {
  for (const auto& iv : fam.intervals) {
    double s = 0.0;
    for (auto t = iv.first; t <= iv.last; ++t) s += r[t] * r[t] / (sigma[t] * sigma[t]);
    const boost::math::chi_squared d(static_cast<double>(iv.length()));
    const double lo = boost::math::quantile(d, (1.0 - alpha_n) / 2.0);
    const double hi = boost::math::quantile(boost::math::complement(d, (1.0 - alpha_n) / 2.0));
    if (s < lo || s > hi) return false;
  }
  return true;
}

/// Minimum segment count over all 2^(n-1) segmentations with RMS levels.
std::size_t exhaustive_minimum(const std::vector<double>& r, const IntervalFamily& fam, double alpha_n) {
  const std::size_t n = r.size();
  std::size_t best = n + 1;
  for (std::size_t mask = 0; mask < (std::size_t{1} << (n - 1)); ++mask) {
    std::vector<std::size_t> starts{0};
    for (std::size_t i = 1; i < n; ++i)
      if (mask >> (i - 1) & 1U) starts.push_back(i);
    if (starts.size() >= best) continue;
    const auto vol = PiecewiseVolatility::from_starts(r, starts, alpha_n);
    if (feasible_everywhere(r, vol.expand(), fam, alpha_n)) best = starts.size();
  }
  return best;
}

std::vector<double> regime_series(std::size_t n, std::mt19937_64& eng) {
  std::uniform_real_distribution<double> scale(0.0, 4.0);
  std::normal_distribution<double> z;
  std::uniform_int_distribution<std::size_t> breaks(0, 3);
  std::vector<double> sigma(n, std::exp(scale(eng)));
  for (std::size_t b = breaks(eng); b > 0; --b) {
    const auto at = std::uniform_int_distribution<std::size_t>(1, n - 1)(eng);
    const double level = std::exp(scale(eng));
    for (auto t = at; t < n; ++t) sigma[t] = level;
  }
  std::vector<double> r(n);
  for (std::size_t t = 0; t < n; ++t) {
    r[t] = sigma[t] * z(eng);
    if (r[t] == 0.0) r[t] = 1e-3;
  }
  return r;
}

}  // namespace

TEST_SUITE("multiscale_vol") {

TEST_CASE("interval family") {
  SUBCASE("n = 2") {
    const auto f = build_interval_family(2);
    const std::set<std::pair<std::size_t, std::size_t>> got = [&] {
      std::set<std::pair<std::size_t, std::size_t>> s;
      for (const auto& iv : f.intervals) s.insert({iv.first, iv.last});
      return s;
    }();
    CHECK(got == std::set<std::pair<std::size_t, std::size_t>>{{0, 0}, {1, 1}, {0, 1}});
  }
  SUBCASE("sizes") {
    CHECK(build_interval_family(8).intervals.size() <= 32);
    const std::size_t n = 22381;
    const auto f = build_interval_family(n);
    CHECK(static_cast<double>(f.intervals.size()) < 4.0 * n * std::log2(static_cast<double>(n)));
    CHECK(f.intervals.size() >= n);
    for (const auto& iv : f.intervals) CHECK_FALSE(iv.last >= n);
  }
  SUBCASE("all singletons and dyadic lengths present") {
    const auto f = build_interval_family(100);
    std::set<std::size_t> singles, lengths;
    for (const auto& iv : f.intervals) {
      if (iv.length() == 1) singles.insert(iv.first);
      lengths.insert(iv.length());
    }
    CHECK(singles.size() == 100);
    CHECK(lengths == std::set<std::size_t>{1, 2, 4, 8, 16, 32, 64});
  }
}

TEST_CASE("chi-squared band") {
  const ChiSquareBand band(0.999);
  const boost::math::chi_squared d1(1.0), d50(50.0);
  CHECK(band.lower(1) == doctest::Approx(boost::math::quantile(d1, 0.0005)).epsilon(1e-10));
  CHECK(band.upper(50) == doctest::Approx(boost::math::quantile(d50, 0.9995)).epsilon(1e-10));
}

TEST_CASE("bounds_satisfied") {
  SUBCASE("singleton bound instantiation") {
    const double a = 0.999;
    const boost::math::chi_squared d(1.0);
    const double lo = boost::math::quantile(d, (1 - a) / 2), hi = boost::math::quantile(d, (1 + a) / 2);
    const IntervalFamily fam{1, {{0, 0}}, "single"};
    for (double x2 : {lo * 0.99, lo * 1.01, 1.0, hi * 0.99, hi * 1.01}) {
      const std::vector<double> r{std::sqrt(x2)};
      const PiecewiseVolatility vol{1, {0}, {1.0}, a};
      CHECK(bounds_satisfied(r, vol, fam, a).satisfied == (x2 >= lo && x2 <= hi));
    }
  }
  SUBCASE("inflated levels violate the full interval from below") {
    const auto r = testutil::normals(1000, 3, 0.02);
    const PiecewiseVolatility vol{1000, {0}, {2.0}, 0.999};
    const IntervalFamily full{1000, {{0, 999}}, "full"};
    const auto check = bounds_satisfied(r, vol, full, 0.999);
    REQUIRE_FALSE(check.satisfied);
    CHECK(check.first_violation->first == 0);
    CHECK(check.first_violation->last == 999);
    const boost::math::chi_squared d(1000.0);
    CHECK(check.statistic < boost::math::quantile(d, 0.0005));
  }
  SUBCASE("true volatility: per-interval violation rate is 1 - alpha_n") {
    // With ~3n intervals at level 0.999 the whole family is rarely satisfied
    // simultaneously; the per-interval rate is the checkable quantity.
    const std::size_t n = 1000;
    const auto fam = build_interval_family(n);
    const boost::math::chi_squared d1(1.0);
    std::size_t violations = 0, trials = 0, all_ok = 0;
    for (std::uint64_t rep = 0; rep < 200; ++rep) {
      const auto r = testutil::normals(n, 1000 + rep, 0.7);
      const PiecewiseVolatility vol{n, {0}, {0.7}, 0.999};
      if (bounds_satisfied(r, vol, fam, 0.999).satisfied) ++all_ok;
      for (double v : r) {
        const double x = v * v / 0.49;
        violations += (x < boost::math::quantile(d1, 0.0005) || x > boost::math::quantile(d1, 0.9995)) ? 1 : 0;
        ++trials;
      }
    }
    CHECK(static_cast<double>(violations) / trials == doctest::Approx(0.001).epsilon(0.25));
    CHECK(static_cast<double>(all_ok) / 200.0 < std::pow(0.999, 1000.0) + 0.1);
  }
  CHECK_THROWS_AS((void)bounds_satisfied(std::vector<double>{1, 2}, PiecewiseVolatility{3, {0}, {1}, 0.9},
                                         build_interval_family(2), 0.9),
                  std::invalid_argument);
}

TEST_CASE("segmentation minimality against exhaustive search") {
  std::mt19937_64 eng(42);
  for (int rep = 0; rep < 150; ++rep) {
    const std::size_t n = std::uniform_int_distribution<std::size_t>(2, 12)(eng);
    const auto r = regime_series(n, eng);
    const double alpha_n = std::vector<double>{0.5, 0.8, 0.9, 0.99}[static_cast<std::size_t>(rep % 4)];
    SUBCASE("singleton and full family: exact minimum") {
      const auto fam = singleton_and_full_family(n);
      const auto vol = estimate_piecewise_vol(r, {0.9, alpha_n}, fam);
      CHECK(vol.segment_count() == exhaustive_minimum(r, fam, alpha_n));
    }
    SUBCASE("dyadic family: feasible and never below the minimum") {
      const auto fam = build_interval_family(n);
      const auto vol = estimate_piecewise_vol(r, {0.9, alpha_n}, fam);
      CHECK(feasible_everywhere(r, vol.expand(), fam, alpha_n));
      CHECK(vol.segment_count() >= exhaustive_minimum(r, fam, alpha_n));
    }
  }
}

TEST_CASE("estimate_piecewise_vol properties") {
  std::mt19937_64 eng(8);
  std::normal_distribution<double> z;
  std::vector<double> r(3000);
  for (std::size_t t = 0; t < r.size(); ++t) r[t] = (t < 1000 ? 0.01 : t < 2000 ? 0.04 : 0.015) * z(eng);
  const MultiscaleConfig cfg{0.9, 0.9999};
  const auto vol = estimate_piecewise_vol(r, cfg);

  SUBCASE("partition and levels") {
    REQUIRE(vol.starts.front() == 0);
    std::size_t total = 0;
    for (std::size_t k = 0; k < vol.segment_count(); ++k) {
      CHECK(vol.segment_end(k) > vol.starts[k]);
      total += vol.segment_end(k) - vol.starts[k];
      double ss = 0.0;
      for (auto t = vol.starts[k]; t < vol.segment_end(k); ++t) ss += r[t] * r[t];
      const double rms = std::sqrt(ss / static_cast<double>(vol.segment_end(k) - vol.starts[k]));
      CHECK(vol.levels[k] > 0.0);
      CHECK(std::abs(vol.levels[k] - rms) / rms < 1e-10);
    }
    CHECK(total == r.size());
    CHECK(vol.levels.size() == vol.starts.size());
  }
  SUBCASE("regime changes are found") {
    CHECK(vol.segment_count() >= 3);
    const auto sojourn = sojourn_curve(vol);
    std::size_t sum = 0;
    for (const auto& s : sojourn) sum += s.length;
    CHECK(sum == r.size());
    const auto near = [&](std::size_t at) {
      return std::any_of(vol.starts.begin(), vol.starts.end(),
                         [&](std::size_t s) { return s + 60 >= at && s <= at + 60; });
    };
    CHECK(near(1000));
    CHECK(near(2000));
  }
  SUBCASE("feasible under the same configuration") {
    CHECK(bounds_satisfied(r, vol, build_interval_family(r.size()), cfg.alpha_n).satisfied);
    CHECK(feasible_everywhere(r, vol.expand(), build_interval_family(r.size()), cfg.alpha_n));
  }
  SUBCASE("scale equivariance") {
    std::vector<double> scaled(r);
    for (auto& v : scaled) v *= -7.5;
    const auto vs = estimate_piecewise_vol(scaled, cfg);
    CHECK(vs.starts == vol.starts);
    for (std::size_t k = 0; k < vol.segment_count(); ++k)
      CHECK(vs.levels[k] == doctest::Approx(7.5 * vol.levels[k]).epsilon(1e-12));
  }
}

TEST_CASE("monotonicity in alpha_n") {
  std::mt19937_64 eng(99);
  std::normal_distribution<double> z;
  for (int rep = 0; rep < 5; ++rep) {
    std::vector<double> r(1500);
    double level = 0.01;
    for (std::size_t t = 0; t < r.size(); ++t) {
      if (t % 300 == 0) level = 0.005 + 0.02 * std::abs(z(eng));
      r[t] = level * z(eng);
    }
    std::size_t prev = 0;
    for (double a : {0.9999999, 0.99999, 0.999, 0.99, 0.9}) {
      const auto k = estimate_piecewise_vol(r, {0.9, a}).segment_count();
      CHECK(k >= prev);
      prev = k;
    }
  }
}

TEST_CASE("white noise is usually one segment") {
  std::size_t single = 0;
  for (std::uint64_t rep = 0; rep < 50; ++rep)
    if (estimate_piecewise_vol(testutil::normals(10, rep), {0.9, 0.99}).segment_count() == 1) ++single;
  CHECK(single >= 40);
}

TEST_CASE("calibration") {
  SUBCASE("worker count does not change the result") {
    const auto a = calibrate_alpha_n(200, 0.9, 200, 5, 1);
    const auto b = calibrate_alpha_n(200, 0.9, 200, 5, 3);
    CHECK(a.alpha_n == b.alpha_n);
    CHECK(a.tails == b.tails);
  }
  SUBCASE("alpha towards 1 pushes alpha_n towards 1") {
    const auto lo = calibrate_alpha_n(300, 0.5, 400, 1);
    const auto mid = calibrate_alpha_n(300, 0.9, 400, 1);
    const auto hi = calibrate_alpha_n(300, 0.99, 400, 1);
    CHECK(lo.alpha_n < mid.alpha_n);
    CHECK(mid.alpha_n < hi.alpha_n);
    CHECK(hi.alpha_n < 1.0);
  }
  SUBCASE("defining property on the calibration sample") {
    const auto cal = calibrate_alpha_n(300, 0.9, 500, 17);
    const auto fam = build_interval_family(300);
    std::size_t single = 0;
    for (std::size_t rep = 0; rep < 500; ++rep) {
      Rng rng(derive_seed(17, {rep}));
      std::vector<double> z(300);
      for (auto& v : z) v = rng.normal();
      if (estimate_piecewise_vol(z, {0.9, cal.alpha_n}, fam).segment_count() == 1) ++single;
    }
    CHECK(single >= 450);
    CHECK(single <= 452);
  }
  SUBCASE("single-interval tail is consistent with the bounds") {
    const auto z = testutil::normals(256, 4);
    const auto fam = build_interval_family(256);
    const double tail = single_interval_tail(z, fam);
    const auto one = PiecewiseVolatility::from_starts(z, {0}, 1.0 - tail * 0.999);
    CHECK(bounds_satisfied(z, one, fam, 1.0 - tail * 0.999).satisfied);
    CHECK_FALSE(bounds_satisfied(z, one, fam, 1.0 - tail * 1.001).satisfied);
  }
  CHECK_THROWS_AS((void)calibrate_alpha_n(100, 0.9, 10, 1), std::invalid_argument);
}

TEST_CASE("residual diagnostics") {
  SUBCASE("true volatility gives Gaussian kurtosis") {
    const std::size_t n = 100000;
    std::mt19937_64 eng(6);
    std::normal_distribution<double> z;
    std::vector<double> r(n);
    PiecewiseVolatility vol{n, {0, 40000, 70000}, {0.01, 0.03, 0.02}, 0.9};
    const auto sigma = vol.expand();
    for (std::size_t t = 0; t < n; ++t) r[t] = sigma[t] * z(eng);
    const auto d = residual_diagnostics(r, vol);
    CHECK(std::abs(d.kurtosis - 3.0) < 0.1);
    CHECK(d.reference_kurtosis == 3.0);
  }
  SUBCASE("unit volatility on a t5 sample") {
    std::mt19937_64 eng(7);
    std::student_t_distribution<double> t5(5.0);
    std::vector<double> r(20000);
    for (auto& v : r) v = t5(eng);
    const PiecewiseVolatility vol{r.size(), {0}, {1.0}, 0.9};
    const auto d = residual_diagnostics(r, vol, Noise::student_t, 5.0);
    CHECK(d.kurtosis == doctest::Approx(stats::kurtosis(r)).epsilon(1e-12));
    CHECK(d.reference_kurtosis == doctest::Approx(9.0));
  }
}

TEST_CASE("sojourn curve and CSV exports") {
  const std::vector<double> r{1, -1, 2, -2, 2, 1, 1, -1, 1, 1};
  const auto one = PiecewiseVolatility::from_starts(r, {0}, 0.9);
  const auto s1 = sojourn_curve(one);
  REQUIRE(s1.size() == 1);
  CHECK(s1[0].length == 10);
  const auto two = PiecewiseVolatility::from_starts(r, {0, 3}, 0.9);
  const auto s2 = sojourn_curve(two);
  REQUIRE(s2.size() == 2);
  CHECK(s2[0].length == 3);
  CHECK(s2[1].length == 7);
  CHECK(s2[0].level == doctest::Approx(std::sqrt(2.0)));

  testutil::TempDir dir;
  save_segments_csv(dir.file("seg.csv"), two);
  CHECK(testutil::read_file(dir.file("seg.csv")).rfind("start,end,level\n1,3,", 0) == 0);
  save_step_csv(dir.file("step.csv"), r, two);
  CHECK(testutil::read_file(dir.file("step.csv")).rfind("t,abs_return,level\n1,1,", 0) == 0);
  save_sojourn_csv(dir.file("soj.csv"), two);
  CHECK(testutil::read_file(dir.file("soj.csv")).find(",7\n") != std::string::npos);
}

}
