#include <doctest.h>

#include <boost/math/distributions/chi_squared.hpp>

#include <cmath>
#include <vector>

#include "../test_util.hpp"
#include "lrsim/errors.hpp"
#include "lrsim/series_io.hpp"

using namespace lrsim;

TEST_SUITE("series_io") {

TEST_CASE("to_returns definitions") {
  SUBCASE("simple returns") {
    PriceSeries p{{1.0, 1.1, 1.21}, {}, "t"};
    const auto r = to_returns(p, ReturnKind::simple);
    REQUIRE(r.size() == 2);
    CHECK(r[0] == doctest::Approx(0.1));
    CHECK(r[1] == doctest::Approx(0.1));
    CHECK(r.zeros_removed() == 0);
  }
  SUBCASE("a single return is not a series") {
    PriceSeries p{{1.0, 1.1}, {}, "t"};
    CHECK_THROWS_AS((void)to_returns(p, ReturnKind::simple), DataError);
  }
  SUBCASE("zero removal is counted") {
    PriceSeries p{{1.0, 1.0, 2.0, 3.0}, {}, "t"};
    const auto r = to_returns(p, ReturnKind::simple);
    REQUIRE(r.size() == 2);
    CHECK(r[0] == doctest::Approx(1.0));
    CHECK(r[1] == doctest::Approx(0.5));
    CHECK(r.zeros_removed() == 1);
  }
  SUBCASE("log returns") {
    PriceSeries p{{1.0, 2.0, 1.0}, {}, "t"};
    const auto r = to_returns(p, ReturnKind::log);
    CHECK(r[0] == doctest::Approx(std::log(2.0)));
    CHECK(r[1] == doctest::Approx(-std::log(2.0)));
    CHECK(r.kind() == ReturnKind::log);
  }
  SUBCASE("23 zeros among 14049 observations leave 14026") {
    std::vector<double> prices{100.0};
    std::mt19937_64 eng(7);
    std::normal_distribution<double> d(0.0, 0.01);
    for (std::size_t i = 0; i < 14049; ++i) {
      const bool zero = i % 600 == 5 && i / 600 < 23;
      prices.push_back(zero ? prices.back() : prices.back() * (1.0 + d(eng)));
    }
    const auto r = to_returns(PriceSeries{prices, {}, "dax-like"}, ReturnKind::simple);
    CHECK(r.zeros_removed() == 23);
    CHECK(r.size() == 14026);
  }
}

TEST_CASE("price path reconstruction from simple returns") {
  std::vector<double> prices{50.0};
  const auto z = testutil::normals(500, 3, 0.02);
  for (double v : z) prices.push_back(prices.back() * (1.0 + v));
  const auto r = to_returns(PriceSeries{prices, {}, ""}, ReturnKind::simple);
  REQUIRE(r.zeros_removed() == 0);
  double p = prices[0];
  for (std::size_t i = 0; i < r.size(); ++i) {
    p *= 1.0 + r[i];
    CHECK(std::abs(p - prices[i + 1]) / prices[i + 1] < 1e-12);
  }
}

TEST_CASE("ReturnSeries invariants") {
  CHECK_THROWS_AS(ReturnSeries({0.1, 0.0, 0.2}), DataError);
  CHECK_THROWS_AS(ReturnSeries({0.1}), DataError);
  CHECK_THROWS_AS(ReturnSeries({0.1, NAN}), DataError);
  const Date d1{std::chrono::year{2000}, std::chrono::month{1}, std::chrono::day{3}};
  const Date d2{std::chrono::year{2000}, std::chrono::month{1}, std::chrono::day{4}};
  CHECK_THROWS_AS(ReturnSeries({0.1, 0.2}, {d2, d1}), DataError);
  CHECK_THROWS_AS(ReturnSeries({0.1, 0.2}, {d1}), DataError);
  CHECK_NOTHROW(ReturnSeries({0.1, 0.2}, {d1, d2}));
}

TEST_CASE("loading CSV files") {
  testutil::TempDir dir;
  SUBCASE("dated returns") {
    testutil::write_file(dir.file("r.csv"), "date,return\n2001-01-02,0.01\n2001-01-03,-0.02\n2001-01-04,0\n2001-01-05,0.03\n");
    const auto r = load_returns(dir.file("r.csv"));
    CHECK(r.size() == 3);
    CHECK(r.zeros_removed() == 1);
    CHECK(r.has_dates());
    CHECK(format_date(r.dates()[2]) == "2001-01-05");
  }
  SUBCASE("single-column returns") {
    testutil::write_file(dir.file("r.csv"), "ret\n0.01\n-0.02\n0.5\n");
    const auto r = load_returns(dir.file("r.csv"));
    CHECK(r.size() == 3);
    CHECK_FALSE(r.has_dates());
  }
  SUBCASE("prices detected by header") {
    testutil::write_file(dir.file("p.csv"), "date,close\n2001-01-02,10\n2001-01-03,11\n2001-01-04,11\n2001-01-05,12.1\n");
    const auto loaded = load_series(dir.file("p.csv"));
    REQUIRE(std::holds_alternative<PriceSeries>(loaded));
    const auto r = load_returns(dir.file("p.csv"));
    CHECK(r.size() == 2);
    CHECK(r[0] == doctest::Approx(0.1));
    CHECK(r.zeros_removed() == 1);
  }
  SUBCASE("semicolon delimiter") {
    testutil::write_file(dir.file("r.csv"), "date;return\n2001-01-02;0.01\n2001-01-03;-0.02\n");
    CsvFormat f;
    f.delimiter = ';';
    CHECK(load_returns(dir.file("r.csv"), f).size() == 2);
  }
  SUBCASE("empty file") {
    testutil::write_file(dir.file("e.csv"), "");
    CHECK_THROWS_WITH_AS((void)load_series(dir.file("e.csv")), doctest::Contains("empty series"), DataError);
  }
  SUBCASE("header only") {
    testutil::write_file(dir.file("e.csv"), "return\n");
    CHECK_THROWS_AS((void)load_series(dir.file("e.csv")), DataError);
  }
  SUBCASE("non-numeric cell at row 7") {
    testutil::write_file(dir.file("bad.csv"), "return\n0.1\n0.2\n0.3\n0.4\n0.5\nabc\n0.7\n");
    try {
      (void)load_series(dir.file("bad.csv"));
      FAIL("expected a parse error");
    } catch (const ParseError& e) {
      CHECK(e.row() == 7);
      CHECK(std::string(e.what()).find("row 7") != std::string::npos);
    }
  }
  SUBCASE("missing file") {
    CHECK_THROWS_AS((void)load_series(dir.file("nope.csv")), DataError);
  }
}

TEST_CASE("save and reload is bit-identical") {
  testutil::TempDir dir;
  auto v = testutil::normals(1000, 11, 0.013);
  v.push_back(1e-300);
  v.push_back(-0.1 / 3.0);
  const ReturnSeries s(v, {}, "x", ReturnKind::log);
  save_returns(dir.file("s.csv"), s);
  CsvFormat f;
  f.content = SeriesContent::returns;
  const auto back = load_returns(dir.file("s.csv"), f);
  REQUIRE(back.size() == s.size());
  for (std::size_t i = 0; i < s.size(); ++i) CHECK(back[i] == s[i]);
}

TEST_CASE("format and parse doubles") {
  for (double v : {0.1, -2.5e-7, 1.0 / 3.0, 123456.789, 5e-324}) CHECK(*parse_double(format_double(v)) == v);
  CHECK_FALSE(parse_double("1,5").has_value());
  CHECK_FALSE(parse_double("").has_value());
  CHECK(*parse_double(" 2.5 ") == 2.5);
}

TEST_CASE("rotation and stationary embedding") {
  const ReturnSeries s({1.0, 2.0, 3.0});
  SUBCASE("offset 0 is the identity") {
    const auto r = rotate(s, 0);
    CHECK(std::vector<double>(r.values().begin(), r.values().end()) == std::vector<double>{1, 2, 3});
  }
  SUBCASE("offset 1") {
    const auto r = rotate(s, 1);
    CHECK(std::vector<double>(r.values().begin(), r.values().end()) == std::vector<double>{2, 3, 1});
  }
  SUBCASE("multiset preserved") {
    const ReturnSeries big(testutil::normals(101, 5));
    auto a = std::vector<double>(big.values().begin(), big.values().end());
    const auto e = stationary_embed(big, 99);
    auto b = std::vector<double>(e.values().begin(), e.values().end());
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    CHECK(a == b);
  }
  SUBCASE("offsets are uniform") {
    constexpr std::size_t n = 5, draws = 100000;
    std::vector<double> counts(n, 0.0);
    for (std::size_t s = 0; s < draws; ++s) counts[embedding_offset(n, s)] += 1.0;
    double chi2 = 0.0;
    const double expected = static_cast<double>(draws) / n;
    for (double c : counts) chi2 += (c - expected) * (c - expected) / expected;
    const boost::math::chi_squared dist(n - 1);
    CHECK(chi2 < boost::math::quantile(dist, 0.999));
  }
}

TEST_CASE("path output layouts") {
  testutil::TempDir dir;
  const std::vector<std::vector<double>> paths{{1.0, 2.0}, {3.0, 4.0}};
  save_paths(dir.file("w.csv"), paths, PathLayout::wide);
  save_paths(dir.file("l.csv"), paths, PathLayout::long_format);
  const auto wide = testutil::read_file(dir.file("w.csv"));
  const auto lng = testutil::read_file(dir.file("l.csv"));
  CHECK(wide.find("1,3") != std::string::npos);
  CHECK(lng.find("run_id,t,value") == 0);
  CHECK(lng.find("1,2,4") != std::string::npos);
}

}
