#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "../test_util.hpp"
#include "lrsim/errors.hpp"
#include "lrsim/feature_harness.hpp"
#include "lrsim/multiscale_vol.hpp"
#include "lrsim/rng.hpp"
#include "lrsim/stats_core.hpp"

using namespace lrsim;

namespace {

class NormalModel final : public ReturnModel {
 public:
  explicit NormalModel(double scale) : scale_(scale) {}
  std::vector<double> simulate(std::size_t n, std::uint64_t seed) const override {
    Rng rng(seed);
    std::vector<double> r(n);
    for (auto& v : r) v = scale_ * rng.normal();
    return r;
  }
  std::string label() const override { return "normal"; }

 private:
  double scale_;
};

class Resampler final : public ReturnModel {
 public:
  explicit Resampler(std::vector<double> data) : data_(std::move(data)) {}
  std::vector<double> simulate(std::size_t, std::uint64_t) const override { return data_; }
  std::string label() const override { return "exact"; }

 private:
  std::vector<double> data_;
};

class Failing final : public ReturnModel {
 public:
  std::vector<double> simulate(std::size_t n, std::uint64_t seed) const override {
    if (seed % 7 == 3) throw std::runtime_error("boom");
    return std::vector<double>(n, 0.01);
  }
  std::string label() const override { return "failing"; }
};

HarnessConfig small_config(unsigned workers = 1) {
  HarnessConfig cfg;
  cfg.nsim = 40;
  cfg.nsim_reference = 24;
  cfg.lags = 20;
  cfg.alpha_n = 0.999;
  cfg.master_seed = 99;
  cfg.workers = workers;
  return cfg;
}

}  // namespace

TEST_SUITE("feature_harness") {

TEST_CASE("feature metadata") {
  const std::vector<int> one{5, 10, 11};
  for (int id = 1; id <= 11; ++id) {
    const bool is_one = std::find(one.begin(), one.end(), id) != one.end();
    CHECK((feature_sidedness(id) == Sided::one) == is_one);
  }
  CHECK(feature_name(1) == "sign_acf1");
  CHECK(feature_name(11) == "quantile_kuiper");
  CHECK_THROWS_AS((void)feature_name(12), std::invalid_argument);
}

TEST_CASE("two-sided p-values") {
  const std::vector<double> sims{1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  CHECK(two_sided_pvalue(5.0, sims) == 0.5);
  CHECK(two_sided_pvalue(0.0, sims) == 0.0);
  CHECK(two_sided_pvalue(11.0, sims) == 0.0);
  CHECK(two_sided_pvalue(2.0, sims) == doctest::Approx(0.2));
  CHECK(two_sided_pvalue(9.5, sims) == doctest::Approx(0.1));
  const std::vector<double> odd{3, 1, 2, 5, 4};
  CHECK(two_sided_pvalue(3.0, odd) == 0.5);
  CHECK_THROWS_AS((void)two_sided_pvalue(1.0, std::vector<double>{}), std::invalid_argument);
}

TEST_CASE("one-sided p-values") {
  const std::vector<double> sims{1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  CHECK(one_sided_pvalue(0.5, sims) == 1.0);
  CHECK(one_sided_pvalue(10.5, sims) == 0.0);
  CHECK(one_sided_pvalue(8.0, sims) == doctest::Approx(0.3));
  CHECK(one_sided_pvalue(1.0, sims) == 1.0);
}

TEST_CASE("p-values ignore the order of the simulations") {
  auto sims = testutil::normals(501, 4);
  std::mt19937_64 eng(1);
  const double p2 = two_sided_pvalue(0.3, sims), p1 = one_sided_pvalue(0.3, sims);
  for (int k = 0; k < 20; ++k) {
    std::shuffle(sims.begin(), sims.end(), eng);
    CHECK(two_sided_pvalue(0.3, sims) == p2);
    CHECK(one_sided_pvalue(0.3, sims) == p1);
  }
}

TEST_CASE("summaries") {
  const std::vector<double> sims{4, 1, 3, 2, 5};
  const auto s = summarize(sims);
  CHECK(s.mean == 3.0);
  CHECK(s.sd == doctest::Approx(std::sqrt(2.5)));
  CHECK(s.q05 == doctest::Approx(1.2));
  CHECK(s.q95 == doctest::Approx(4.8));
}

TEST_CASE("direct features agree with stats_core") {
  const auto r = testutil::normals(400, 7, 0.01);
  const auto f = direct_features(r, ReturnKind::log, 0.999);
  CHECK(f[0] == stats::sign_acf1(r));
  CHECK(f[1] == doctest::Approx(stats::heavy_tail_measure(r)).epsilon(1e-12));
  CHECK(f[2] == stats::kuiper_asymmetry(r).distance);
  CHECK(f[5] == stats::abs_acf(r, 1).values[0]);
  CHECK(f[6] == stats::end_return(r, ReturnKind::log));
  CHECK(f[7] == stats::abs_moments(r).mean_abs);
  CHECK(f[8] == stats::abs_moments(r).mean_sq);
  CHECK(f[3] >= 1.0);
}

TEST_CASE("exact resampler gives maximal p-values") {
  const auto r = testutil::normals(300, 3, 0.01);
  const ReturnSeries data(r);
  const Resampler model(r);
  const auto report = evaluate_features(data, model, small_config());
  REQUIRE(report.features.size() == 11);
  for (const auto& f : report.features) {
    CHECK(f.p_value == (f.sided == Sided::two ? 0.5 : 1.0));
    CHECK(f.sims.q05 == f.empirical);
    CHECK(f.sims.q95 == f.empirical);
    CHECK(f.sims.sd <= 1e-12 * std::abs(f.empirical));
  }
  CHECK_NOTHROW(report.validate());
  CHECK(report.min_p_value() == 0.5);
}

TEST_CASE("a mis-scaled model is rejected on scale features") {
  const ReturnSeries data(testutil::normals(300, 3, 0.01));
  const NormalModel model(0.02);
  const auto report = evaluate_features(data, model, small_config());
  CHECK(report.features[7].p_value == 0.0);
  CHECK(report.features[8].p_value == 0.0);
  CHECK(report.features[9].p_value == 0.0);
  CHECK(report.features[1].p_value > 0.0);
}

TEST_CASE("reproducible across worker counts") {
  const ReturnSeries data(testutil::normals(300, 5, 0.01));
  const NormalModel model(0.01);
  const auto a = evaluate_features(data, model, small_config(1));
  const auto b = evaluate_features(data, model, small_config(3));
  CHECK(a.features == b.features);
  CHECK(render_report(a, ReportFormat::json) == render_report(b, ReportFormat::json));
  auto cfg = small_config(2);
  cfg.master_seed = 100;
  CHECK_FALSE(evaluate_features(data, model, cfg).features == a.features);
}

TEST_CASE("calibrated alpha_n is used when none is given") {
  const ReturnSeries data(testutil::normals(200, 5, 0.01));
  const NormalModel model(0.01);
  auto cfg = small_config();
  cfg.alpha_n.reset();
  cfg.calib_nsim = 200;
  const auto report = evaluate_features(data, model, cfg);
  const auto cal = msvol::calibrate_alpha_n(200, 0.9, 200, derive_seed(99, {3}));
  CHECK(report.alpha_n == cal.alpha_n);
}

TEST_CASE("preconditions and failures") {
  const ReturnSeries data(testutil::normals(100, 5, 0.01));
  const NormalModel model(0.01);
  auto cfg = small_config();
  cfg.nsim = 0;
  CHECK_THROWS_AS((void)evaluate_features(data, model, cfg), std::invalid_argument);
  cfg = small_config();
  cfg.lags = 100;
  CHECK_THROWS_AS((void)evaluate_features(data, model, cfg), std::invalid_argument);
  try {
    (void)evaluate_features(data, Failing{}, small_config());
    FAIL("expected a model failure");
  } catch (const NumericalError& e) {
    CHECK(std::string(e.what()).find("seed") != std::string::npos);
  }
}

TEST_CASE("rendering") {
  const ReturnSeries data(testutil::normals(300, 5, 0.01), {}, "noise");
  const NormalModel model(0.01);
  const auto report = evaluate_features(data, model, small_config());

  SUBCASE("text layout") {
    const auto text = render_report(report, ReportFormat::text);
    CHECK(text.find("1*    2*    3*    4*     5    6*    7*    8*    9*    10    11") != std::string::npos);
    CHECK(text.find("model normal") != std::string::npos);
  }
  SUBCASE("csv") {
    const auto csv = render_report(report, ReportFormat::csv);
    CHECK(csv.rfind("id,name,sided,empirical,q05,mean,q95,sd,p_value\n1,sign_acf1,two,", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 12);
  }
  SUBCASE("json round trip") {
    const auto back = report_from_json(render_report(report, ReportFormat::json));
    CHECK(back.features == report.features);
    CHECK(back.model_label == report.model_label);
    CHECK(back.data_label == "noise");
    CHECK(back.alpha_n == report.alpha_n);
    CHECK(back.master_seed == report.master_seed);
    CHECK(back.nsim_reference == 24);
  }
  SUBCASE("empty report is refused") {
    FeatureReport empty;
    CHECK_THROWS_AS((void)render_report(empty, ReportFormat::text), std::invalid_argument);
    auto broken = report;
    broken.features[4].sided = Sided::two;
    CHECK_THROWS_AS((void)render_report(broken, ReportFormat::csv), std::invalid_argument);
  }
  CHECK_THROWS_AS((void)report_from_json("{not json"), DataError);
  CHECK_THROWS_AS((void)report_format_from_string("xml"), ConfigError);
}

}
