#include <doctest.h>

#include <vector>

#include "../test_util.hpp"
#include "lrsim/errors.hpp"
#include "lrsim/params_io.hpp"

using namespace lrsim;

namespace {

StylizedParams stylized() {
  StylizedParams p;
  p.vol.low.n = 500;
  p.vol.low.mlv = -4.769;
  p.vol.low.pow = 0.8;
  p.vol.low.explained = 0.81;
  p.vol.low.terms = {{3, 0.1 / 3.0, -0.25}, {1, 0.5, 1e-17}};
  p.vol.high.lambda1 = 150.0;
  p.vol.high.start_calm = false;
  p.vol.delta = 0.15;
  p.ret.rho = 0.4;
  p.ret.eta = 0.05;
  p.ret.gamma = 0.9;
  p.ret.eacf1 = 0.0577;
  p.ret.sign_model.edges = {0.001, 0.01, 0.1};
  p.ret.sign_model.pos_freq = {0.55, 0.5, 0.41};
  p.ret.sign_model.requested_bins = 50;
  p.kind = ReturnKind::simple;
  return p;
}

}  // namespace

TEST_SUITE("params_io") {

TEST_CASE("stylized parameters round trip exactly") {
  const auto p = stylized();
  const auto back = std::get<StylizedParams>(params_from_json(params_to_json(p)));
  CHECK(back.vol.low.n == 500);
  CHECK(back.vol.low.mlv == p.vol.low.mlv);
  REQUIRE(back.vol.low.terms.size() == 2);
  CHECK(back.vol.low.terms[0].a == p.vol.low.terms[0].a);
  CHECK(back.vol.low.terms[1].b == 1e-17);
  CHECK(back.vol.high.lambda1 == 150.0);
  CHECK_FALSE(back.vol.high.start_calm);
  CHECK(back.vol.delta == 0.15);
  CHECK(back.ret.eacf1 == 0.0577);
  CHECK(back.ret.sign_model.pos_freq == p.ret.sign_model.pos_freq);
  CHECK(back.kind == ReturnKind::simple);
  const auto a = make_model(p), b = make_model(back);
  CHECK(a->simulate(400, 3) == b->simulate(400, 3));
  CHECK(a->label() == "stylized");
}

TEST_CASE("garch parameters round trip") {
  GarchModelParams g;
  g.params.a0 = 8.32e-7;
  g.params.a1 = 0.08543;
  g.params.b1 = 0.9106;
  g.params.loglik = 1234.5;
  g.options.burn_in = 250;
  g.options.signs = garch::SignScheme{SignModel{{0.01, 0.1}, {0.6, 0.3}, 2}, 0.7, 0.02};
  testutil::TempDir dir;
  save_params(dir.file("g.json"), g);
  const auto loaded = load_params(dir.file("g.json"));
  REQUIRE(std::holds_alternative<GarchModelParams>(loaded));
  const auto& back = std::get<GarchModelParams>(loaded);
  CHECK(back.params.a0 == g.params.a0);
  CHECK(back.params.b1 == g.params.b1);
  CHECK(back.options.burn_in == 250);
  REQUIRE(back.options.signs.has_value());
  CHECK(back.options.signs->gamma == 0.7);
  CHECK(make_model(loaded)->label() == "garch");
  CHECK(make_model(loaded)->simulate(300, 1) == make_model(g)->simulate(300, 1));
  CHECK(params_kind(loaded) == ReturnKind::log);
}

TEST_CASE("bad parameter files") {
  CHECK_THROWS_AS((void)params_from_json("{]"), ConfigError);
  CHECK_THROWS_AS((void)params_from_json(R"({"model_type": "arima"})"), ConfigError);
  CHECK_THROWS_AS((void)params_from_json(R"({"a0": 1e-6})"), ConfigError);
  CHECK_THROWS_AS((void)params_from_json(R"({"model_type": "garch", "a0": -1, "a1": 0.1, "b1": 0.8})"), ConfigError);
  auto p = stylized();
  p.ret.gamma = 2.0;
  CHECK_THROWS_AS((void)params_from_json(params_to_json(p)), ConfigError);
  CHECK_THROWS_AS((void)load_params("/nonexistent/params.json"), Error);
}

}
