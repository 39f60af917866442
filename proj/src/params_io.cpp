#include "lrsim/params_io.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "lrsim/errors.hpp"

namespace lrsim {

namespace {

using nlohmann::json;

json sign_model_to_json(const SignModel& m) {
  return {{"edges", m.edges}, {"pos_freq", m.pos_freq}, {"requested_bins", m.requested_bins}};
}

SignModel sign_model_from_json(const json& j) {
  SignModel m;
  m.edges = j.at("edges").get<std::vector<double>>();
  m.pos_freq = j.at("pos_freq").get<std::vector<double>>();
  m.requested_bins = j.value("requested_bins", m.edges.size());
  return m;
}

json low_to_json(const volsim::LowFreqModel& low) {
  json terms = json::array();
  for (const auto& t : low.terms) terms.push_back({t.frequency, t.a, t.b});
  return {{"n", low.n},       {"pow", low.pow}, {"mlv", low.mlv}, {"explained", low.explained},
          {"order", volsim::to_string(low.order)}, {"terms", terms}};
}

volsim::LowFreqModel low_from_json(const json& j) {
  volsim::LowFreqModel low;
  low.n = j.at("n").get<std::size_t>();
  low.pow = j.value("pow", low.pow);
  low.mlv = j.at("mlv").get<double>();
  low.explained = j.value("explained", 0.0);
  low.order = volsim::frequency_order_from_string(j.value("order", std::string("energy")));
  for (const auto& t : j.at("terms")) {
    if (!t.is_array() || t.size() != 3) throw ConfigError("each low-frequency term must be [j, a, b]");
    low.terms.push_back({t[0].get<std::size_t>(), t[1].get<double>(), t[2].get<double>()});
  }
  return low;
}

json high_to_json(const volsim::HighFreqParams& h) {
  return {{"lambda1", h.lambda1}, {"sigma1", h.sigma1}, {"lambda2", h.lambda2},
          {"sigma2", h.sigma2},   {"nu", h.nu},         {"start_calm", h.start_calm}};
}

volsim::HighFreqParams high_from_json(const json& j) {
  volsim::HighFreqParams h;
  h.lambda1 = j.value("lambda1", h.lambda1);
  h.sigma1 = j.value("sigma1", h.sigma1);
  h.lambda2 = j.value("lambda2", h.lambda2);
  h.sigma2 = j.value("sigma2", h.sigma2);
  h.nu = j.value("nu", h.nu);
  h.start_calm = j.value("start_calm", h.start_calm);
  return h;
}

json to_json(const StylizedParams& p) {
  return {{"model_type", "stylized"},
          {"kind", to_string(p.kind)},
          {"volatility", {{"low", low_to_json(p.vol.low)}, {"high", high_to_json(p.vol.high)}, {"delta", p.vol.delta}}},
          {"returns",
           {{"rho", p.ret.rho},
            {"eta", p.ret.eta},
            {"gamma", p.ret.gamma},
            {"eacf1", p.ret.eacf1},
            {"allow_negative_rho", p.ret.allow_negative_rho},
            {"sign_model", sign_model_to_json(p.ret.sign_model)}}}};
}

json to_json(const GarchModelParams& p) {
  json j{{"model_type", "garch"},
         {"kind", to_string(p.kind)},
         {"a0", p.params.a0},
         {"a1", p.params.a1},
         {"b1", p.params.b1},
         {"loglik", p.params.loglik},
         {"stationary", p.params.stationary},
         {"burn_in", p.options.burn_in}};
  if (p.options.signs) {
    j["signs"] = {{"gamma", p.options.signs->gamma},
                  {"eacf1", p.options.signs->eacf1},
                  {"sign_model", sign_model_to_json(p.options.signs->model)}};
  }
  return j;
}

StylizedParams stylized_from_json(const json& j) {
  StylizedParams p;
  p.kind = return_kind_from_string(j.value("kind", std::string("log")));
  const auto& v = j.at("volatility");
  p.vol.low = low_from_json(v.at("low"));
  if (v.contains("high")) p.vol.high = high_from_json(v.at("high"));
  p.vol.delta = v.value("delta", p.vol.delta);
  const auto& r = j.at("returns");
  p.ret.rho = r.value("rho", p.ret.rho);
  p.ret.eta = r.value("eta", p.ret.eta);
  p.ret.gamma = r.value("gamma", p.ret.gamma);
  p.ret.eacf1 = r.value("eacf1", p.ret.eacf1);
  p.ret.allow_negative_rho = r.value("allow_negative_rho", false);
  p.ret.sign_model = sign_model_from_json(r.at("sign_model"));
  p.vol.validate();
  p.ret.validate();
  return p;
}

GarchModelParams garch_from_json(const json& j) {
  GarchModelParams p;
  p.kind = return_kind_from_string(j.value("kind", std::string("log")));
  p.params.a0 = j.at("a0").get<double>();
  p.params.a1 = j.at("a1").get<double>();
  p.params.b1 = j.at("b1").get<double>();
  p.params.loglik = j.value("loglik", 0.0);
  p.params.stationary = p.params.a1 + p.params.b1 < 1.0;
  p.options.burn_in = j.value("burn_in", p.options.burn_in);
  if (j.contains("signs")) {
    const auto& s = j.at("signs");
    garch::SignScheme scheme;
    scheme.gamma = s.value("gamma", 1.0);
    scheme.eacf1 = s.value("eacf1", 0.0);
    scheme.model = sign_model_from_json(s.at("sign_model"));
    p.options.signs = std::move(scheme);
  }
  p.params.validate();
  return p;
}

}  // namespace

std::string params_to_json(const ModelParams& params) {
  return std::visit([](const auto& p) { return to_json(p).dump(2) + "\n"; }, params);
}

ModelParams params_from_json(const std::string& text) {
  try {
    const auto j = json::parse(text);
    if (!j.is_object() || !j.contains("model_type")) throw ConfigError("parameter file has no model_type");
    const auto type = j.at("model_type").get<std::string>();
    if (type == "stylized") return stylized_from_json(j);
    if (type == "garch") return garch_from_json(j);
    throw ConfigError("unknown model_type '" + type + "' (expected stylized or garch)");
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed parameter file: ") + e.what());
  } catch (const DataError& e) {
    throw ConfigError(std::string("invalid parameter file: ") + e.what());
  }
}

void save_params(const std::filesystem::path& path, const ModelParams& params) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out << params_to_json(params);
  if (!out) throw DataError("failed writing " + path.string());
}

ModelParams load_params(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open parameter file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return params_from_json(buf.str());
}

std::unique_ptr<ReturnModel> make_model(const ModelParams& params) {
  if (const auto* s = std::get_if<StylizedParams>(&params)) return std::make_unique<StylizedModel>(s->vol, s->ret);
  const auto& g = std::get<GarchModelParams>(params);
  return std::make_unique<garch::GarchModel>(g.params, g.options);
}

ReturnKind params_kind(const ModelParams& params) {
  return std::visit([](const auto& p) { return p.kind; }, params);
}

}  // namespace lrsim
