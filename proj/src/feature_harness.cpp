#include "lrsim/feature_harness.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "lrsim/errors.hpp"
#include "lrsim/multiscale_vol.hpp"
#include "lrsim/parallel.hpp"
#include "lrsim/rng.hpp"
#include "lrsim/stats_core.hpp"

namespace lrsim {

namespace {

constexpr std::array<const char*, kFeatureCount> kNames{
    "sign_acf1", "heavy_tail",  "kuiper_asymmetry", "segments",     "d_acf",          "abs_acf1",
    "end_return", "mean_abs", "mean_sq",          "quantile_mad", "quantile_kuiper"};

constexpr std::size_t kChunk = 8;

/// Inputs shared by every feature evaluation at one series length.
struct Context {
  ReturnKind kind;
  double alpha_n;
  msvol::IntervalFamily family;
  std::vector<double> heavy_reference;
};

std::array<double, kFeatureCount> direct_with(std::span<const double> r, const Context& ctx) {
  std::array<double, kFeatureCount> f{};
  f[0] = stats::sign_acf1(r);
  f[1] = stats::heavy_tail_measure(r, ctx.heavy_reference);
  f[2] = stats::kuiper_asymmetry(r).distance;
  f[3] = static_cast<double>(
      msvol::estimate_piecewise_vol(r, msvol::MultiscaleConfig{0.9, ctx.alpha_n}, ctx.family).segment_count());
  f[5] = stats::abs_acf(r, 1).values[0];
  f[6] = stats::end_return(r, ctx.kind);
  const auto m = stats::abs_moments(r);
  f[7] = m.mean_abs;
  f[8] = m.mean_sq;
  return f;
}

std::vector<double> checked_simulation(const ReturnModel& model, std::size_t n, std::uint64_t seed) {
  std::vector<double> r;
  try {
    r = model.simulate(n, seed);
  } catch (const std::exception& e) {
    throw NumericalError("model '" + model.label() + "' failed for seed " + std::to_string(seed) + ": " + e.what());
  }
  if (r.size() != n)
    throw NumericalError("model '" + model.label() + "' returned " + std::to_string(r.size()) +
                         " values instead of " + std::to_string(n) + " for seed " + std::to_string(seed));
  return r;
}

std::string sided_string(Sided s) { return s == Sided::one ? "one" : "two"; }

Sided sided_from_string(const std::string& s) {
  if (s == "one") return Sided::one;
  if (s == "two") return Sided::two;
  throw DataError("unknown sidedness '" + s + "'");
}

}  // namespace

Sided feature_sidedness(int id) {
  if (id < 1 || id > static_cast<int>(kFeatureCount)) throw std::invalid_argument("feature id out of range");
  return (id == 5 || id == 10 || id == 11) ? Sided::one : Sided::two;
}

std::string feature_name(int id) {
  if (id < 1 || id > static_cast<int>(kFeatureCount)) throw std::invalid_argument("feature id out of range");
  return kNames[static_cast<std::size_t>(id - 1)];
}

void FeatureReport::validate() const {
  if (features.size() != kFeatureCount) throw std::invalid_argument("report must hold exactly 11 features");
  for (std::size_t i = 0; i < kFeatureCount; ++i) {
    const auto& f = features[i];
    if (f.id != static_cast<int>(i + 1)) throw std::invalid_argument("feature ids must be 1..11 in order");
    if (f.sided != feature_sidedness(f.id)) throw std::invalid_argument("feature " + std::to_string(f.id) + " has the wrong sidedness");
  }
  if (nsim == 0) throw std::invalid_argument("report has no simulations");
}

double FeatureReport::min_p_value() const {
  double m = 1.0;
  for (const auto& f : features) m = std::min(m, f.p_value);
  return m;
}

double two_sided_pvalue(double empirical, std::span<const double> sims) {
  if (sims.empty()) throw std::invalid_argument("two_sided_pvalue: no simulations");
  std::size_t le = 0, ge = 0;
  for (double s : sims) {
    if (s <= empirical) ++le;
    if (s >= empirical) ++ge;
  }
  const double n = static_cast<double>(sims.size());
  return std::min({static_cast<double>(le) / n, static_cast<double>(ge) / n, 0.5});
}

double one_sided_pvalue(double empirical, std::span<const double> sims) {
  if (sims.empty()) throw std::invalid_argument("one_sided_pvalue: no simulations");
  const auto ge = std::count_if(sims.begin(), sims.end(), [&](double s) { return s >= empirical; });
  return static_cast<double>(ge) / static_cast<double>(sims.size());
}

SimSummary summarize(std::span<const double> sims) {
  if (sims.empty()) throw std::invalid_argument("summarize: no simulations");
  std::vector<double> sorted(sims.begin(), sims.end());
  std::sort(sorted.begin(), sorted.end());
  SimSummary s;
  s.q05 = stats::quantile_sorted(sorted, 0.05);
  s.q95 = stats::quantile_sorted(sorted, 0.95);
  s.mean = stats::mean(sorted);
  double ss = 0.0;
  for (double v : sorted) ss += (v - s.mean) * (v - s.mean);
  s.sd = sorted.size() > 1 ? std::sqrt(ss / static_cast<double>(sorted.size() - 1)) : 0.0;
  return s;
}

std::array<double, kFeatureCount> direct_features(std::span<const double> r, ReturnKind kind, double alpha_n) {
  const Context ctx{kind, alpha_n, msvol::build_interval_family(r.size()), stats::normal_abs_reference(r.size())};
  return direct_with(r, ctx);
}

FeatureReport evaluate_features(const ReturnSeries& data, const ReturnModel& model, const HarnessConfig& config) {
  const std::size_t n = data.size();
  const std::size_t nsim = config.nsim;
  const std::size_t nref = config.nsim_reference ? config.nsim_reference : config.nsim;
  if (nsim == 0) throw std::invalid_argument("evaluate_features: nsim must be positive");
  if (config.lags == 0 || config.lags >= n)
    throw std::invalid_argument("evaluate_features: lags must lie in [1, n)");
  const unsigned workers = std::max(1u, config.workers);

  double alpha_n = 0.0;
  if (config.alpha_n) {
    alpha_n = *config.alpha_n;
  } else {
    alpha_n = msvol::calibrate_alpha_n(n, config.alpha, config.calib_nsim, derive_seed(config.master_seed, {3}),
                                       workers)
                  .alpha_n;
  }
  const Context ctx{data.kind(), alpha_n, msvol::build_interval_family(n), stats::normal_abs_reference(n)};

  // Batch 1: mean |r| ACF and mean order statistics.
  const std::size_t chunks = (nref + kChunk - 1) / kChunk;
  std::vector<std::vector<double>> acf_sums(chunks, std::vector<double>(config.lags, 0.0));
  std::vector<std::vector<double>> order_sums(chunks, std::vector<double>(n, 0.0));
  parallel_for(chunks, workers, [&](std::size_t c) {
    const std::size_t end = std::min(nref, (c + 1) * kChunk);
    for (std::size_t i = c * kChunk; i < end; ++i) {
      auto r = checked_simulation(model, n, derive_seed(config.master_seed, {1, i}));
      const auto a = stats::abs_acf(r, config.lags);
      for (std::size_t k = 0; k < config.lags; ++k) acf_sums[c][k] += a.values[k];
      std::sort(r.begin(), r.end());
      for (std::size_t k = 0; k < n; ++k) order_sums[c][k] += r[k];
    }
  });
  stats::AcfCurve mean_acf{std::vector<double>(config.lags, 0.0)};
  std::vector<double> qm(n, 0.0);
  for (std::size_t c = 0; c < chunks; ++c) {
    for (std::size_t k = 0; k < config.lags; ++k) mean_acf.values[k] += acf_sums[c][k];
    for (std::size_t k = 0; k < n; ++k) qm[k] += order_sums[c][k];
  }
  for (double& v : mean_acf.values) v /= static_cast<double>(nref);
  for (double& v : qm) v /= static_cast<double>(nref);
  acf_sums.clear();
  order_sums.clear();

  auto all_features = [&](std::span<const double> r) {
    auto f = direct_with(r, ctx);
    f[4] = stats::d_acf(stats::abs_acf(r, config.lags), mean_acf);
    std::vector<double> sorted(r.begin(), r.end());
    std::sort(sorted.begin(), sorted.end());
    f[9] = stats::quantile_mad(sorted, qm);
    f[10] = stats::kuiper_distance_sorted(sorted, qm);
    return f;
  };

  // Batch 2: reference distributions.
  std::vector<std::array<double, kFeatureCount>> sims(nsim);
  parallel_for(nsim, workers, [&](std::size_t i) {
    const auto r = checked_simulation(model, n, derive_seed(config.master_seed, {2, i}));
    sims[i] = all_features(r);
  });
  const auto empirical = all_features(data.values());

  FeatureReport report;
  report.model_label = model.label();
  report.data_label = data.source_label();
  report.n = n;
  report.nsim = nsim;
  report.nsim_reference = nref;
  report.lags = config.lags;
  report.alpha_n = alpha_n;
  report.master_seed = config.master_seed;
  std::vector<double> column(nsim);
  for (std::size_t j = 0; j < kFeatureCount; ++j) {
    for (std::size_t i = 0; i < nsim; ++i) column[i] = sims[i][j];
    FeatureValue fv;
    fv.id = static_cast<int>(j + 1);
    fv.name = kNames[j];
    fv.sided = feature_sidedness(fv.id);
    fv.empirical = empirical[j];
    fv.sims = summarize(column);
    fv.p_value = fv.sided == Sided::two ? two_sided_pvalue(fv.empirical, column) : one_sided_pvalue(fv.empirical, column);
    report.features.push_back(std::move(fv));
  }
  return report;
}

ReportFormat report_format_from_string(const std::string& s) {
  if (s == "text") return ReportFormat::text;
  if (s == "json") return ReportFormat::json;
  if (s == "csv") return ReportFormat::csv;
  throw ConfigError("unknown report format '" + s + "' (expected text, json or csv)");
}

namespace {

std::string render_text(const FeatureReport& report) {
  std::ostringstream out;
  out << "model " << report.model_label;
  if (!report.data_label.empty()) out << "  data " << report.data_label;
  out << "  n " << report.n << "  nsim " << report.nsim << "  seed " << report.master_seed << "\n\n";
  std::ostringstream header, row;
  header << std::left << std::setw(8) << "feature";
  row << std::left << std::setw(8) << "p";
  row << std::fixed << std::setprecision(2);
  for (const auto& f : report.features) {
    const std::string label = std::to_string(f.id) + (f.sided == Sided::two ? "*" : "");
    header << std::right << std::setw(6) << label;
    row << std::right << std::setw(6) << f.p_value;
  }
  out << header.str() << "\n" << row.str() << "\n\n";
  out << std::left << std::setw(4) << "id" << std::setw(18) << "name" << std::right;
  for (const char* h : {"empirical", "q05", "mean", "q95", "sd", "p"}) out << std::setw(14) << h;
  out << "\n";
  for (const auto& f : report.features) {
    out << std::left << std::setw(4) << f.id << std::setw(18) << f.name << std::right << std::setprecision(6)
        << std::defaultfloat;
    for (double v : {f.empirical, f.sims.q05, f.sims.mean, f.sims.q95, f.sims.sd}) out << std::setw(14) << v;
    out << std::fixed << std::setprecision(3) << std::setw(14) << f.p_value << std::defaultfloat << "\n";
  }
  out << "\n* two-sided p-value (at most 0.5)\n";
  return out.str();
}

std::string render_csv(const FeatureReport& report) {
  std::ostringstream out;
  out << "id,name,sided,empirical,q05,mean,q95,sd,p_value\n";
  for (const auto& f : report.features) {
    out << f.id << ',' << f.name << ',' << sided_string(f.sided) << ',' << format_double(f.empirical) << ','
        << format_double(f.sims.q05) << ',' << format_double(f.sims.mean) << ',' << format_double(f.sims.q95) << ','
        << format_double(f.sims.sd) << ',' << format_double(f.p_value) << '\n';
  }
  return out.str();
}

std::string render_json(const FeatureReport& report) {
  nlohmann::json j;
  j["model"] = report.model_label;
  j["data"] = report.data_label;
  j["n"] = report.n;
  j["nsim"] = report.nsim;
  j["nsim_reference"] = report.nsim_reference;
  j["lags"] = report.lags;
  j["alpha_n"] = report.alpha_n;
  j["master_seed"] = report.master_seed;
  auto& arr = j["features"] = nlohmann::json::array();
  for (const auto& f : report.features) {
    arr.push_back({{"id", f.id},
                   {"name", f.name},
                   {"sided", sided_string(f.sided)},
                   {"empirical", f.empirical},
                   {"q05", f.sims.q05},
                   {"mean", f.sims.mean},
                   {"q95", f.sims.q95},
                   {"sd", f.sims.sd},
                   {"p_value", f.p_value}});
  }
  return j.dump(2) + "\n";
}

}  // namespace

std::string render_report(const FeatureReport& report, ReportFormat format) {
  report.validate();
  switch (format) {
    case ReportFormat::text: return render_text(report);
    case ReportFormat::json: return render_json(report);
    case ReportFormat::csv: return render_csv(report);
  }
  throw std::invalid_argument("render_report: unknown format");
}

FeatureReport report_from_json(const std::string& text) {
  try {
    const auto j = nlohmann::json::parse(text);
    FeatureReport report;
    report.model_label = j.at("model").get<std::string>();
    report.data_label = j.at("data").get<std::string>();
    report.n = j.at("n").get<std::size_t>();
    report.nsim = j.at("nsim").get<std::size_t>();
    report.nsim_reference = j.at("nsim_reference").get<std::size_t>();
    report.lags = j.at("lags").get<std::size_t>();
    report.alpha_n = j.at("alpha_n").get<double>();
    report.master_seed = j.at("master_seed").get<std::uint64_t>();
    for (const auto& f : j.at("features")) {
      FeatureValue fv;
      fv.id = f.at("id").get<int>();
      fv.name = f.at("name").get<std::string>();
      fv.sided = sided_from_string(f.at("sided").get<std::string>());
      fv.empirical = f.at("empirical").get<double>();
      fv.sims = {f.at("q05").get<double>(), f.at("mean").get<double>(), f.at("q95").get<double>(),
                 f.at("sd").get<double>()};
      fv.p_value = f.at("p_value").get<double>();
      report.features.push_back(std::move(fv));
    }
    report.validate();
    return report;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed report JSON: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw DataError(std::string("invalid report: ") + e.what());
  }
}

}  // namespace lrsim
