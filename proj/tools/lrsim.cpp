// lrsim: command-line front end for the long-range return simulator.
//
// Exit codes: 0 success, 1 usage or configuration error, 2 data error,
// 3 numerical failure, 4 a p-value fell below the --threshold gate.

#include <CLI11.hpp>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "lrsim/errors.hpp"
#include "lrsim/feature_harness.hpp"
#include "lrsim/garch.hpp"
#include "lrsim/multiscale_vol.hpp"
#include "lrsim/parallel.hpp"
#include "lrsim/params_io.hpp"
#include "lrsim/return_sim.hpp"
#include "lrsim/rng.hpp"
#include "lrsim/series_io.hpp"
#include "lrsim/stats_core.hpp"
#include "lrsim/svg_plot.hpp"
#include "lrsim/vol_sim.hpp"

namespace {

constexpr int kExitConfig = 1;
constexpr int kExitData = 2;
constexpr int kExitNumerical = 3;
constexpr int kExitGate = 4;

struct GateFailure {
  double min_p;
};

std::uint64_t resolve_seed(const std::optional<std::uint64_t>& seed) {
  if (seed) return *seed;
  std::random_device rd;
  const std::uint64_t s = (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
  std::cerr << "seed: " << s << "\n";
  return s;
}

lrsim::CsvFormat csv_format(const std::string& content, const std::string& method, char delimiter) {
  lrsim::CsvFormat f;
  f.delimiter = delimiter;
  f.kind = lrsim::return_kind_from_string(method);
  if (content == "prices") f.content = lrsim::SeriesContent::prices;
  else if (content == "returns") f.content = lrsim::SeriesContent::returns;
  else if (content == "auto") f.content = lrsim::SeriesContent::automatic;
  else throw lrsim::ConfigError("unknown content '" + content + "' (expected auto, prices or returns)");
  return f;
}

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path);
  if (!out) throw lrsim::DataError("cannot write " + path);
  out << text;
}

struct InputOptions {
  std::string path;
  std::string content = "auto";
  std::string method = "simple";
  char delimiter = ',';

  void add(CLI::App* cmd) {
    cmd->add_option("-i,--input", path, "Price or return CSV")->required();
    cmd->add_option("--content", content, "auto, prices or returns")->capture_default_str();
    cmd->add_option("--method", method, "Return definition: simple or log")->capture_default_str();
    cmd->add_option("--delimiter", delimiter, "Field separator")->capture_default_str();
  }
  [[nodiscard]] lrsim::ReturnSeries load() const {
    return lrsim::load_returns(path, csv_format(content, method, delimiter));
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Long-range daily return simulator and stylized-fact harness"};
  app.require_subcommand(1);
  unsigned workers = lrsim::default_workers();
  app.add_option("-w,--workers", workers, "Worker threads (default: LRSIM_WORKERS or hardware)");

  // ingest
  auto* ingest = app.add_subcommand("ingest", "Load prices or returns and write a cleaned return file");
  InputOptions ingest_in;
  std::string ingest_out;
  ingest_in.add(ingest);
  ingest->add_option("-o,--output", ingest_out, "Return CSV to write");

  // calibrate
  auto* calibrate = app.add_subcommand("calibrate", "Calibrate alpha_n for a series length");
  std::size_t cal_n = 0, cal_nsim = 1000;
  double cal_alpha = 0.9;
  std::optional<std::uint64_t> cal_seed;
  calibrate->add_option("-n,--length", cal_n, "Series length")->required()->check(CLI::PositiveNumber);
  calibrate->add_option("--alpha", cal_alpha, "Single-interval probability")->capture_default_str();
  calibrate->add_option("--nsim", cal_nsim, "Replicates")->capture_default_str()->check(CLI::PositiveNumber);
  calibrate->add_option("--seed", cal_seed, "Master seed");

  // segment
  auto* segment = app.add_subcommand("segment", "Piecewise-constant volatility under multiscale bounds");
  InputOptions seg_in;
  double seg_alpha_n = 0.9999993;
  std::string seg_prefix = "segments";
  seg_in.add(segment);
  segment->add_option("--alpha-n", seg_alpha_n, "Per-interval level")->capture_default_str();
  segment->add_option("-o,--out-prefix", seg_prefix, "Prefix for the CSV outputs")->capture_default_str();

  // fit
  auto* fit = app.add_subcommand("fit", "Fit a model and write its parameter file");
  InputOptions fit_in;
  std::string fit_model = "stylized", fit_out = "params.json", fit_order = "energy";
  double fit_alpha_n = 0.998, fit_pow = 0.8;
  std::size_t fit_bins = 50;
  lrsim::volsim::HighFreqParams fit_high;
  double fit_delta = 0.2;
  lrsim::ReturnSimParams fit_ret;
  std::optional<double> fit_eacf1;
  bool fit_garch_signs = false;
  fit_in.add(fit);
  fit->add_option("--model", fit_model, "stylized or garch")->capture_default_str();
  fit->add_option("-o,--output", fit_out, "Parameter JSON")->capture_default_str();
  fit->add_option("--alpha-n", fit_alpha_n, "Level of the segmentation fed to the low-frequency fit")
      ->capture_default_str();
  fit->add_option("--pow", fit_pow, "Explained-variance target of the low-frequency fit")->capture_default_str();
  fit->add_option("--order", fit_order, "Frequency selection order: energy or index")->capture_default_str();
  fit->add_option("--bins", fit_bins, "Sign-model bins")->capture_default_str();
  fit->add_option("--lambda1", fit_high.lambda1)->capture_default_str();
  fit->add_option("--sigma1", fit_high.sigma1)->capture_default_str();
  fit->add_option("--lambda2", fit_high.lambda2)->capture_default_str();
  fit->add_option("--sigma2", fit_high.sigma2)->capture_default_str();
  fit->add_option("--nu", fit_high.nu, "t degrees of freedom of the turbulent regime")->capture_default_str();
  fit->add_option("--delta", fit_delta, "Half-width of the level shift")->capture_default_str();
  fit->add_option("--rho", fit_ret.rho)->capture_default_str();
  fit->add_option("--eta", fit_ret.eta)->capture_default_str();
  fit->add_option("--gamma", fit_ret.gamma)->capture_default_str();
  fit->add_option("--eacf1", fit_eacf1, "Target lag-one sign ACF (default: the data's)");
  fit->add_flag("--allow-negative-rho", fit_ret.allow_negative_rho);
  fit->add_flag("--garch-signs", fit_garch_signs, "GARCH: reassign signs with the fitted sign model");

  // simulate
  auto* simulate = app.add_subcommand("simulate", "Simulate return paths from a parameter file");
  std::string sim_params, sim_out = "paths.csv", sim_layout = "wide";
  std::size_t sim_n = 0, sim_count = 1;
  std::optional<std::uint64_t> sim_seed;
  simulate->add_option("-p,--params", sim_params, "Parameter JSON")->required();
  simulate->add_option("-n,--length", sim_n, "Path length (default: the fitted length)");
  simulate->add_option("--count", sim_count, "Number of paths")->capture_default_str()->check(CLI::PositiveNumber);
  simulate->add_option("--seed", sim_seed, "Master seed");
  simulate->add_option("--layout", sim_layout, "wide or long")->capture_default_str();
  simulate->add_option("-o,--output", sim_out, "CSV to write")->capture_default_str();

  // evaluate
  auto* evaluate = app.add_subcommand("evaluate", "Monte-Carlo p-values of the eleven features");
  InputOptions ev_in;
  std::string ev_params, ev_format = "text", ev_out = "-";
  lrsim::HarnessConfig ev_cfg;
  std::optional<double> ev_alpha_n, ev_threshold;
  std::optional<std::uint64_t> ev_seed;
  ev_in.add(evaluate);
  evaluate->add_option("-p,--params", ev_params, "Parameter JSON")->required();
  evaluate->add_option("--nsim", ev_cfg.nsim, "Simulations per batch")->capture_default_str()->check(CLI::PositiveNumber);
  evaluate->add_option("--nsim-reference", ev_cfg.nsim_reference, "Size of the mean-ACF batch (0: nsim)")
      ->capture_default_str();
  evaluate->add_option("--lags", ev_cfg.lags, "ACF lags")->capture_default_str();
  evaluate->add_option("--alpha-n", ev_alpha_n, "Segmentation level (default: calibrated for n)");
  evaluate->add_option("--alpha", ev_cfg.alpha, "Calibration target")->capture_default_str();
  evaluate->add_option("--calib-nsim", ev_cfg.calib_nsim)->capture_default_str();
  evaluate->add_option("--seed", ev_seed, "Master seed");
  evaluate->add_option("--format", ev_format, "text, json or csv")->capture_default_str();
  evaluate->add_option("-o,--output", ev_out, "Report file")->capture_default_str();
  evaluate->add_option("--threshold", ev_threshold, "Exit with 4 if any p-value is below this");

  // plot
  auto* plot = app.add_subcommand("plot", "Render CSV columns as an SVG figure");
  std::vector<std::string> plot_series;
  std::string plot_out = "figure.svg", plot_title, plot_xlabel, plot_ylabel;
  plot->add_option("-s,--series", plot_series, "FILE:XCOL:YCOL[:line|points|step|dashed]")->required();
  plot->add_option("-o,--output", plot_out, "SVG file")->capture_default_str();
  plot->add_option("--title", plot_title);
  plot->add_option("--xlabel", plot_xlabel);
  plot->add_option("--ylabel", plot_ylabel);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (*ingest) {
      const auto series = ingest_in.load();
      std::cout << "returns: " << series.size() << " nonzero, " << series.zeros_removed() << " zero removed ("
                << lrsim::to_string(series.kind()) << ")\n";
      if (!ingest_out.empty()) lrsim::save_returns(ingest_out, series);
    } else if (*calibrate) {
      const auto seed = resolve_seed(cal_seed);
      const auto cal = lrsim::msvol::calibrate_alpha_n(cal_n, cal_alpha, cal_nsim, seed, workers);
      std::cout.precision(10);
      std::cout << "alpha_n: " << cal.alpha_n << "  (n " << cal.n << ", alpha " << cal.alpha << ", nsim " << cal.nsim
                << ")\n";
    } else if (*segment) {
      const auto series = seg_in.load();
      const auto vol = lrsim::msvol::estimate_piecewise_vol(series.values(), {0.9, seg_alpha_n});
      lrsim::msvol::save_segments_csv(seg_prefix + "_segments.csv", vol);
      lrsim::msvol::save_step_csv(seg_prefix + "_step.csv", series.values(), vol);
      lrsim::msvol::save_sojourn_csv(seg_prefix + "_sojourn.csv", vol);
      std::cout << "segments: " << vol.segment_count() << "\n";
    } else if (*fit) {
      const auto series = fit_in.load();
      const auto r = series.values();
      lrsim::ModelParams params;
      if (fit_model == "stylized") {
        lrsim::StylizedParams p;
        const auto vol = lrsim::msvol::estimate_piecewise_vol(r, {0.9, fit_alpha_n});
        const auto log_vol = lrsim::volsim::log_of(vol.expand());
        p.vol.low = lrsim::volsim::fit_low_freq(log_vol, fit_pow, lrsim::volsim::frequency_order_from_string(fit_order));
        p.vol.high = fit_high;
        p.vol.delta = fit_delta;
        p.ret = fit_ret;
        p.ret.sign_model = lrsim::fit_sign_model(r, fit_bins);
        p.ret.eacf1 = fit_eacf1.value_or(lrsim::stats::sign_acf1(r));
        p.kind = series.kind();
        p.vol.validate();
        p.ret.validate();
        std::cout << "segments: " << vol.segment_count() << "  frequencies: " << p.vol.low.terms.size()
                  << "  explained: " << p.vol.low.explained << "  mlv: " << p.vol.low.mlv << "\n";
        if (p.ret.sign_model.bins() < fit_bins)
          std::cerr << "warning: tied quantiles reduced the sign model to " << p.ret.sign_model.bins() << " bins\n";
        params = std::move(p);
      } else if (fit_model == "garch") {
        lrsim::GarchModelParams p;
        p.params = lrsim::garch::fit_garch11(r);
        p.kind = series.kind();
        if (fit_garch_signs) {
          lrsim::garch::SignScheme scheme;
          scheme.model = lrsim::fit_sign_model(r, fit_bins);
          scheme.gamma = fit_ret.gamma;
          scheme.eacf1 = fit_eacf1.value_or(lrsim::stats::sign_acf1(r));
          p.options.signs = std::move(scheme);
        }
        std::cout.precision(6);
        std::cout << "a0 " << p.params.a0 << "  a1 " << p.params.a1 << "  b1 " << p.params.b1 << "  loglik "
                  << p.params.loglik << "  ";
        if (const auto v = lrsim::garch::unconditional_variance(p.params)) std::cout << "variance " << *v << "\n";
        else std::cout << "nonstationary\n";
        params = std::move(p);
      } else {
        throw lrsim::ConfigError("unknown model '" + fit_model + "' (expected stylized or garch)");
      }
      lrsim::save_params(fit_out, params);
    } else if (*simulate) {
      const auto params = lrsim::load_params(sim_params);
      const auto model = lrsim::make_model(params);
      std::size_t n = sim_n;
      if (n == 0) {
        if (const auto* s = std::get_if<lrsim::StylizedParams>(&params)) n = s->vol.low.n;
        else throw lrsim::ConfigError("--length is required for GARCH parameter files");
      }
      const auto seed = resolve_seed(sim_seed);
      std::vector<std::vector<double>> paths(sim_count);
      lrsim::parallel_for(sim_count, workers,
                          [&](std::size_t i) { paths[i] = model->simulate(n, lrsim::derive_seed(seed, {i})); });
      lrsim::PathLayout layout = lrsim::PathLayout::wide;
      if (sim_layout == "long") layout = lrsim::PathLayout::long_format;
      else if (sim_layout != "wide") throw lrsim::ConfigError("unknown layout '" + sim_layout + "' (expected wide or long)");
      lrsim::save_paths(sim_out, paths, layout);
    } else if (*evaluate) {
      const auto params = lrsim::load_params(ev_params);
      const auto format = lrsim::report_format_from_string(ev_format);
      auto format_in = csv_format(ev_in.content, ev_in.method, ev_in.delimiter);
      const auto data = lrsim::load_returns(ev_in.path, format_in);
      const auto model = lrsim::make_model(params);
      ev_cfg.alpha_n = ev_alpha_n;
      ev_cfg.master_seed = resolve_seed(ev_seed);
      ev_cfg.workers = workers;
      const auto report = lrsim::evaluate_features(data, *model, ev_cfg);
      write_text(ev_out, lrsim::render_report(report, format));
      if (ev_threshold && report.min_p_value() < *ev_threshold) throw GateFailure{report.min_p_value()};
    } else if (*plot) {
      lrsim::plot::Figure fig;
      fig.title = plot_title;
      fig.x_label = plot_xlabel;
      fig.y_label = plot_ylabel;
      for (const auto& spec : plot_series) {
        std::vector<std::string> parts;
        std::size_t from = 0;
        for (std::size_t pos; (pos = spec.find(':', from)) != std::string::npos; from = pos + 1)
          parts.push_back(spec.substr(from, pos - from));
        parts.push_back(spec.substr(from));
        std::string style = "line";
        if (parts.size() >= 4 && (parts.back() == "line" || parts.back() == "points" || parts.back() == "step" ||
                                  parts.back() == "dashed")) {
          style = parts.back();
          parts.pop_back();
        }
        if (parts.size() < 3) throw lrsim::ConfigError("series must be FILE:XCOL:YCOL[:STYLE], got '" + spec + "'");
        const std::string y = parts.back();
        parts.pop_back();
        const std::string x = parts.back();
        parts.pop_back();
        std::string file = parts.front();
        for (std::size_t k = 1; k < parts.size(); ++k) file += ":" + parts[k];
        const auto st = style == "points" ? lrsim::plot::Style::points
                        : style == "step" ? lrsim::plot::Style::step
                                          : lrsim::plot::Style::line;
        auto s = lrsim::plot::read_csv_series(file, x, y, st);
        s.dashed = style == "dashed";
        s.name = std::filesystem::path(file).stem().string() + ": " + y;
        fig.series.push_back(std::move(s));
      }
      lrsim::plot::save_svg(plot_out, fig);
    }
  } catch (const GateFailure& g) {
    std::cerr << "gate: smallest p-value " << g.min_p << " is below the threshold\n";
    return kExitGate;
  } catch (const lrsim::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const lrsim::DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const lrsim::NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid argument: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumerical;
  }
  return 0;
}
