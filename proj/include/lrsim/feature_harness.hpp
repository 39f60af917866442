#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lrsim/model.hpp"
#include "lrsim/series_io.hpp"

/// Monte-Carlo p-values for the eleven quantified features of a return
/// series against a simulation model.
///
///  1 lag-one sign ACF            7 end return
///  2 heavy-tail measure          8 mean |r|
///  3 Kuiper asymmetry            9 mean r^2
///  4 number of volatility segments  10 mean |order stat - mean order stat|
///  5 distance to the mean |r| ACF   11 Kuiper distance of order stats
///  6 lag-one ACF of |r|
///
/// Features 5, 10 and 11 are one-sided (only large values count against the
/// model); the rest are two-sided.
namespace lrsim {

enum class Sided { one, two };

inline constexpr std::size_t kFeatureCount = 11;

[[nodiscard]] Sided feature_sidedness(int id);
[[nodiscard]] std::string feature_name(int id);

struct SimSummary {
  double q05 = 0.0;
  double mean = 0.0;
  double q95 = 0.0;
  double sd = 0.0;
};

struct FeatureValue {
  int id = 0;
  std::string name;
  double empirical = 0.0;
  SimSummary sims;
  double p_value = 0.0;
  Sided sided = Sided::two;

  friend bool operator==(const FeatureValue& a, const FeatureValue& b) {
    return a.id == b.id && a.name == b.name && a.empirical == b.empirical && a.sims.q05 == b.sims.q05 &&
           a.sims.mean == b.sims.mean && a.sims.q95 == b.sims.q95 && a.sims.sd == b.sims.sd &&
           a.p_value == b.p_value && a.sided == b.sided;
  }
};

struct FeatureReport {
  std::vector<FeatureValue> features;
  std::string model_label;
  std::string data_label;
  std::size_t n = 0;
  std::size_t nsim = 0;
  std::size_t nsim_reference = 0;
  std::size_t lags = 0;
  double alpha_n = 0.0;
  std::uint64_t master_seed = 0;

  /// Throws std::invalid_argument unless there are 11 features with ids
  /// 1..11 in order and the expected sidedness.
  void validate() const;
  [[nodiscard]] double min_p_value() const;
};

/// min(#{s <= e}, #{s >= e}) / nsim, capped at 0.5. Ties count on both sides.
[[nodiscard]] double two_sided_pvalue(double empirical, std::span<const double> sims);

/// #{s >= e} / nsim.
[[nodiscard]] double one_sided_pvalue(double empirical, std::span<const double> sims);

/// Type-7 5% and 95% quantiles, mean and sample standard deviation.
[[nodiscard]] SimSummary summarize(std::span<const double> sims);

struct HarnessConfig {
  std::size_t nsim = 1000;           // reference-distribution batch
  std::size_t nsim_reference = 0;    // batch for the mean ACF and mean order statistics; 0 means nsim
  std::size_t lags = 1500;           // ACF lags for feature 5
  std::optional<double> alpha_n;     // feature 4 level; calibrated for the data length if absent
  double alpha = 0.9;                // calibration target when alpha_n is absent
  std::size_t calib_nsim = 1000;
  std::uint64_t master_seed = 0;
  unsigned workers = 1;
};

/// Scalar features of one series that need no simulated reference
/// (ids 1, 2, 3, 4, 6, 7, 8, 9 at index id - 1; others are left at 0).
[[nodiscard]] std::array<double, kFeatureCount> direct_features(std::span<const double> r, ReturnKind kind,
                                                                double alpha_n);

/// Runs the two simulation batches and assembles the report. Simulation i
/// of batch b uses derive_seed(master_seed, {b, i}); reductions use fixed
/// chunking, so the report does not depend on the worker count. Throws
/// NumericalError naming the seed if the model fails, and
/// std::invalid_argument if nsim < 1 or lags >= data.size().
[[nodiscard]] FeatureReport evaluate_features(const ReturnSeries& data, const ReturnModel& model,
                                              const HarnessConfig& config);

enum class ReportFormat { text, json, csv };
[[nodiscard]] ReportFormat report_format_from_string(const std::string& s);

[[nodiscard]] std::string render_report(const FeatureReport& report, ReportFormat format);

/// Inverse of render_report(..., ReportFormat::json).
[[nodiscard]] FeatureReport report_from_json(const std::string& text);

}  // namespace lrsim
