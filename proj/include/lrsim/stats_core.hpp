#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <vector>

#include "lrsim/series_io.hpp"

/// Deterministic statistics: the stylized-fact quantifications and the
/// building blocks of the Monte-Carlo harness. All functions are pure.
namespace lrsim::stats {

/// Sample autocorrelations at lags 1..values.size().
struct AcfCurve {
  std::vector<double> values;  // values[k-1] is lag k

  [[nodiscard]] std::size_t max_lag() const noexcept { return values.size(); }
};

struct GainLossCurve {
  std::vector<double> bin_centers;   // median |r| per bin, ascending
  std::vector<double> pos_frequency;  // fraction of positive returns per bin
  std::vector<std::size_t> bin_counts;
  double correlation = 0.0;  // Pearson(bin_centers, pos_frequency)
};

struct KuiperAsymmetry {
  double distance = 0.0;
  double asymptotic_p = 1.0;
  std::size_t n_positive = 0;
  std::size_t n_negative = 0;
};

struct AbsMoments {
  double mean_abs = 0.0;
  double mean_sq = 0.0;
};

[[nodiscard]] double mean(std::span<const double> x);

/// Quantile with linear interpolation between order statistics (R type 7).
/// `sorted` must be ascending and nonempty.
[[nodiscard]] double quantile_sorted(std::span<const double> sorted, double p);

/// Median of an unsorted sample (copies).
[[nodiscard]] double median(std::span<const double> x);

/// Mean-centred sample ACF normalised by the lag-0 sum of squares:
/// a(k) = sum_{t<n-k} (x_t - m)(x_{t+k} - m) / sum_t (x_t - m)^2.
/// Uses an FFT when n * max_lag is large. Throws std::invalid_argument if
/// n <= max_lag, max_lag == 0 or x is constant.
[[nodiscard]] AcfCurve acf(std::span<const double> x, std::size_t max_lag);

/// Same quantity by the O(n * max_lag) direct sum.
[[nodiscard]] AcfCurve acf_direct(std::span<const double> x, std::size_t max_lag);

/// ACF of |x|.
[[nodiscard]] AcfCurve abs_acf(std::span<const double> x, std::size_t max_lag);

/// Lag-1 autocorrelation of sign(r) in {-1, +1}. Throws if all signs agree
/// or there are fewer than three returns.
[[nodiscard]] double sign_acf1(std::span<const double> r);

/// Heavy-tail measure: mean of eaq - aq, where eaq is the sorted |r| divided
/// by its median and aq is the sorted |qnorm(i/(n+1))|, i = 1..n, divided by
/// its median. The mean is a symmetric trimmed mean dropping floor(n * trim)
/// of the sorted differences from each end; trim = 0 is the plain mean.
/// The default trim reproduces the published t2/t3 reference values.
inline constexpr double kHeavyTailTrim = 0.002;
[[nodiscard]] double heavy_tail_measure(std::span<const double> r, double trim = kHeavyTailTrim);

/// As above with a precomputed normal_abs_reference(r.size()).
[[nodiscard]] double heavy_tail_measure(std::span<const double> r, std::span<const double> reference,
                                        double trim = kHeavyTailTrim);

/// Median-normalised sorted |qnorm(i/(n+1))|, the reference curve aq.
[[nodiscard]] std::vector<double> normal_abs_reference(std::size_t n);

/// Moment ratio m4 / m2^2 about the mean, no excess and no bias correction.
[[nodiscard]] double kurtosis(std::span<const double> x);

/// Kuiper distance D+ + D- between the empirical CDFs of a and b, computed
/// by a merge over the pooled order statistics. Inputs need not be sorted.
[[nodiscard]] double kuiper_distance(std::span<const double> a, std::span<const double> b);

/// Same, for inputs already sorted ascending (no copy).
[[nodiscard]] double kuiper_distance_sorted(std::span<const double> a, std::span<const double> b);

/// Asymptotic upper tail of the Kuiper statistic,
/// Q(lambda) = 2 sum_j (4 j^2 lambda^2 - 1) exp(-2 j^2 lambda^2), clamped to [0, 1];
/// the series is truncated once terms fall below 1e-10.
[[nodiscard]] double kuiper_tail(double lambda);

/// Kuiper distance between the positive returns and the absolute negative
/// returns, with the asymptotic p-value at effective size n+ n- / (n+ + n-).
[[nodiscard]] KuiperAsymmetry kuiper_asymmetry(std::span<const double> r);

/// Relative frequency of positive returns against |r|: the |r| values between
/// the q_lo and q_hi quantiles are split into `bins` equal-count bins.
[[nodiscard]] GainLossCurve gain_loss_curve(std::span<const double> r, std::size_t bins = 50, double q_lo = 0.02,
                                            double q_hi = 0.98);

/// Mean absolute difference over the common lags. Throws on length mismatch.
[[nodiscard]] double d_acf(const AcfCurve& a1, const AcfCurve& a2);

/// Value of one unit invested: prod(1 + r) for simple returns, exp(sum r) for
/// log returns. Throws if a simple return is <= -1.
[[nodiscard]] double end_return(std::span<const double> r, ReturnKind kind);

[[nodiscard]] AbsMoments abs_moments(std::span<const double> r);

/// (1/n) sum |a_i - b_i| for two ascending sequences of equal length.
[[nodiscard]] double quantile_mad(std::span<const double> sorted_a, std::span<const double> sorted_b);

[[nodiscard]] double pearson(std::span<const double> x, std::span<const double> y);

/// Two-column CSV exports for plotting.
void save_acf_csv(const std::filesystem::path& path, const AcfCurve& curve);
void save_gain_loss_csv(const std::filesystem::path& path, const GainLossCurve& curve);

}  // namespace lrsim::stats
