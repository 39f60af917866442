#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

/// Piecewise-constant volatility under chi-squared multiscale bounds.
///
/// For returns R_t = S_t Z_t with Gaussian Z, the normalised sum of squares
/// over any interval [i, j] is chi-squared with j - i + 1 degrees of freedom.
/// A volatility S_t is admissible at level alpha_n if for every interval of
/// the family
///
///   qchisq((1 - alpha_n)/2, j-i+1) <= sum_{t=i}^{j} R_t^2 / S_t^2 <= qchisq((1 + alpha_n)/2, j-i+1).
///
/// Among admissible step functions whose levels are the empirical volatility
/// of their segment, estimate_piecewise_vol returns one with the fewest
/// segments. All indices are 0-based; CSV exports are 1-based.
namespace lrsim::msvol {

/// Closed index range [first, last].
struct Interval {
  std::size_t first = 0;
  std::size_t last = 0;

  [[nodiscard]] std::size_t length() const noexcept { return last - first + 1; }
  friend bool operator==(const Interval&, const Interval&) = default;
};

struct IntervalFamily {
  std::size_t n = 0;
  std::vector<Interval> intervals;
  std::string scheme_label;
};

/// Half-overlapping dyadic scheme: every length 2^k <= n, starting at
/// multiples of max(1, 2^(k-1)). Includes all singletons. O(n) intervals.
[[nodiscard]] IntervalFamily build_interval_family(std::size_t n);

/// Singletons plus the full range [0, n-1]; small enough for exhaustive checks.
[[nodiscard]] IntervalFamily singleton_and_full_family(std::size_t n);

/// Lower and upper chi-squared bounds at level alpha_n, cached per length.
class ChiSquareBand {
 public:
  explicit ChiSquareBand(double alpha_n);
  [[nodiscard]] double alpha_n() const noexcept { return alpha_n_; }
  [[nodiscard]] double lower(std::size_t dof) const;
  [[nodiscard]] double upper(std::size_t dof) const;

 private:
  struct Bounds {
    double lower;
    double upper;
  };
  const Bounds& bounds(std::size_t dof) const;

  double alpha_n_;
  double tail_;
  mutable std::vector<std::optional<Bounds>> cache_;
};

struct PiecewiseVolatility {
  std::size_t n = 0;
  std::vector<std::size_t> starts;  // starts.front() == 0, strictly increasing
  std::vector<double> levels;       // one positive level per segment
  double alpha_n = 0.0;

  [[nodiscard]] std::size_t segment_count() const noexcept { return starts.size(); }
  [[nodiscard]] std::size_t segment_end(std::size_t k) const {  // exclusive
    return k + 1 < starts.size() ? starts[k + 1] : n;
  }
  /// Per-day volatility S_t.
  [[nodiscard]] std::vector<double> expand() const;

  /// Levels set to the root mean square of r on each segment.
  [[nodiscard]] static PiecewiseVolatility from_starts(std::span<const double> r, std::vector<std::size_t> starts,
                                                       double alpha_n);
};

struct MultiscaleConfig {
  double alpha = 0.9;            // single-interval probability under white noise
  double alpha_n = 0.9999993;    // per-interval level used by the bounds
};

struct BoundCheck {
  bool satisfied = true;
  std::optional<Interval> first_violation;
  double statistic = 0.0;  // normalised sum of squares on first_violation
};

/// Checks every family interval against the chi-squared band. Throws
/// std::invalid_argument when lengths disagree.
[[nodiscard]] BoundCheck bounds_satisfied(std::span<const double> r, const PiecewiseVolatility& vol,
                                          const IntervalFamily& family, double alpha_n);

/// Minimal-segment admissible volatility. Segments are found by a left-to-right
/// breadth-first search over segment ends, so the count is the exact minimum
/// among segmentations whose family intervals inside each segment satisfy the
/// bounds. Intervals straddling a cut are then verified, and any violation is
/// repaired by cutting at its endpoints and re-segmenting locally. After a
/// repair, cuts whose removal keeps every bound satisfied are dropped. Throws
/// NumericalError when no admissible segmentation exists at alpha_n.
[[nodiscard]] PiecewiseVolatility estimate_piecewise_vol(std::span<const double> r, const MultiscaleConfig& cfg,
                                                         const IntervalFamily& family);
/// Same with the dyadic family for r.size().
[[nodiscard]] PiecewiseVolatility estimate_piecewise_vol(std::span<const double> r, const MultiscaleConfig& cfg);

/// Smallest alpha_n for which the whole series is a single admissible
/// segment, returned as the tail 1 - alpha_n (larger means easier).
[[nodiscard]] double single_interval_tail(std::span<const double> r, const IntervalFamily& family);

struct Calibration {
  double alpha_n = 0.0;
  std::size_t n = 0;
  double alpha = 0.0;
  std::size_t nsim = 0;
  std::vector<double> tails;  // per-replicate single_interval_tail
};

/// alpha_n such that standard Gaussian white noise of length n is a single
/// segment with frequency >= alpha over nsim replicates: the smallest value
/// where the (monotone) Monte-Carlo frequency reaches alpha. Replicate r uses
/// the seed derive_seed(seed, {r}), so the result does not depend on workers.
[[nodiscard]] Calibration calibrate_alpha_n(std::size_t n, double alpha, std::size_t nsim, std::uint64_t seed,
                                            unsigned workers = 1);

enum class Noise { gaussian, student_t };

struct ResidualDiagnostics {
  std::vector<double> residuals;  // r_t / S_t
  double kurtosis = 0.0;
  double reference_kurtosis = 0.0;  // raw kurtosis of the assumed noise (inf if undefined)
};

[[nodiscard]] ResidualDiagnostics residual_diagnostics(std::span<const double> r, const PiecewiseVolatility& vol,
                                                       Noise noise = Noise::gaussian, double dof = 5.0);

struct Sojourn {
  double level = 0.0;
  std::size_t length = 0;
};
[[nodiscard]] std::vector<Sojourn> sojourn_curve(const PiecewiseVolatility& vol);

/// start,end,level with 1-based inclusive indices.
void save_segments_csv(const std::filesystem::path& path, const PiecewiseVolatility& vol);
/// t,abs_return,level per day, for overlays.
void save_step_csv(const std::filesystem::path& path, std::span<const double> r, const PiecewiseVolatility& vol);
void save_sojourn_csv(const std::filesystem::path& path, const PiecewiseVolatility& vol);

}  // namespace lrsim::msvol
