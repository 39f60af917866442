#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

/// Randomised log-volatility paths: a trigonometric low-frequency component
/// fitted to the centred log of a piecewise-constant volatility, a
/// regime-switching high-frequency residual, and a random level shift.
namespace lrsim::volsim {

/// One trigonometric term a sin(2 pi j k / n) + b cos(2 pi j k / n).
struct TrigTerm {
  std::size_t frequency = 0;  // j, 1 <= j <= n/2
  double a = 0.0;
  double b = 0.0;
};

enum class FrequencyOrder {
  energy,  // largest explained variance first (minimal J)
  index,   // j = 1, 2, ...
};

struct LowFreqModel {
  std::size_t n = 0;      // period of the basis
  double pow = 0.8;       // target explained-variance fraction
  double mlv = 0.0;       // mean log-volatility removed before fitting
  double explained = 0.0; // fraction actually explained by `terms`
  FrequencyOrder order = FrequencyOrder::energy;
  std::vector<TrigTerm> terms;  // in selection order
};

struct HighFreqParams {
  double lambda1 = 200.0;  // mean length of the calm regime, days
  double sigma1 = 0.0;     // N(0, sigma1^2) log-vol noise in the calm regime
  double lambda2 = 20.0;   // mean length of the turbulent regime, days
  double sigma2 = 0.4;     // scale of sigma2 * T_nu in the turbulent regime
  double nu = 15.0;        // t degrees of freedom
  bool start_calm = true;  // first regime is the lambda1 one

  void validate() const;
};

struct VolSimParams {
  LowFreqModel low;
  HighFreqParams high;
  double delta = 0.2;  // level shift is Uniform[-delta, delta], once per path

  void validate() const;
};

/// Least-squares trigonometric fit of log_vol - mean(log_vol) via the DFT.
/// Frequencies are added in `order` until the explained fraction reaches
/// pow. Throws std::invalid_argument for constant input, n < 4 or pow outside
/// (0, 1].
[[nodiscard]] LowFreqModel fit_low_freq(std::span<const double> log_vol, double pow,
                                        FrequencyOrder order = FrequencyOrder::energy);

/// Fraction of the centred variance explained by the first `terms` terms
/// of the model's selection (used to check minimality of J).
[[nodiscard]] double explained_fraction(std::span<const double> log_vol, const LowFreqModel& model,
                                        std::size_t terms);

/// Sum of the model's terms at k = 1..length (period model.n). No mean added.
[[nodiscard]] std::vector<double> low_freq_path(const LowFreqModel& model, std::size_t length);
[[nodiscard]] std::vector<double> low_freq_path(const LowFreqModel& model);

/// Path with every a_j and b_j multiplied by an independent N(0, 1) draw.
[[nodiscard]] std::vector<double> randomize_low_freq(const LowFreqModel& model, std::uint64_t seed,
                                                     std::size_t length);

/// Alternating regimes with lengths ceil(Exp(mean lambda)) (at least one day):
/// N(0, sigma1^2) on calm stretches, sigma2 * T_nu on turbulent ones.
[[nodiscard]] std::vector<double> simulate_high_freq(std::size_t n, const HighFreqParams& p, std::uint64_t seed);

/// exp(mlv + Delta + randomised low frequency + high frequency).
[[nodiscard]] std::vector<double> simulate_volatility(const VolSimParams& params, std::size_t n, std::uint64_t seed);

/// Per-day log volatility from a step function, e.g. PiecewiseVolatility::expand().
[[nodiscard]] std::vector<double> log_of(std::span<const double> sigma);

[[nodiscard]] std::string to_string(FrequencyOrder order);
[[nodiscard]] FrequencyOrder frequency_order_from_string(const std::string& s);

}  // namespace lrsim::volsim
