#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lrsim/model.hpp"
#include "lrsim/return_sim.hpp"

/// GARCH(1,1) with Gaussian innovations and zero mean:
///   r_t = sigma_t Z_t,  sigma_t^2 = a0 + a1 r_{t-1}^2 + b1 sigma_{t-1}^2.
namespace lrsim::garch {

struct GarchParams {
  double a0 = 0.0;
  double a1 = 0.0;  // weight on the lagged squared return
  double b1 = 0.0;  // weight on the lagged variance
  double loglik = 0.0;
  bool stationary = false;

  void validate() const;
};

struct FitOptions {
  std::size_t max_iterations = 20000;
  double size_tolerance = 1e-9;  // simplex size in the log-parameter space
  std::size_t restarts = 3;      // re-runs from the previous optimum
};

/// Gaussian log-likelihood with sigma_1^2 set to the sample mean of r^2.
/// Returns -inf if any variance is not positive and finite.
[[nodiscard]] double log_likelihood(std::span<const double> r, double a0, double a1, double b1);

/// Quasi-maximum-likelihood fit over log a0, log a1, log b1 (positivity only,
/// stationarity is not imposed). Throws std::invalid_argument for fewer than
/// 100 returns and NumericalError when the simplex fails to converge.
[[nodiscard]] GarchParams fit_garch11(std::span<const double> r, const FitOptions& options = {});

/// a0 / (1 - a1 - b1), or nullopt when a1 + b1 >= 1.
[[nodiscard]] std::optional<double> unconditional_variance(const GarchParams& p);

struct SignScheme {
  SignModel model;
  double gamma = 1.0;
  double eacf1 = 0.0;
};

struct SimOptions {
  std::size_t burn_in = 1000;
  std::optional<SignScheme> signs;  // reassign signs, keeping magnitudes
};

struct GarchPath {
  std::vector<double> returns;
  std::vector<double> variances;
  bool overflowed = false;  // path truncated where the variance stopped being finite
};

/// Innovations and sign reassignment use separate sub-streams of `seed`, so
/// |returns| does not depend on whether a sign scheme is given.
[[nodiscard]] GarchPath simulate_garch11(const GarchParams& p, std::size_t n, std::uint64_t seed,
                                         const SimOptions& options = {});

class GarchModel final : public ReturnModel {
 public:
  explicit GarchModel(GarchParams params, SimOptions options = {});
  /// Throws NumericalError if the path overflows.
  [[nodiscard]] std::vector<double> simulate(std::size_t n, std::uint64_t seed) const override;
  [[nodiscard]] std::string label() const override { return "garch"; }
  [[nodiscard]] const GarchParams& params() const noexcept { return params_; }
  [[nodiscard]] const SimOptions& options() const noexcept { return options_; }

 private:
  GarchParams params_;
  SimOptions options_;
};

}  // namespace lrsim::garch
