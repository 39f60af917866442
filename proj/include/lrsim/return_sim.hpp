#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "lrsim/model.hpp"
#include "lrsim/series_io.hpp"
#include "lrsim/vol_sim.hpp"

/// From a volatility path to signed returns: correlated noise magnitudes,
/// tail shaping, magnitude-dependent signs and lag-one sign dependence.
namespace lrsim {

/// Positive-sign frequency as a function of |r|. Bin i covers
/// (edges[i-1], edges[i]]; the first bin also takes everything below
/// edges[0] and the last everything above edges.back().
struct SignModel {
  std::vector<double> edges;     // strictly increasing upper edges
  std::vector<double> pos_freq;  // one frequency in [0, 1] per bin
  std::size_t requested_bins = 50;

  [[nodiscard]] std::size_t bins() const noexcept { return edges.size(); }
  [[nodiscard]] std::size_t bin_of(double magnitude) const;
  void validate() const;
};

struct ReturnSimParams {
  double rho = 0.0;    // magnitude correlation
  double eta = 0.0;    // tail exponent
  double gamma = 1.0;  // weight of the fitted sign model against a fair coin
  double eacf1 = 0.0;  // target lag-one sign autocorrelation
  SignModel sign_model;
  bool allow_negative_rho = false;

  void validate() const;
};

/// Zt_1 = Z_1 and Zt_t = (rho |Z_{t-1}| + 1) Z_t / sqrt(1 + 2 rho sqrt(2/pi) + rho^2),
/// Z i.i.d. standard normal. Each Zt_t, t >= 2, has unit variance.
[[nodiscard]] std::vector<double> gen_ztilde(std::size_t n, double rho, std::uint64_t seed);

/// sigma |z| (1 + |z|)^eta.
[[nodiscard]] double abs_return(double sigma, double z, double eta);

/// Edges at the i/nu_bins quantiles of |r| (i = 1..nu_bins) and the share of
/// positive returns in each bin. Tied edges are merged, leaving fewer bins
/// than requested. Throws std::invalid_argument if r has fewer than
/// 10 * nu_bins values.
[[nodiscard]] SignModel fit_sign_model(std::span<const double> r, std::size_t nu_bins = 50);

/// Gives each magnitude a sign, positive with probability
/// gamma * p(bin) + (1 - gamma) / 2.
[[nodiscard]] std::vector<double> assign_signs(std::span<const double> abs_returns, const SignModel& model,
                                               double gamma, std::uint64_t seed);

/// For t >= 2, with probability |eacf1| the sign of r_t is replaced by the
/// (already final) sign of r_{t-1}, flipped when eacf1 < 0.
[[nodiscard]] std::vector<double> inject_sign_acf(std::span<const double> signed_returns, double eacf1,
                                                  std::uint64_t seed);

/// simulate_volatility, gen_ztilde, abs_return, assign_signs, inject_sign_acf
/// on independent sub-streams of `seed`.
[[nodiscard]] std::vector<double> simulate_return_path(const volsim::VolSimParams& vol, const ReturnSimParams& ret,
                                                       std::size_t n, std::uint64_t seed);

[[nodiscard]] ReturnSeries simulate_returns(const volsim::VolSimParams& vol, const ReturnSimParams& ret,
                                            std::size_t n, std::uint64_t seed, ReturnKind kind = ReturnKind::log);

class StylizedModel final : public ReturnModel {
 public:
  StylizedModel(volsim::VolSimParams vol, ReturnSimParams ret);
  [[nodiscard]] std::vector<double> simulate(std::size_t n, std::uint64_t seed) const override;
  [[nodiscard]] std::string label() const override { return "stylized"; }
  [[nodiscard]] const volsim::VolSimParams& vol() const noexcept { return vol_; }
  [[nodiscard]] const ReturnSimParams& returns() const noexcept { return ret_; }

 private:
  volsim::VolSimParams vol_;
  ReturnSimParams ret_;
};

struct RhoScore {
  double rho = 0.0;
  double mean_abs_acf1 = 0.0;
};

/// Grid search helper: mean lag-one ACF of |r| over `paths` simulations for
/// each rho in the grid, ordered by closeness to `target` (best first).
[[nodiscard]] std::vector<RhoScore> tune_rho(const volsim::VolSimParams& vol, ReturnSimParams ret,
                                             std::span<const double> grid, double target, std::size_t n,
                                             std::size_t paths, std::uint64_t seed, unsigned workers = 1);

}  // namespace lrsim
