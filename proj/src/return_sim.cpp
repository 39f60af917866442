#include "lrsim/return_sim.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "lrsim/errors.hpp"
#include "lrsim/parallel.hpp"
#include "lrsim/rng.hpp"
#include "lrsim/stats_core.hpp"

namespace lrsim {

std::size_t SignModel::bin_of(double magnitude) const {
  const auto it = std::lower_bound(edges.begin(), edges.end(), magnitude);
  if (it == edges.end()) return edges.size() - 1;
  return static_cast<std::size_t>(it - edges.begin());
}

void SignModel::validate() const {
  if (edges.empty()) throw ConfigError("sign model has no bins");
  if (edges.size() != pos_freq.size()) throw ConfigError("sign model edges and frequencies differ in length");
  for (std::size_t i = 1; i < edges.size(); ++i)
    if (!(edges[i] > edges[i - 1])) throw ConfigError("sign model edges must be strictly increasing");
  for (double p : pos_freq)
    if (!(p >= 0.0 && p <= 1.0)) throw ConfigError("sign model frequencies must lie in [0, 1]");
}

void ReturnSimParams::validate() const {
  if (!std::isfinite(rho) || (rho < 0.0 && !allow_negative_rho))
    throw ConfigError("rho must be nonnegative (set allow_negative_rho to override)");
  if (!std::isfinite(eta)) throw ConfigError("eta must be finite");
  if (!(gamma >= 0.0 && gamma <= 1.0)) throw ConfigError("gamma must lie in [0, 1]");
  if (!(std::abs(eacf1) < 1.0)) throw ConfigError("eacf1 must lie in (-1, 1)");
  sign_model.validate();
}

std::vector<double> gen_ztilde(std::size_t n, double rho, std::uint64_t seed) {
  if (n == 0) throw std::invalid_argument("gen_ztilde: n must be positive");
  Rng rng(seed);
  const double norm = std::sqrt(1.0 + 2.0 * rho * std::sqrt(2.0 / std::numbers::pi) + rho * rho);
  std::vector<double> out(n);
  double prev = rng.normal();
  out[0] = prev;
  for (std::size_t t = 1; t < n; ++t) {
    const double z = rng.normal();
    out[t] = (rho * std::abs(prev) + 1.0) * z / norm;
    prev = z;
  }
  return out;
}

double abs_return(double sigma, double z, double eta) {
  const double a = std::abs(z);
  return eta == 0.0 ? sigma * a : sigma * a * std::pow(1.0 + a, eta);
}

SignModel fit_sign_model(std::span<const double> r, std::size_t nu_bins) {
  if (nu_bins == 0) throw std::invalid_argument("fit_sign_model: nu_bins must be positive");
  if (r.size() < 10 * nu_bins) throw std::invalid_argument("fit_sign_model: need at least 10 * nu_bins returns");
  std::vector<double> mags(r.size());
  std::transform(r.begin(), r.end(), mags.begin(), [](double v) { return std::abs(v); });
  std::sort(mags.begin(), mags.end());

  SignModel model;
  model.requested_bins = nu_bins;
  for (std::size_t i = 1; i <= nu_bins; ++i) {
    const double e = stats::quantile_sorted(mags, static_cast<double>(i) / static_cast<double>(nu_bins));
    if (model.edges.empty() || e > model.edges.back()) model.edges.push_back(e);
  }
  std::vector<std::size_t> pos(model.edges.size(), 0), total(model.edges.size(), 0);
  for (double v : r) {
    const auto b = model.bin_of(std::abs(v));
    ++total[b];
    if (v > 0.0) ++pos[b];
  }
  model.pos_freq.resize(model.edges.size());
  for (std::size_t b = 0; b < model.edges.size(); ++b)
    model.pos_freq[b] = total[b] ? static_cast<double>(pos[b]) / static_cast<double>(total[b]) : 0.5;
  return model;
}

std::vector<double> assign_signs(std::span<const double> abs_returns, const SignModel& model, double gamma,
                                 std::uint64_t seed) {
  model.validate();
  if (!(gamma >= 0.0 && gamma <= 1.0)) throw std::invalid_argument("assign_signs: gamma must lie in [0, 1]");
  Rng rng(seed);
  std::vector<double> out(abs_returns.size());
  for (std::size_t t = 0; t < abs_returns.size(); ++t) {
    const double m = abs_returns[t];
    if (m < 0.0) throw std::invalid_argument("assign_signs: magnitudes must be nonnegative");
    const double p = gamma * model.pos_freq[model.bin_of(m)] + (1.0 - gamma) / 2.0;
    out[t] = rng.uniform() < p ? m : -m;
  }
  return out;
}

std::vector<double> inject_sign_acf(std::span<const double> signed_returns, double eacf1, std::uint64_t seed) {
  if (!(std::abs(eacf1) <= 1.0)) throw std::invalid_argument("inject_sign_acf: |eacf1| must not exceed 1");
  std::vector<double> out(signed_returns.begin(), signed_returns.end());
  if (eacf1 == 0.0 || out.size() < 2) return out;
  Rng rng(seed);
  const double prob = std::abs(eacf1);
  for (std::size_t t = 1; t < out.size(); ++t) {
    if (rng.uniform() >= prob) continue;
    const bool prev_positive = out[t - 1] > 0.0;
    const bool positive = eacf1 > 0.0 ? prev_positive : !prev_positive;
    out[t] = positive ? std::abs(out[t]) : -std::abs(out[t]);
  }
  return out;
}

std::vector<double> simulate_return_path(const volsim::VolSimParams& vol, const ReturnSimParams& ret, std::size_t n,
                                         std::uint64_t seed) {
  ret.validate();
  const auto sigma = volsim::simulate_volatility(vol, n, derive_seed(seed, {10}));
  const auto z = gen_ztilde(n, ret.rho, derive_seed(seed, {11}));
  std::vector<double> mags(n);
  for (std::size_t t = 0; t < n; ++t) mags[t] = abs_return(sigma[t], z[t], ret.eta);
  const auto signed_r = assign_signs(mags, ret.sign_model, ret.gamma, derive_seed(seed, {12}));
  return inject_sign_acf(signed_r, ret.eacf1, derive_seed(seed, {13}));
}

ReturnSeries simulate_returns(const volsim::VolSimParams& vol, const ReturnSimParams& ret, std::size_t n,
                              std::uint64_t seed, ReturnKind kind) {
  return ReturnSeries(simulate_return_path(vol, ret, n, seed), {}, "simulated", kind);
}

StylizedModel::StylizedModel(volsim::VolSimParams vol, ReturnSimParams ret) : vol_(std::move(vol)), ret_(std::move(ret)) {
  vol_.validate();
  ret_.validate();
}

std::vector<double> StylizedModel::simulate(std::size_t n, std::uint64_t seed) const {
  return simulate_return_path(vol_, ret_, n, seed);
}

std::vector<RhoScore> tune_rho(const volsim::VolSimParams& vol, ReturnSimParams ret, std::span<const double> grid,
                               double target, std::size_t n, std::size_t paths, std::uint64_t seed, unsigned workers) {
  if (grid.empty() || paths == 0) throw std::invalid_argument("tune_rho: empty grid or no paths");
  std::vector<RhoScore> scores;
  for (std::size_t g = 0; g < grid.size(); ++g) {
    ret.rho = grid[g];
    std::vector<double> acf1(paths);
    parallel_for(paths, workers, [&](std::size_t i) {
      // Common random numbers across the grid.
      const auto r = simulate_return_path(vol, ret, n, derive_seed(seed, {i}));
      acf1[i] = stats::abs_acf(r, 1).values[0];
    });
    scores.push_back({grid[g], stats::mean(acf1)});
  }
  std::stable_sort(scores.begin(), scores.end(), [&](const RhoScore& a, const RhoScore& b) {
    return std::abs(a.mean_abs_acf1 - target) < std::abs(b.mean_abs_acf1 - target);
  });
  return scores;
}

}  // namespace lrsim
