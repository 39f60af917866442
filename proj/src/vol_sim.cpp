#include "lrsim/vol_sim.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <numeric>
#include <stdexcept>

#include "lrsim/errors.hpp"
#include "lrsim/fourier.hpp"
#include "lrsim/rng.hpp"

namespace lrsim::volsim {

std::string to_string(FrequencyOrder order) { return order == FrequencyOrder::index ? "index" : "energy"; }

FrequencyOrder frequency_order_from_string(const std::string& s) {
  if (s == "energy") return FrequencyOrder::energy;
  if (s == "index") return FrequencyOrder::index;
  throw ConfigError("unknown frequency order '" + s + "' (expected energy or index)");
}

void HighFreqParams::validate() const {
  if (!(lambda1 > 0.0) || !(lambda2 > 0.0)) throw ConfigError("lambda1 and lambda2 must be positive");
  if (!(sigma1 >= 0.0) || !(sigma2 >= 0.0)) throw ConfigError("sigma1 and sigma2 must be nonnegative");
  if (!(nu > 2.0)) throw ConfigError("nu must exceed 2");
}

void VolSimParams::validate() const {
  high.validate();
  if (!(delta >= 0.0)) throw ConfigError("delta must be nonnegative");
  if (low.n < 1) throw ConfigError("low-frequency model has no period");
  for (const auto& t : low.terms)
    if (t.frequency < 1 || 2 * t.frequency > low.n) throw ConfigError("trigonometric term frequency out of range");
}

LowFreqModel fit_low_freq(std::span<const double> log_vol, double pow, FrequencyOrder order) {
  const auto n = log_vol.size();
  if (n < 4) throw std::invalid_argument("fit_low_freq: need at least four values");
  if (!(pow > 0.0 && pow <= 1.0)) throw std::invalid_argument("fit_low_freq: pow must lie in (0, 1]");

  LowFreqModel model;
  model.n = n;
  model.pow = pow;
  model.order = order;
  model.mlv = std::accumulate(log_vol.begin(), log_vol.end(), 0.0) / static_cast<double>(n);

  // The basis runs over k = 1..n, i.e. k mod n = 1, ..., n-1, 0; rotate so the
  // DFT index equals k mod n.
  std::vector<double> z(n);
  z[0] = log_vol[n - 1] - model.mlv;
  for (std::size_t m = 1; m < n; ++m) z[m] = log_vol[m - 1] - model.mlv;
  double total = 0.0;
  for (double v : z) total += v * v;
  if (!(total > 0.0)) throw std::invalid_argument("fit_low_freq: constant log-volatility");

  const auto spec = fourier::real_dft(z);
  const auto nd = static_cast<double>(n);
  const std::size_t top = n / 2;
  std::vector<TrigTerm> all(top);
  std::vector<double> energy(top);
  for (std::size_t j = 1; j <= top; ++j) {
    const double c = spec[j].real();   // sum_k x_k cos(2 pi j k / n)
    const double s = -spec[j].imag();  // sum_k x_k sin(2 pi j k / n)
    if (2 * j == n) {
      all[j - 1] = {j, 0.0, c / nd};
      energy[j - 1] = c * c / nd;
    } else {
      all[j - 1] = {j, 2.0 * s / nd, 2.0 * c / nd};
      energy[j - 1] = 2.0 * (c * c + s * s) / nd;
    }
  }
  const double spectral_total = std::accumulate(energy.begin(), energy.end(), 0.0);

  std::vector<std::size_t> idx(top);
  std::iota(idx.begin(), idx.end(), 0);
  if (order == FrequencyOrder::energy)
    std::stable_sort(idx.begin(), idx.end(), [&](auto l, auto r) { return energy[l] > energy[r]; });

  double cum = 0.0;
  for (auto i : idx) {
    model.terms.push_back(all[i]);
    cum += energy[i];
    if (cum / spectral_total >= pow) break;
  }
  model.explained = std::min(1.0, cum / spectral_total);
  return model;
}

namespace {

/// Adds coefficient-scaled terms at k = 1..length using a rotation recurrence,
/// re-anchored periodically so the accumulated phase error stays ~1e-13.
void accumulate_terms(const LowFreqModel& model, std::span<const double> scale_a, std::span<const double> scale_b,
                      std::span<double> out) {
  constexpr std::size_t reanchor = 512;
  const double base = 2.0 * std::numbers::pi / static_cast<double>(model.n);
  for (std::size_t i = 0; i < model.terms.size(); ++i) {
    const auto& term = model.terms[i];
    const double a = term.a * scale_a[i];
    const double b = term.b * scale_b[i];
    if (a == 0.0 && b == 0.0) continue;
    const double theta = base * static_cast<double>(term.frequency);
    const std::complex<double> step = std::polar(1.0, theta);
    std::complex<double> w;
    for (std::size_t k = 1; k <= out.size(); ++k) {
      if ((k - 1) % reanchor == 0) {
        // Reduce j*k mod n exactly before forming the angle.
        const auto jk = (term.frequency * k) % model.n;
        w = std::polar(1.0, base * static_cast<double>(jk));
      } else {
        w *= step;
      }
      out[k - 1] += a * w.imag() + b * w.real();
    }
  }
}

}  // namespace

double explained_fraction(std::span<const double> log_vol, const LowFreqModel& model, std::size_t terms) {
  if (log_vol.size() != model.n) throw std::invalid_argument("explained_fraction: length mismatch");
  LowFreqModel head = model;
  head.terms.resize(std::min(terms, model.terms.size()));
  const auto fit = low_freq_path(head);
  double ss = 0.0, rss = 0.0;
  for (std::size_t k = 0; k < model.n; ++k) {
    const double c = log_vol[k] - model.mlv;
    ss += c * c;
    rss += (c - fit[k]) * (c - fit[k]);
  }
  return 1.0 - rss / ss;
}

std::vector<double> low_freq_path(const LowFreqModel& model, std::size_t length) {
  std::vector<double> out(length, 0.0);
  const std::vector<double> ones(model.terms.size(), 1.0);
  accumulate_terms(model, ones, ones, out);
  return out;
}

std::vector<double> low_freq_path(const LowFreqModel& model) { return low_freq_path(model, model.n); }

std::vector<double> randomize_low_freq(const LowFreqModel& model, std::uint64_t seed, std::size_t length) {
  Rng rng(seed);
  std::vector<double> za(model.terms.size()), zb(model.terms.size());
  for (std::size_t i = 0; i < model.terms.size(); ++i) {
    za[i] = rng.normal();
    zb[i] = rng.normal();
  }
  std::vector<double> out(length, 0.0);
  accumulate_terms(model, za, zb, out);
  return out;
}

std::vector<double> simulate_high_freq(std::size_t n, const HighFreqParams& p, std::uint64_t seed) {
  p.validate();
  Rng rng(seed);
  std::vector<double> out;
  out.reserve(n);
  bool calm = p.start_calm;
  while (out.size() < n) {
    const double mean_len = calm ? p.lambda1 : p.lambda2;
    const double draw = std::ceil(rng.exponential(mean_len));
    const auto len = static_cast<std::size_t>(std::clamp(draw, 1.0, static_cast<double>(n)));
    const auto fill = std::min(len, n - out.size());
    for (std::size_t i = 0; i < fill; ++i) {
      if (calm) out.push_back(p.sigma1 == 0.0 ? 0.0 : p.sigma1 * rng.normal());
      else out.push_back(p.sigma2 == 0.0 ? 0.0 : p.sigma2 * rng.student_t(p.nu));
    }
    calm = !calm;
  }
  return out;
}

std::vector<double> simulate_volatility(const VolSimParams& params, std::size_t n, std::uint64_t seed) {
  params.validate();
  const auto low = randomize_low_freq(params.low, derive_seed(seed, {1}), n);
  const auto high = simulate_high_freq(n, params.high, derive_seed(seed, {2}));
  Rng level_rng(derive_seed(seed, {3}));
  const double shift = params.delta * (2.0 * level_rng.uniform() - 1.0);
  std::vector<double> sigma(n);
  for (std::size_t k = 0; k < n; ++k) sigma[k] = std::exp(params.low.mlv + shift + low[k] + high[k]);
  return sigma;
}

std::vector<double> log_of(std::span<const double> sigma) {
  std::vector<double> out(sigma.size());
  for (std::size_t i = 0; i < sigma.size(); ++i) {
    if (!(sigma[i] > 0.0)) throw std::invalid_argument("log_of: volatility must be positive");
    out[i] = std::log(sigma[i]);
  }
  return out;
}

}  // namespace lrsim::volsim
