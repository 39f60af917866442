#include "lrsim/stats_core.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <stdexcept>

#include "lrsim/distributions.hpp"
#include "lrsim/errors.hpp"
#include "lrsim/fourier.hpp"

namespace lrsim::stats {

double mean(std::span<const double> x) {
  if (x.empty()) throw std::invalid_argument("mean: empty input");
  return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

double quantile_sorted(std::span<const double> sorted, double p) {
  if (sorted.empty()) throw std::invalid_argument("quantile_sorted: empty input");
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("quantile_sorted: p outside [0, 1]");
  const double h = (static_cast<double>(sorted.size()) - 1.0) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

double median(std::span<const double> x) {
  std::vector<double> s(x.begin(), x.end());
  std::sort(s.begin(), s.end());
  return quantile_sorted(s, 0.5);
}

namespace {

std::vector<double> centred(std::span<const double> x, double& ss) {
  const double m = mean(x);
  std::vector<double> c(x.size());
  ss = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    c[i] = x[i] - m;
    ss += c[i] * c[i];
  }
  return c;
}

void check_acf_args(std::span<const double> x, std::size_t max_lag) {
  if (max_lag == 0) throw std::invalid_argument("acf: max_lag must be positive");
  if (x.size() <= max_lag) throw std::invalid_argument("acf: need more observations than lags");
}

std::size_t next_pow2(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

}  // namespace

AcfCurve acf_direct(std::span<const double> x, std::size_t max_lag) {
  check_acf_args(x, max_lag);
  double ss = 0.0;
  const auto c = centred(x, ss);
  if (ss == 0.0) throw std::invalid_argument("acf: constant input");
  AcfCurve out;
  out.values.resize(max_lag);
  const auto n = x.size();
  for (std::size_t k = 1; k <= max_lag; ++k) {
    double s = 0.0;
    for (std::size_t t = 0; t + k < n; ++t) s += c[t] * c[t + k];
    out.values[k - 1] = s / ss;
  }
  return out;
}

AcfCurve acf(std::span<const double> x, std::size_t max_lag) {
  check_acf_args(x, max_lag);
  if (x.size() * max_lag < (1u << 16)) return acf_direct(x, max_lag);
  double ss = 0.0;
  auto c = centred(x, ss);
  if (ss == 0.0) throw std::invalid_argument("acf: constant input");
  // Zero padding to >= n + max_lag keeps circular wrap-around out of lags 1..max_lag.
  const auto size = next_pow2(x.size() + max_lag);
  c.resize(size, 0.0);
  auto spec = fourier::real_dft(c);
  for (auto& z : spec) z = std::norm(z);
  const auto corr = fourier::inverse_real_dft(spec, size);
  AcfCurve out;
  out.values.resize(max_lag);
  for (std::size_t k = 1; k <= max_lag; ++k) out.values[k - 1] = std::clamp(corr[k] / ss, -1.0, 1.0);
  return out;
}

AcfCurve abs_acf(std::span<const double> x, std::size_t max_lag) {
  std::vector<double> a(x.size());
  std::transform(x.begin(), x.end(), a.begin(), [](double v) { return std::abs(v); });
  return acf(a, max_lag);
}

double sign_acf1(std::span<const double> r) {
  if (r.size() < 3) throw std::invalid_argument("sign_acf1: need at least three returns");
  std::vector<double> s(r.size());
  std::transform(r.begin(), r.end(), s.begin(), [](double v) { return v > 0.0 ? 1.0 : -1.0; });
  if (std::all_of(s.begin(), s.end(), [&](double v) { return v == s.front(); }))
    throw std::invalid_argument("sign_acf1: all signs equal");
  return acf_direct(s, 1).values.front();
}

std::vector<double> normal_abs_reference(std::size_t n) {
  std::vector<double> aq(n);
  const double denom = static_cast<double>(n) + 1.0;
  for (std::size_t i = 0; i < n; ++i) aq[i] = std::abs(dist::normal_quantile(static_cast<double>(i + 1) / denom));
  std::sort(aq.begin(), aq.end());
  const double med = quantile_sorted(aq, 0.5);
  for (auto& v : aq) v /= med;
  return aq;
}

namespace {

double heavy_tail_with_reference(std::span<const double> r, std::span<const double> aq, double trim) {
  if (aq.size() != r.size()) throw std::invalid_argument("heavy_tail_measure: reference length mismatch");
  if (r.size() < 100) throw std::invalid_argument("heavy_tail_measure: need at least 100 returns");
  if (!(trim >= 0.0 && trim < 0.5)) throw std::invalid_argument("heavy_tail_measure: trim outside [0, 0.5)");
  std::vector<double> eaq(r.size());
  std::transform(r.begin(), r.end(), eaq.begin(), [](double v) { return std::abs(v); });
  std::sort(eaq.begin(), eaq.end());
  const double med = quantile_sorted(eaq, 0.5);
  if (!(med > 0.0)) throw std::invalid_argument("heavy_tail_measure: median absolute return is zero");
  std::vector<double> diff(eaq.size());
  for (std::size_t i = 0; i < eaq.size(); ++i) diff[i] = eaq[i] / med - aq[i];
  const auto cut = static_cast<std::size_t>(std::floor(static_cast<double>(diff.size()) * trim));
  if (cut > 0) std::sort(diff.begin(), diff.end());
  const auto kept = std::span<const double>(diff).subspan(cut, diff.size() - 2 * cut);
  return mean(kept);
}

}  // namespace

double heavy_tail_measure(std::span<const double> r, double trim) {
  if (r.size() < 100) throw std::invalid_argument("heavy_tail_measure: need at least 100 returns");
  const auto aq = normal_abs_reference(r.size());
  return heavy_tail_with_reference(r, aq, trim);
}

double heavy_tail_measure(std::span<const double> r, std::span<const double> reference, double trim) {
  return heavy_tail_with_reference(r, reference, trim);
}

double kurtosis(std::span<const double> x) {
  if (x.size() < 4) throw std::invalid_argument("kurtosis: need at least four values");
  const double m = mean(x);
  double m2 = 0.0, m4 = 0.0;
  for (double v : x) {
    const double d2 = (v - m) * (v - m);
    m2 += d2;
    m4 += d2 * d2;
  }
  if (m2 == 0.0) throw std::invalid_argument("kurtosis: zero variance");
  const auto n = static_cast<double>(x.size());
  m2 /= n;
  m4 /= n;
  return m4 / (m2 * m2);
}

double kuiper_distance_sorted(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw std::invalid_argument("kuiper_distance: empty sample");
  const auto na = static_cast<double>(a.size());
  const auto nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double d_plus = 0.0, d_minus = 0.0;
  while (i < a.size() || j < b.size()) {
    double x;
    if (i == a.size()) x = b[j];
    else if (j == b.size()) x = a[i];
    else x = std::min(a[i], b[j]);
    // Ties are consumed together so both CDFs jump at the same point.
    while (i < a.size() && a[i] == x) ++i;
    while (j < b.size() && b[j] == x) ++j;
    const double diff = static_cast<double>(i) / na - static_cast<double>(j) / nb;
    d_plus = std::max(d_plus, diff);
    d_minus = std::max(d_minus, -diff);
  }
  return d_plus + d_minus;
}

double kuiper_distance(std::span<const double> a, std::span<const double> b) {
  std::vector<double> sa(a.begin(), a.end()), sb(b.begin(), b.end());
  std::sort(sa.begin(), sa.end());
  std::sort(sb.begin(), sb.end());
  return kuiper_distance_sorted(sa, sb);
}

double kuiper_tail(double lambda) {
  if (!(lambda >= 0.0)) throw std::invalid_argument("kuiper_tail: negative lambda");
  // Below 0.4 the tail exceeds 1 - 1e-9 and the series is ill-conditioned.
  if (lambda < 0.4) return 1.0;
  const double l2 = lambda * lambda;
  double sum = 0.0;
  for (int j = 1; j < 10000; ++j) {
    const double jj = static_cast<double>(j) * j;
    const double term = (4.0 * jj * l2 - 1.0) * std::exp(-2.0 * jj * l2);
    sum += term;
    // Term j = 1 vanishes at lambda = 0.5; only stop once terms are decaying.
    if (4.0 * jj * l2 > 1.0 && std::abs(term) < 1e-17) break;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

KuiperAsymmetry kuiper_asymmetry(std::span<const double> r) {
  std::vector<double> pos, neg;
  for (double v : r) {
    if (v > 0.0) pos.push_back(v);
    else if (v < 0.0) neg.push_back(-v);
  }
  if (pos.empty() || neg.empty())
    throw std::invalid_argument("kuiper_asymmetry: need both positive and negative returns");
  KuiperAsymmetry out;
  out.n_positive = pos.size();
  out.n_negative = neg.size();
  out.distance = kuiper_distance(pos, neg);
  const double np = static_cast<double>(pos.size()), nn = static_cast<double>(neg.size());
  out.asymptotic_p = kuiper_tail(std::sqrt(np * nn / (np + nn)) * out.distance);
  return out;
}

double pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("pearson: need two equal-length samples");
  const double mx = mean(x), my = mean(y);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  // Undefined for a constant coordinate; reported as no correlation.
  if (sxx == 0.0 || syy == 0.0) return 0.0;
  return sxy / std::sqrt(sxx * syy);
}

GainLossCurve gain_loss_curve(std::span<const double> r, std::size_t bins, double q_lo, double q_hi) {
  if (bins == 0) throw std::invalid_argument("gain_loss_curve: bins must be positive");
  if (!(0.0 <= q_lo && q_lo < q_hi && q_hi <= 1.0)) throw std::invalid_argument("gain_loss_curve: bad quantile range");
  if (r.size() < bins * 10) throw std::invalid_argument("gain_loss_curve: need at least 10 returns per bin");

  std::vector<std::pair<double, bool>> mag(r.size());
  for (std::size_t i = 0; i < r.size(); ++i) mag[i] = {std::abs(r[i]), r[i] > 0.0};
  std::sort(mag.begin(), mag.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  std::vector<double> sorted_abs(mag.size());
  std::transform(mag.begin(), mag.end(), sorted_abs.begin(), [](const auto& m) { return m.first; });
  const double lo = quantile_sorted(sorted_abs, q_lo);
  const double hi = quantile_sorted(sorted_abs, q_hi);
  const auto first = std::lower_bound(sorted_abs.begin(), sorted_abs.end(), lo) - sorted_abs.begin();
  const auto last = std::upper_bound(sorted_abs.begin(), sorted_abs.end(), hi) - sorted_abs.begin();
  const auto m = static_cast<std::size_t>(last - first);
  if (m / bins < 5) throw std::invalid_argument("gain_loss_curve: fewer than 5 observations per bin");

  GainLossCurve out;
  for (std::size_t b = 0; b < bins; ++b) {
    const auto s = static_cast<std::size_t>(first) + b * m / bins;
    const auto e = static_cast<std::size_t>(first) + (b + 1) * m / bins;
    std::size_t positive = 0;
    for (auto i = s; i < e; ++i) positive += mag[i].second ? 1 : 0;
    out.bin_centers.push_back(quantile_sorted(std::span<const double>(sorted_abs).subspan(s, e - s), 0.5));
    out.pos_frequency.push_back(static_cast<double>(positive) / static_cast<double>(e - s));
    out.bin_counts.push_back(e - s);
  }
  out.correlation = pearson(out.bin_centers, out.pos_frequency);
  return out;
}

double d_acf(const AcfCurve& a1, const AcfCurve& a2) {
  if (a1.values.size() != a2.values.size() || a1.values.empty())
    throw std::invalid_argument("d_acf: curves must have the same positive number of lags");
  double s = 0.0;
  for (std::size_t i = 0; i < a1.values.size(); ++i) s += std::abs(a1.values[i] - a2.values[i]);
  return s / static_cast<double>(a1.values.size());
}

double end_return(std::span<const double> r, ReturnKind kind) {
  if (r.empty()) throw std::invalid_argument("end_return: empty series");
  double s = 0.0;
  for (double v : r) {
    if (kind == ReturnKind::log) {
      s += v;
    } else {
      if (v <= -1.0) throw std::invalid_argument("end_return: simple return <= -1");
      s += std::log1p(v);
    }
  }
  return std::exp(s);
}

AbsMoments abs_moments(std::span<const double> r) {
  if (r.empty()) throw std::invalid_argument("abs_moments: empty series");
  AbsMoments m;
  for (double v : r) {
    m.mean_abs += std::abs(v);
    m.mean_sq += v * v;
  }
  m.mean_abs /= static_cast<double>(r.size());
  m.mean_sq /= static_cast<double>(r.size());
  return m;
}

double quantile_mad(std::span<const double> sorted_a, std::span<const double> sorted_b) {
  if (sorted_a.size() != sorted_b.size() || sorted_a.empty())
    throw std::invalid_argument("quantile_mad: sequences must have equal positive length");
  if (!std::is_sorted(sorted_a.begin(), sorted_a.end()) || !std::is_sorted(sorted_b.begin(), sorted_b.end()))
    throw std::invalid_argument("quantile_mad: inputs must be sorted ascending");
  double s = 0.0;
  for (std::size_t i = 0; i < sorted_a.size(); ++i) s += std::abs(sorted_a[i] - sorted_b[i]);
  return s / static_cast<double>(sorted_a.size());
}

void save_acf_csv(const std::filesystem::path& path, const AcfCurve& curve) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out << "lag,acf\n";
  for (std::size_t k = 0; k < curve.values.size(); ++k) out << k + 1 << ',' << format_double(curve.values[k]) << '\n';
}

void save_gain_loss_csv(const std::filesystem::path& path, const GainLossCurve& curve) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out << "abs_return,positive_fraction\n";
  for (std::size_t k = 0; k < curve.bin_centers.size(); ++k)
    out << format_double(curve.bin_centers[k]) << ',' << format_double(curve.pos_frequency[k]) << '\n';
}

}  // namespace lrsim::stats
