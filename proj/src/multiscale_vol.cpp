#include "lrsim/multiscale_vol.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <stdexcept>

#include "lrsim/distributions.hpp"
#include "lrsim/errors.hpp"
#include "lrsim/parallel.hpp"
#include "lrsim/rng.hpp"
#include "lrsim/series_io.hpp"
#include "lrsim/stats_core.hpp"

namespace lrsim::msvol {

IntervalFamily build_interval_family(std::size_t n) {
  if (n < 1) throw std::invalid_argument("build_interval_family: n must be positive");
  IntervalFamily fam{n, {}, "dyadic-half-overlap"};
  for (std::size_t len = 1; len <= n; len *= 2) {
    const std::size_t step = std::max<std::size_t>(1, len / 2);
    for (std::size_t s = 0; s + len <= n; s += step) fam.intervals.push_back({s, s + len - 1});
  }
  return fam;
}

IntervalFamily singleton_and_full_family(std::size_t n) {
  if (n < 1) throw std::invalid_argument("singleton_and_full_family: n must be positive");
  IntervalFamily fam{n, {}, "singletons+full"};
  for (std::size_t t = 0; t < n; ++t) fam.intervals.push_back({t, t});
  if (n > 1) fam.intervals.push_back({0, n - 1});
  return fam;
}

ChiSquareBand::ChiSquareBand(double alpha_n) : alpha_n_(alpha_n), tail_((1.0 - alpha_n) / 2.0) {
  if (!(alpha_n > 0.0 && alpha_n < 1.0)) throw std::invalid_argument("alpha_n must lie in (0, 1)");
}

const ChiSquareBand::Bounds& ChiSquareBand::bounds(std::size_t dof) const {
  if (dof >= cache_.size()) cache_.resize(dof + 1);
  auto& slot = cache_[dof];
  if (!slot) {
    const auto k = static_cast<double>(dof);
    slot = Bounds{dist::chi2_quantile(tail_, k), dist::chi2_upper_quantile(tail_, k)};
  }
  return *slot;
}

double ChiSquareBand::lower(std::size_t dof) const { return bounds(dof).lower; }
double ChiSquareBand::upper(std::size_t dof) const { return bounds(dof).upper; }

std::vector<double> PiecewiseVolatility::expand() const {
  std::vector<double> out(n);
  for (std::size_t k = 0; k < starts.size(); ++k)
    std::fill(out.begin() + static_cast<std::ptrdiff_t>(starts[k]),
              out.begin() + static_cast<std::ptrdiff_t>(segment_end(k)), levels[k]);
  return out;
}

namespace {

std::vector<double> square_prefix(std::span<const double> r) {
  std::vector<double> p(r.size() + 1, 0.0);
  for (std::size_t t = 0; t < r.size(); ++t) p[t + 1] = p[t] + r[t] * r[t];
  return p;
}

}  // namespace

PiecewiseVolatility PiecewiseVolatility::from_starts(std::span<const double> r, std::vector<std::size_t> starts,
                                                     double alpha_n) {
  if (starts.empty() || starts.front() != 0) throw std::invalid_argument("segmentation must start at 0");
  PiecewiseVolatility vol{r.size(), std::move(starts), {}, alpha_n};
  for (std::size_t k = 0; k < vol.starts.size(); ++k) {
    const auto s = vol.starts[k], e = vol.segment_end(k);
    if (e <= s || e > r.size()) throw std::invalid_argument("segment starts must be strictly increasing and < n");
    double ss = 0.0;
    for (auto t = s; t < e; ++t) ss += r[t] * r[t];
    vol.levels.push_back(std::sqrt(ss / static_cast<double>(e - s)));
  }
  return vol;
}

BoundCheck bounds_satisfied(std::span<const double> r, const PiecewiseVolatility& vol, const IntervalFamily& family,
                            double alpha_n) {
  if (vol.n != r.size() || family.n != r.size())
    throw std::invalid_argument("bounds_satisfied: series, volatility and family lengths differ");
  const auto sigma = vol.expand();
  std::vector<double> prefix(r.size() + 1, 0.0);
  for (std::size_t t = 0; t < r.size(); ++t) prefix[t + 1] = prefix[t] + (r[t] * r[t]) / (sigma[t] * sigma[t]);
  const ChiSquareBand band(alpha_n);
  for (const auto& iv : family.intervals) {
    const double stat = prefix[iv.last + 1] - prefix[iv.first];
    if (stat < band.lower(iv.length()) || stat > band.upper(iv.length())) return {false, iv, stat};
  }
  return {};
}

namespace {

/// Per-interval admissible range for the squared level S^2 of a segment that
/// contains the interval: [sum/upper, sum/lower].
struct LevelRange {
  std::size_t other_end;  // start for by-end lists, end for by-start lists
  double lo;
  double hi;
};

class Segmenter {
 public:
  Segmenter(std::span<const double> r, const IntervalFamily& family, double alpha_n)
      : prefix_(square_prefix(r)), band_(alpha_n) {
    const auto n = r.size();
    std::vector<std::size_t> by_end_count(n + 1, 0), by_start_count(n + 1, 0);
    for (const auto& iv : family.intervals) {
      if (iv.last >= n || iv.first > iv.last) throw std::invalid_argument("interval family does not fit the series");
      ++by_end_count[iv.last + 1];
      ++by_start_count[iv.first + 1];
    }
    for (std::size_t i = 0; i < n; ++i) {
      by_end_count[i + 1] += by_end_count[i];
      by_start_count[i + 1] += by_start_count[i];
    }
    by_end_offset_ = by_end_count;
    by_start_offset_ = by_start_count;
    by_end_.resize(family.intervals.size());
    by_start_.resize(family.intervals.size());
    for (const auto& iv : family.intervals) {
      const double ss = prefix_[iv.last + 1] - prefix_[iv.first];
      const double lo = ss / band_.upper(iv.length());
      const double hi = ss / band_.lower(iv.length());
      by_end_[by_end_count[iv.last]++] = {iv.first, lo, hi};
      by_start_[by_start_count[iv.first]++] = {iv.last, lo, hi};
    }
  }

  [[nodiscard]] double mean_square(std::size_t s, std::size_t e) const {
    return (prefix_[e + 1] - prefix_[s]) / static_cast<double>(e - s + 1);
  }

  [[nodiscard]] bool feasible(std::size_t s, std::size_t e) const {
    double lo = 0.0, hi = std::numeric_limits<double>::infinity();
    for (auto t = s; t <= e; ++t) {
      absorb_ending_at(t, s, lo, hi);
      if (lo > hi) return false;
    }
    const double m = mean_square(s, e);
    return lo <= m && m <= hi;
  }

  /// Fewest-segment cover of [a, b] with locally feasible segments; returns
  /// the segment starts or nothing if even the finest cover fails.
  [[nodiscard]] std::optional<std::vector<std::size_t>> min_segmentation(std::size_t a, std::size_t b) const {
    const auto len = b - a + 1;
    // Which starts s admit [s, b] as a single segment, scanning s downwards.
    std::vector<char> reaches_end(len, 0);
    {
      double lo = 0.0, hi = std::numeric_limits<double>::infinity();
      for (auto s = b + 1; s-- > a;) {
        for (auto k = by_start_offset_[s]; k < by_start_offset_[s + 1]; ++k) {
          const auto& iv = by_start_[k];
          if (iv.other_end > b) continue;
          lo = std::max(lo, iv.lo);
          hi = std::min(hi, iv.hi);
        }
        if (lo > hi) break;
        const double m = mean_square(s, b);
        reaches_end[s - a] = lo <= m && m <= hi;
      }
    }

    constexpr auto unset = std::numeric_limits<std::size_t>::max();
    std::vector<std::size_t> parent(len + 1, unset);  // by prefix end position
    std::vector<std::size_t> frontier{a};
    parent[0] = a;
    for (;;) {
      for (auto s : frontier) {
        if (reaches_end[s - a]) {
          std::vector<std::size_t> starts{s};
          for (auto p = s; p != a; p = parent[p - a]) starts.push_back(parent[p - a]);
          std::reverse(starts.begin(), starts.end());
          return starts;
        }
      }
      std::vector<std::size_t> next;
      for (auto s : frontier) {
        double lo = 0.0, hi = std::numeric_limits<double>::infinity();
        for (auto e = s; e < b; ++e) {
          absorb_ending_at(e, s, lo, hi);
          if (lo > hi) break;
          const auto pos = e + 1 - a;
          if (parent[pos] != unset) continue;
          const double m = mean_square(s, e);
          if (lo <= m && m <= hi) {
            parent[pos] = s;
            next.push_back(e + 1);
          }
        }
      }
      if (next.empty()) return std::nullopt;
      std::sort(next.begin(), next.end());
      frontier = std::move(next);
    }
  }

 private:
  void absorb_ending_at(std::size_t e, std::size_t s, double& lo, double& hi) const {
    for (auto k = by_end_offset_[e]; k < by_end_offset_[e + 1]; ++k) {
      const auto& iv = by_end_[k];
      if (iv.other_end < s) continue;
      lo = std::max(lo, iv.lo);
      hi = std::min(hi, iv.hi);
    }
  }

  std::vector<double> prefix_;
  ChiSquareBand band_;
  std::vector<std::size_t> by_end_offset_, by_start_offset_;
  std::vector<LevelRange> by_end_, by_start_;
};

/// Repairs only ever add cuts; remove those the bounds no longer need.
PiecewiseVolatility drop_redundant_cuts(std::span<const double> r, const IntervalFamily& family,
                                        PiecewiseVolatility vol) {
  for (bool merged = true; merged;) {
    merged = false;
    for (std::size_t k = 1; k < vol.starts.size();) {
      auto starts = vol.starts;
      starts.erase(starts.begin() + static_cast<std::ptrdiff_t>(k));
      auto trial = PiecewiseVolatility::from_starts(r, std::move(starts), vol.alpha_n);
      if (bounds_satisfied(r, trial, family, vol.alpha_n).satisfied) {
        vol = std::move(trial);
        merged = true;
      } else {
        ++k;
      }
    }
  }
  return vol;
}

[[noreturn]] void infeasible(double alpha_n) {
  throw NumericalError("no admissible piecewise-constant volatility at alpha_n = " + format_double(alpha_n));
}

}  // namespace

PiecewiseVolatility estimate_piecewise_vol(std::span<const double> r, const MultiscaleConfig& cfg,
                                           const IntervalFamily& family) {
  if (r.size() < 2) throw std::invalid_argument("estimate_piecewise_vol: need at least two returns");
  if (family.n != r.size()) throw std::invalid_argument("estimate_piecewise_vol: family built for another length");
  const Segmenter seg(r, family, cfg.alpha_n);
  const auto n = r.size();

  auto first = seg.min_segmentation(0, n - 1);
  if (!first) infeasible(cfg.alpha_n);
  std::set<std::size_t> cuts(first->begin(), first->end());

  bool repaired = false;
  for (;;) {
    auto vol = PiecewiseVolatility::from_starts(r, {cuts.begin(), cuts.end()}, cfg.alpha_n);
    const auto check = bounds_satisfied(r, vol, family, cfg.alpha_n);
    if (check.satisfied) return repaired ? drop_redundant_cuts(r, family, std::move(vol)) : vol;
    repaired = true;

    // Cut at the violating interval's ends, then re-segment any piece that
    // lost local feasibility. Cuts only accumulate, so this terminates.
    const auto& iv = *check.first_violation;
    std::vector<std::size_t> added;
    for (auto p : {iv.first, iv.last + 1})
      if (p > 0 && p < n && cuts.insert(p).second) added.push_back(p);
    if (added.empty()) infeasible(cfg.alpha_n);

    std::set<std::size_t> touched;
    for (auto p : added) {
      touched.insert(*std::prev(cuts.find(p)));
      touched.insert(p);
    }
    for (auto s : touched) {
      const auto next = cuts.upper_bound(s);
      const auto e = (next == cuts.end() ? n : *next) - 1;
      if (seg.feasible(s, e)) continue;
      auto sub = seg.min_segmentation(s, e);
      if (!sub) infeasible(cfg.alpha_n);
      cuts.insert(sub->begin(), sub->end());
    }
  }
}

PiecewiseVolatility estimate_piecewise_vol(std::span<const double> r, const MultiscaleConfig& cfg) {
  return estimate_piecewise_vol(r, cfg, build_interval_family(r.size()));
}

double single_interval_tail(std::span<const double> r, const IntervalFamily& family) {
  if (family.n != r.size() || r.empty()) throw std::invalid_argument("single_interval_tail: length mismatch");
  const double m = stats::abs_moments(r).mean_sq;
  std::vector<double> prefix = square_prefix(r);
  // Only the extreme normalised sums of each length can bind.
  std::map<std::size_t, std::pair<double, double>> extremes;
  for (const auto& iv : family.intervals) {
    const double x = (prefix[iv.last + 1] - prefix[iv.first]) / m;
    auto [it, inserted] = extremes.try_emplace(iv.length(), x, x);
    if (!inserted) {
      it->second.first = std::min(it->second.first, x);
      it->second.second = std::max(it->second.second, x);
    }
  }
  double tail = 1.0;
  for (const auto& [len, mm] : extremes) {
    const auto k = static_cast<double>(len);
    tail = std::min({tail, 2.0 * dist::chi2_cdf(mm.first, k), 2.0 * dist::chi2_survival(mm.second, k)});
  }
  return tail;
}

Calibration calibrate_alpha_n(std::size_t n, double alpha, std::size_t nsim, std::uint64_t seed, unsigned workers) {
  if (n < 2) throw std::invalid_argument("calibrate_alpha_n: n must be at least 2");
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("calibrate_alpha_n: alpha must lie in (0, 1)");
  if (nsim < 100) throw std::invalid_argument("calibrate_alpha_n: nsim must be at least 100");
  const auto need = static_cast<std::size_t>(std::ceil(alpha * static_cast<double>(nsim) - 1e-9));
  if (need >= nsim + 1 || need == 0)
    throw std::invalid_argument("calibrate_alpha_n: nsim too small to resolve alpha");

  const auto family = build_interval_family(n);
  Calibration cal{0.0, n, alpha, nsim, std::vector<double>(nsim)};
  parallel_for(nsim, workers, [&](std::size_t rep) {
    Rng rng(derive_seed(seed, {rep}));
    std::vector<double> z(n);
    for (auto& v : z) v = rng.normal();
    cal.tails[rep] = single_interval_tail(z, family);
  });
  std::vector<double> sorted = cal.tails;
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  // Frequency at alpha_n is #{tail >= 1 - alpha_n} / nsim; it first reaches
  // alpha when 1 - alpha_n drops to the need-th largest tail.
  const double tail = sorted[need - 1];
  if (!(tail > 0.0)) throw NumericalError("calibrate_alpha_n: alpha too close to 1 for this nsim");
  // Step just inside so the binding replicate survives quantile round-off.
  cal.alpha_n = 1.0 - tail * (1.0 - 1e-9);
  return cal;
}

ResidualDiagnostics residual_diagnostics(std::span<const double> r, const PiecewiseVolatility& vol, Noise noise,
                                         double dof) {
  if (vol.n != r.size()) throw std::invalid_argument("residual_diagnostics: length mismatch");
  const auto sigma = vol.expand();
  ResidualDiagnostics out;
  out.residuals.resize(r.size());
  for (std::size_t t = 0; t < r.size(); ++t) out.residuals[t] = r[t] / sigma[t];
  out.kurtosis = stats::kurtosis(out.residuals);
  if (noise == Noise::gaussian) out.reference_kurtosis = 3.0;
  else out.reference_kurtosis = dof > 4.0 ? 3.0 * (dof - 2.0) / (dof - 4.0) : std::numeric_limits<double>::infinity();
  return out;
}

std::vector<Sojourn> sojourn_curve(const PiecewiseVolatility& vol) {
  std::vector<Sojourn> out;
  for (std::size_t k = 0; k < vol.segment_count(); ++k)
    out.push_back({vol.levels[k], vol.segment_end(k) - vol.starts[k]});
  return out;
}

void save_segments_csv(const std::filesystem::path& path, const PiecewiseVolatility& vol) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out << "start,end,level\n";
  for (std::size_t k = 0; k < vol.segment_count(); ++k)
    out << vol.starts[k] + 1 << ',' << vol.segment_end(k) << ',' << format_double(vol.levels[k]) << '\n';
}

void save_step_csv(const std::filesystem::path& path, std::span<const double> r, const PiecewiseVolatility& vol) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  const auto sigma = vol.expand();
  out << "t,abs_return,level\n";
  for (std::size_t t = 0; t < r.size(); ++t)
    out << t + 1 << ',' << format_double(std::abs(r[t])) << ',' << format_double(sigma[t]) << '\n';
}

void save_sojourn_csv(const std::filesystem::path& path, const PiecewiseVolatility& vol) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out << "level,length\n";
  for (const auto& s : sojourn_curve(vol)) out << format_double(s.level) << ',' << s.length << '\n';
}

}  // namespace lrsim::msvol
