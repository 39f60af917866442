#include "lrsim/garch.hpp"

#include <gsl/gsl_errno.h>
#include <gsl/gsl_multimin.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <memory>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "lrsim/errors.hpp"
#include "lrsim/rng.hpp"

namespace lrsim::garch {

void GarchParams::validate() const {
  if (!(a0 > 0.0) || !std::isfinite(a0)) throw ConfigError("GARCH a0 must be positive");
  if (!(a1 >= 0.0) || !(b1 >= 0.0) || !std::isfinite(a1) || !std::isfinite(b1))
    throw ConfigError("GARCH a1 and b1 must be nonnegative");
}

double log_likelihood(std::span<const double> r, double a0, double a1, double b1) {
  const double log2pi = std::log(2.0 * std::numbers::pi);
  double s2 = 0.0;
  for (double v : r) s2 += v * v;
  s2 /= static_cast<double>(r.size());
  double ll = 0.0;
  for (std::size_t t = 0; t < r.size(); ++t) {
    if (t > 0) s2 = a0 + a1 * r[t - 1] * r[t - 1] + b1 * s2;
    if (!(s2 > 0.0) || !std::isfinite(s2)) return -std::numeric_limits<double>::infinity();
    ll -= 0.5 * (log2pi + std::log(s2) + r[t] * r[t] / s2);
  }
  return ll;
}

namespace {

struct Objective {
  std::span<const double> r;
};

double negative_ll(const gsl_vector* x, void* params) {
  const auto* obj = static_cast<const Objective*>(params);
  const double ll = log_likelihood(obj->r, std::exp(gsl_vector_get(x, 0)), std::exp(gsl_vector_get(x, 1)),
                                   std::exp(gsl_vector_get(x, 2)));
  return std::isfinite(ll) ? -ll : std::numeric_limits<double>::max();
}

struct MinimizerDeleter {
  void operator()(gsl_multimin_fminimizer* m) const { gsl_multimin_fminimizer_free(m); }
};
struct VectorDeleter {
  void operator()(gsl_vector* v) const { gsl_vector_free(v); }
};

struct SimplexResult {
  std::array<double, 3> x;
  double value;
  bool converged;
  std::size_t iterations;
  double size;
};

SimplexResult run_simplex(Objective& obj, const std::array<double, 3>& start, const FitOptions& options) {
  gsl_multimin_function fn{&negative_ll, 3, &obj};
  std::unique_ptr<gsl_vector, VectorDeleter> x(gsl_vector_alloc(3));
  std::unique_ptr<gsl_vector, VectorDeleter> step(gsl_vector_alloc(3));
  for (std::size_t i = 0; i < 3; ++i) gsl_vector_set(x.get(), i, start[i]);
  gsl_vector_set_all(step.get(), 0.5);
  std::unique_ptr<gsl_multimin_fminimizer, MinimizerDeleter> m(
      gsl_multimin_fminimizer_alloc(gsl_multimin_fminimizer_nmsimplex2, 3));
  gsl_multimin_fminimizer_set(m.get(), &fn, x.get(), step.get());

  SimplexResult res{};
  int status = GSL_CONTINUE;
  std::size_t iter = 0;
  while (status == GSL_CONTINUE && iter < options.max_iterations) {
    ++iter;
    if (gsl_multimin_fminimizer_iterate(m.get()) != GSL_SUCCESS) break;
    status = gsl_multimin_test_size(gsl_multimin_fminimizer_size(m.get()), options.size_tolerance);
  }
  for (std::size_t i = 0; i < 3; ++i) res.x[i] = gsl_vector_get(m->x, i);
  res.value = m->fval;
  res.converged = status == GSL_SUCCESS;
  res.iterations = iter;
  res.size = gsl_multimin_fminimizer_size(m.get());
  return res;
}

}  // namespace

GarchParams fit_garch11(std::span<const double> r, const FitOptions& options) {
  if (r.size() < 100) throw std::invalid_argument("fit_garch11: need at least 100 returns");
  gsl_set_error_handler_off();
  double var = 0.0;
  for (double v : r) var += v * v;
  var /= static_cast<double>(r.size());
  if (!(var > 0.0)) throw std::invalid_argument("fit_garch11: all returns are zero");

  Objective obj{r};
  constexpr std::array<std::array<double, 2>, 6> starts{
      {{0.05, 0.90}, {0.10, 0.85}, {0.20, 0.70}, {0.40, 0.40}, {0.70, 0.20}, {0.90, 0.08}}};
  std::array<double, 3> best{};
  double best_ll = -std::numeric_limits<double>::infinity();
  for (const auto& [a1, b1] : starts) {
    const double a0 = var * std::max(0.01, 1.0 - a1 - b1);
    const double ll = log_likelihood(r, a0, a1, b1);
    if (ll > best_ll) {
      best_ll = ll;
      best = {std::log(a0), std::log(a1), std::log(b1)};
    }
  }

  SimplexResult res = run_simplex(obj, best, options);
  for (std::size_t k = 0; k < options.restarts && res.converged; ++k) {
    const SimplexResult again = run_simplex(obj, res.x, options);
    const bool settled = std::abs(again.value - res.value) <= 1e-9 * std::max(1.0, std::abs(res.value));
    res = again;
    if (settled) break;
  }
  if (!res.converged) {
    std::ostringstream msg;
    msg << "GARCH fit did not converge after " << res.iterations << " iterations (simplex size " << res.size
        << ", a0=" << std::exp(res.x[0]) << " a1=" << std::exp(res.x[1]) << " b1=" << std::exp(res.x[2]) << ")";
    throw NumericalError(msg.str());
  }

  GarchParams p;
  p.a0 = std::exp(res.x[0]);
  p.a1 = std::exp(res.x[1]);
  p.b1 = std::exp(res.x[2]);
  p.loglik = log_likelihood(r, p.a0, p.a1, p.b1);
  p.stationary = p.a1 + p.b1 < 1.0;
  return p;
}

std::optional<double> unconditional_variance(const GarchParams& p) {
  if (p.a1 + p.b1 >= 1.0) return std::nullopt;
  return p.a0 / (1.0 - p.a1 - p.b1);
}

GarchPath simulate_garch11(const GarchParams& p, std::size_t n, std::uint64_t seed, const SimOptions& options) {
  p.validate();
  Rng rng(derive_seed(seed, {1}));
  GarchPath path;
  path.returns.reserve(n);
  path.variances.reserve(n);
  double s2 = unconditional_variance(p).value_or(p.a0);
  const std::size_t total = options.burn_in + n;
  for (std::size_t t = 0; t < total; ++t) {
    if (!std::isfinite(s2)) {
      path.overflowed = true;
      break;
    }
    const double e = std::sqrt(s2) * rng.normal();
    if (t >= options.burn_in) {
      path.returns.push_back(e);
      path.variances.push_back(s2);
    }
    s2 = p.a0 + p.a1 * e * e + p.b1 * s2;
  }
  if (options.signs) {
    const auto& s = *options.signs;
    std::vector<double> mags(path.returns.size());
    for (std::size_t t = 0; t < mags.size(); ++t) mags[t] = std::abs(path.returns[t]);
    const auto signed_r = assign_signs(mags, s.model, s.gamma, derive_seed(seed, {2}));
    path.returns = inject_sign_acf(signed_r, s.eacf1, derive_seed(seed, {3}));
  }
  return path;
}

GarchModel::GarchModel(GarchParams params, SimOptions options) : params_(params), options_(std::move(options)) {
  params_.validate();
  if (options_.signs) {
    options_.signs->model.validate();
    if (!(options_.signs->gamma >= 0.0 && options_.signs->gamma <= 1.0)) throw ConfigError("gamma must lie in [0, 1]");
    if (!(std::abs(options_.signs->eacf1) < 1.0)) throw ConfigError("eacf1 must lie in (-1, 1)");
  }
}

std::vector<double> GarchModel::simulate(std::size_t n, std::uint64_t seed) const {
  auto path = simulate_garch11(params_, n, seed, options_);
  if (path.overflowed)
    throw NumericalError("GARCH path overflowed after " + std::to_string(path.returns.size()) + " values");
  return std::move(path.returns);
}

}  // namespace lrsim::garch
