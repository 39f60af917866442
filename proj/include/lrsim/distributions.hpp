#pragma once

namespace lrsim::dist {

[[nodiscard]] double normal_quantile(double p);
[[nodiscard]] double student_t_quantile(double p, double dof);

/// Lower-tail chi-squared quantile: x with P(X <= x) = p.
[[nodiscard]] double chi2_quantile(double p, double dof);
/// Upper-tail chi-squared quantile: x with P(X > x) = q. Keeps precision for
/// q near zero where 1 - q would round.
[[nodiscard]] double chi2_upper_quantile(double q, double dof);
[[nodiscard]] double chi2_cdf(double x, double dof);
[[nodiscard]] double chi2_survival(double x, double dof);

}  // namespace lrsim::dist
