#include "lrsim/distributions.hpp"

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>

namespace lrsim::dist {

namespace bm = boost::math;

double normal_quantile(double p) { return bm::quantile(bm::normal_distribution<double>(), p); }

double student_t_quantile(double p, double dof) { return bm::quantile(bm::students_t_distribution<double>(dof), p); }

double chi2_quantile(double p, double dof) { return bm::quantile(bm::chi_squared_distribution<double>(dof), p); }

double chi2_upper_quantile(double q, double dof) {
  return bm::quantile(bm::complement(bm::chi_squared_distribution<double>(dof), q));
}

double chi2_cdf(double x, double dof) { return bm::cdf(bm::chi_squared_distribution<double>(dof), x); }

double chi2_survival(double x, double dof) {
  return bm::cdf(bm::complement(bm::chi_squared_distribution<double>(dof), x));
}

}  // namespace lrsim::dist
