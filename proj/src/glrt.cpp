#include "copcal/glrt.hpp"

#include <cmath>
#include <stdexcept>

#include "copcal/errors.hpp"
#include "copcal/special_functions.hpp"

namespace copcal {

double chisq_upper_tail(double x, double dof) {
  if (!(dof > 0)) throw std::domain_error("chi-square dof must be positive");
  if (!(x >= 0)) throw std::domain_error("chi-square statistic must be nonnegative");
  if (x == 0) return 1.0;
  const double a = 0.5 * dof;
  if (x < dof + 1.0) return 1.0 - gamma_p_series(a, 0.5 * x);
  return gamma_q_continued_fraction(a, 0.5 * x);
}

double glrt_p_value(double lambda, double dof, double r_k) {
  if (!(lambda > 0)) return 1.0;
  return chisq_upper_tail(r_k * lambda, dof);
}

double loglik_under_null(const Dataset& data, const CalibrationModel& model) {
  double total = 0;
  for (std::size_t i = 0; i < data.size(); ++i)
    total += detail::ell_value_raw(model.spec, model.eta(data.x[i]),
                                   {data.u1[i], data.u2[i]});
  return total;
}

double loglik_under_alt(const Dataset& data, const CopulaSpec& spec,
                        const KernelSpec& kernel, double h, int degree) {
  const std::vector<LocalFit> curve = estimate_curve(data, spec, kernel, data.x, h, degree);
  double total = 0;
  for (std::size_t i = 0; i < data.size(); ++i)
    total += detail::ell_value_raw(spec, curve[i].eta_hat, {data.u1[i], data.u2[i]});
  return total;
}

GlrtResult run_test(const Dataset& data, const CopulaSpec& spec, int null_degree,
                    const KernelSpec& kernel, const GlrtOptions& options) {
  validate_dataset(data);
  const double range = covariate_range(data);
  const KernelConstants constants = constants_for(kernel, null_degree);

  GlrtResult result;
  result.null_degree = null_degree;
  result.r_k = constants.r_k;
  result.c_k = constants.c_k;
  result.covariate_range = range;

  if (options.h) {
    result.h = *options.h;
    if (!(result.h > 0)) throw std::domain_error("bandwidth must be positive");
  } else {
    const std::vector<double> grid = options.bandwidth_grid.empty()
                                         ? default_bandwidth_grid(range)
                                         : options.bandwidth_grid;
    result.bandwidth_selection =
        loo_cv_bandwidth(data, spec, kernel, grid, null_degree, options.threads);
    result.h = result.bandwidth_selection->chosen;
  }

  FitReport null_report;
  result.null_model = fit_parametric(data, spec, null_degree, &null_report);
  result.null_converged = null_report.converged;
  result.loglik_null = loglik_under_null(data, result.null_model);

  const std::vector<LocalFit> curve =
      estimate_curve(data, spec, kernel, data.x, result.h, null_degree);
  result.alt_converged = true;
  double alt = 0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    alt += detail::ell_value_raw(spec, curve[i].eta_hat, {data.u1[i], data.u2[i]});
    result.alt_converged = result.alt_converged && curve[i].converged;
  }
  result.loglik_alt = alt;

  result.lambda = result.loglik_alt - result.loglik_null;
  result.dof = null_dof(constants, range, result.h);
  result.scaled_statistic = constants.r_k * result.lambda;
  result.negative_lambda = !(result.lambda > 0);
  result.low_dof_warning = result.dof < 1.0;
  result.p_value = glrt_p_value(result.lambda, result.dof, constants.r_k);
  return result;
}

}  // namespace copcal
