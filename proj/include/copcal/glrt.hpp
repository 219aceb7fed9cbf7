#pragma once

#include <optional>
#include <vector>

#include "copcal/fit.hpp"

namespace copcal {

// Upper tail of the chi-square distribution with (possibly fractional)
// degrees of freedom: Q(dof/2, x/2). x >= 0, dof > 0.
double chisq_upper_tail(double x, double dof);

// p-value of the scaled statistic r_k * lambda against chi-square(dof);
// a nonpositive lambda yields 1.
double glrt_p_value(double lambda, double dof, double r_k);

// sum_i ell(eta_tilde(X_i), u1_i, u2_i) at the fitted polynomial.
double loglik_under_null(const Dataset& data, const CalibrationModel& model);

// sum_i ell(eta_hat_h(X_i), u1_i, u2_i) with the order-p local fit evaluated
// at the observed design points. Propagates InsufficientLocalData.
double loglik_under_alt(const Dataset& data, const CopulaSpec& spec,
                        const KernelSpec& kernel, double h, int degree);

struct GlrtResult {
  double lambda = 0;  // loglik_alt - loglik_null
  double h = 0;
  int null_degree = 0;
  double loglik_null = 0;
  double loglik_alt = 0;
  double r_k = 0;
  double c_k = 0;
  double covariate_range = 0;
  double dof = 0;               // r_k * c_k * covariate_range / h
  double scaled_statistic = 0;  // r_k * lambda
  double p_value = 1;
  CalibrationModel null_model;
  bool negative_lambda = false;
  bool low_dof_warning = false;  // dof < 1
  bool null_converged = false;
  bool alt_converged = false;
  std::optional<BandwidthSelection> bandwidth_selection;  // set when h was CV-chosen
};

struct GlrtOptions {
  std::optional<double> h;             // fixed bandwidth; absent -> LOO-CV
  std::vector<double> bandwidth_grid;  // empty -> default_bandwidth_grid(range)
  int threads = 1;
};

// Fits the polynomial null and the order-p local alternative (same degree as
// the null) and assembles the test. When no bandwidth is given, the LOO-CV
// choice is used for both estimation and testing.
GlrtResult run_test(const Dataset& data, const CopulaSpec& spec, int null_degree,
                    const KernelSpec& kernel, const GlrtOptions& options = {});

}  // namespace copcal
