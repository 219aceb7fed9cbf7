#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "copcal/copula.hpp"
#include "copcal/kernel.hpp"

namespace copcal {

// Aligned triples (x_i, u1_i, u2_i); the u's live strictly inside (0,1).
struct Dataset {
  std::vector<double> x;
  std::vector<double> u1;
  std::vector<double> u2;

  std::size_t size() const { return x.size(); }
};

// Throws std::invalid_argument on length mismatch, n < 10, u's outside (0,1),
// or a degenerate (constant) covariate.
void validate_dataset(const Dataset& data);

// max(x) - min(x) of the observed sample.
double covariate_range(const Dataset& data);

// Rank transform to (0,1): u_i = rank(y_i)/(n+1), ties by average rank.
std::pair<std::vector<double>, std::vector<double>> pseudo_observations(
    const std::vector<double>& y1, const std::vector<double>& y2);

// Polynomial calibration model eta(x) = sum_j a_j x^j on the link scale.
struct CalibrationModel {
  int degree = 0;
  std::vector<double> coefficients;  // a_0 ... a_degree
  CopulaSpec spec;

  double eta(double x) const;
};

struct FitReport {
  bool converged = false;
  int iterations = 0;
  double grad_max = 0;    // max-norm of the log-likelihood gradient at the fit
  double objective = 0;   // maximized log-likelihood
};

// Maximum likelihood fit of the degree-p polynomial calibration function.
// Damped Newton with analytic first/second derivatives; a non-converged fit
// is still returned, flagged through `report`.
CalibrationModel fit_parametric(const Dataset& data, const CopulaSpec& spec,
                                int degree, FitReport* report = nullptr);

// One kernel-weighted local polynomial likelihood fit around x0.
struct LocalFit {
  double x0 = 0;
  double h = 0;
  int degree = 0;
  std::vector<double> beta;  // beta_j multiplies (x - x0)^j
  double eta_hat = 0;        // beta[0]
  bool converged = false;
  int n_effective = 0;  // points with positive kernel weight
  double grad_max = 0;
};

// Maximizes sum_i ell(beta' z_i) K_h(X_i - x0) with K_h(.) = K(./h)/h and
// z_i the local polynomial basis. Warm-started from `init` (coefficients in
// the same (x - x0)-power basis) when supplied, else from the global
// parametric fit of the same degree. `skip_index` >= 0 removes one
// observation (leave-one-out refits). Throws InsufficientLocalData when
// fewer than max(degree+1, 4) observations carry positive weight.
LocalFit local_polynomial_fit(const Dataset& data, const CopulaSpec& spec,
                              const KernelSpec& kernel, double x0, double h,
                              int degree,
                              const std::vector<double>* init = nullptr,
                              int skip_index = -1);

// Local fits over a query grid, each warm-started from its neighbor along the
// sorted grid. Results are returned in the original grid order.
std::vector<LocalFit> estimate_curve(const Dataset& data, const CopulaSpec& spec,
                                     const KernelSpec& kernel,
                                     std::span<const double> grid, double h,
                                     int degree);

struct BandwidthSelection {
  std::vector<double> grid;
  std::vector<double> cv_scores;  // -inf marks a bandwidth whose LOO fit failed
  std::vector<int> loo_failures;  // per-bandwidth count of failed refits
  double chosen = 0;
  std::size_t chosen_index = 0;
};

// Leave-one-out cross-validated likelihood over a bandwidth grid:
// score(h) = sum_i ell(eta_h^{(-i)}(X_i), u1_i, u2_i) with exact refitting.
// Ties break to the first (smallest-h) maximizer. Throws NumericalError when
// every bandwidth fails.
BandwidthSelection loo_cv_bandwidth(const Dataset& data, const CopulaSpec& spec,
                                    const KernelSpec& kernel,
                                    std::span<const double> grid, int degree,
                                    int threads = 1);

// 12 log-spaced candidates on [0.11, 0.99] * range.
std::vector<double> default_bandwidth_grid(double range);

}  // namespace copcal
