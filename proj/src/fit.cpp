#include "copcal/fit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "copcal/detail/parallel.hpp"
#include "copcal/errors.hpp"

namespace copcal {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr int kMaxIterations = 50;
constexpr int kMaxHalvings = 30;
constexpr double kUpdateTol = 1e-10;     // internal; stricter than the 1e-8 contract
constexpr double kGradConverged = 1e-8;  // gradient max-norm a converged fit must meet
constexpr double kThetaWindow = 1e-6;    // Frank proposals are kept out of (-1e-6, 1e-6)

// Coefficients of p(alpha*y + beta) given the coefficients of p(x).
std::vector<double> compose_affine(const std::vector<double>& coeffs, double alpha,
                                   double beta) {
  std::vector<double> result{0.0};
  for (std::size_t j = coeffs.size(); j-- > 0;) {
    // result <- result * (alpha*y + beta) + coeffs[j]
    std::vector<double> next(result.size() + 1, 0.0);
    for (std::size_t k = 0; k < result.size(); ++k) {
      next[k] += result[k] * beta;
      next[k + 1] += result[k] * alpha;
    }
    next[0] += coeffs[j];
    next.pop_back();  // degree never actually grows past coeffs.size()-1
    if (next.size() < coeffs.size()) next.resize(coeffs.size(), 0.0);
    result = std::move(next);
  }
  result.resize(coeffs.size(), 0.0);
  return result;
}

// p(x) = sum a_j x^j rewritten in powers of (x - c)/s.
std::vector<double> scaled_from_raw(const std::vector<double>& raw, double c, double s) {
  return compose_affine(raw, s, c);
}

// Inverse of the above.
std::vector<double> raw_from_scaled(const std::vector<double>& scaled, double c, double s) {
  return compose_affine(scaled, 1.0 / s, -c / s);
}

struct FitPoint {
  double d;   // scaled coordinate entering the polynomial basis
  double w;   // observation weight
  double u1;
  double u2;
};

double eval_value(const CopulaSpec& spec, const std::vector<FitPoint>& pts,
                  const std::vector<double>& beta) {
  const int m = static_cast<int>(beta.size());
  double total = 0;
  for (const auto& p : pts) {
    double t = beta[m - 1];
    for (int j = m - 2; j >= 0; --j) t = t * p.d + beta[j];
    const double v = detail::ell_value_raw(spec, t, {p.u1, p.u2});
    if (!std::isfinite(v)) return -kInf;
    total += p.w * v;
  }
  return total;
}

double eval_derivs(const CopulaSpec& spec, const std::vector<FitPoint>& pts,
                   const std::vector<double>& beta, double grad[4], double hess[16]) {
  const int m = static_cast<int>(beta.size());
  double total = 0;
  std::fill(grad, grad + m, 0.0);
  std::fill(hess, hess + m * m, 0.0);
  double z[4];
  for (const auto& p : pts) {
    double t = beta[m - 1];
    for (int j = m - 2; j >= 0; --j) t = t * p.d + beta[j];
    const CalibrationDerivs d = detail::ell_derivs_raw(spec, t, {p.u1, p.u2});
    if (!std::isfinite(d.value)) return -kInf;
    total += p.w * d.value;
    z[0] = 1.0;
    for (int j = 1; j < m; ++j) z[j] = z[j - 1] * p.d;
    const double wl1 = p.w * d.first;
    const double wl2 = p.w * d.second;
    for (int j = 0; j < m; ++j) {
      grad[j] += wl1 * z[j];
      for (int k = 0; k <= j; ++k) hess[j * m + k] += wl2 * z[j] * z[k];
    }
  }
  for (int j = 0; j < m; ++j)
    for (int k = j + 1; k < m; ++k) hess[j * m + k] = hess[k * m + j];
  return total;
}

// Solves A x = b for SPD A (m <= 4) in place; false when A is not positive
// definite to working precision.
bool cholesky_solve(double a[16], double b[4], int m) {
  for (int j = 0; j < m; ++j) {
    double diag = a[j * m + j];
    for (int k = 0; k < j; ++k) diag -= a[j * m + k] * a[j * m + k];
    if (!(diag > 0)) return false;
    const double root = std::sqrt(diag);
    a[j * m + j] = root;
    for (int i = j + 1; i < m; ++i) {
      double v = a[i * m + j];
      for (int k = 0; k < j; ++k) v -= a[i * m + k] * a[j * m + k];
      a[i * m + j] = v / root;
    }
  }
  for (int i = 0; i < m; ++i) {
    double v = b[i];
    for (int k = 0; k < i; ++k) v -= a[i * m + k] * b[k];
    b[i] = v / a[i * m + i];
  }
  for (int i = m; i-- > 0;) {
    double v = b[i];
    for (int k = i + 1; k < m; ++k) v -= a[k * m + i] * b[k];
    b[i] = v / a[i * m + i];
  }
  return true;
}

struct NewtonOutcome {
  std::vector<double> beta;
  bool converged = false;
  int iterations = 0;
  double objective = -kInf;
  double grad[4] = {0, 0, 0, 0};
};

// Keeps degree-0 Frank proposals out of the removable-singularity window.
void project_proposal(std::vector<double>& beta, const CopulaSpec& spec, bool constant_fit) {
  if (!constant_fit || spec.link != Link::identity) return;
  if (std::abs(beta[0]) < kThetaWindow)
    beta[0] = beta[0] >= 0 ? kThetaWindow : -kThetaWindow;
}

// Damped Newton ascent with step halving; when the negated Hessian is not
// positive definite the step falls back to the gradient direction.
// `report_scale[j]` converts a coefficient update from the internal basis to
// reported units for the convergence check.
NewtonOutcome newton_maximize(const CopulaSpec& spec, const std::vector<FitPoint>& pts,
                              std::vector<double> beta, const double report_scale[4],
                              bool constant_fit) {
  const int m = static_cast<int>(beta.size());
  NewtonOutcome out;
  project_proposal(beta, spec, constant_fit);
  double hess[16];
  double value = eval_derivs(spec, pts, beta, out.grad, hess);
  if (!std::isfinite(value)) {
    std::fill(beta.begin(), beta.end(), 0.0);
    beta[0] = spec.link == Link::identity ? 1.0 : 0.0;
    project_proposal(beta, spec, constant_fit);
    value = eval_derivs(spec, pts, beta, out.grad, hess);
    if (!std::isfinite(value)) {
      out.beta = std::move(beta);
      out.objective = value;
      return out;
    }
  }

  for (int iter = 0; iter < kMaxIterations; ++iter) {
    out.iterations = iter + 1;
    double grad_max = 0;
    for (int j = 0; j < m; ++j) grad_max = std::max(grad_max, std::abs(out.grad[j]));
    if (grad_max < 1e-12 * (1.0 + std::abs(value))) {
      out.converged = true;
      break;
    }

    double dir[4];
    double neg_h[16];
    for (int j = 0; j < m * m; ++j) neg_h[j] = -hess[j];
    std::copy(out.grad, out.grad + m, dir);
    double slope = 0;
    if (cholesky_solve(neg_h, dir, m)) {
      for (int j = 0; j < m; ++j) slope += out.grad[j] * dir[j];
    }
    if (!(slope > 0)) {  // not an ascent direction: plain gradient step
      std::copy(out.grad, out.grad + m, dir);
      slope = 0;
      for (int j = 0; j < m; ++j) slope += dir[j] * dir[j];
    }

    double step = 1.0;
    std::vector<double> candidate(m);
    bool accepted = false;
    double update_reported = 0;
    for (int halving = 0; halving <= kMaxHalvings; ++halving) {
      for (int j = 0; j < m; ++j) candidate[j] = beta[j] + step * dir[j];
      project_proposal(candidate, spec, constant_fit);
      const double cv = eval_value(spec, pts, candidate);
      if (cv >= value + 1e-4 * step * slope - 1e-12 * (1.0 + std::abs(value))) {
        update_reported = 0;
        for (int j = 0; j < m; ++j)
          update_reported = std::max(update_reported,
                                     std::abs(candidate[j] - beta[j]) * report_scale[j]);
        beta = candidate;
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      out.converged = grad_max <= kGradConverged;
      break;
    }
    value = eval_derivs(spec, pts, beta, out.grad, hess);
    if (update_reported < kUpdateTol) {
      out.converged = true;
      break;
    }
  }

  out.beta = std::move(beta);
  out.objective = value;
  return out;
}

std::vector<FitPoint> parametric_points(const Dataset& data, double c, double s) {
  std::vector<FitPoint> pts(data.size());
  for (std::size_t i = 0; i < data.size(); ++i)
    pts[i] = {(data.x[i] - c) / s, 1.0, data.u1[i], data.u2[i]};
  return pts;
}

// Coarse 1-D probe over plausible calibration levels; a decent start keeps
// the Newton iteration count down on strongly dependent data.
double probe_constant(const CopulaSpec& spec, const std::vector<FitPoint>& pts) {
  static const double identity_grid[] = {-16, -10, -6, -3, -1.5, -0.5, 0.5,
                                         1,   2,   4,  6,  9,    12,   16, 20};
  static const double log_grid[] = {-3, -2, -1, -0.3, 0, 0.5, 1, 1.5, 2, 2.5, 3};
  const auto grid = spec.link == Link::identity ? std::span<const double>(identity_grid)
                                                : std::span<const double>(log_grid);
  double best_t = grid[0];
  double best_v = -kInf;
  std::vector<double> beta(1);
  for (double t : grid) {
    beta[0] = t;
    const double v = eval_value(spec, pts, beta);
    if (v > best_v) {
      best_v = v;
      best_t = t;
    }
  }
  return best_t;
}

struct ParametricFit {
  CalibrationModel model;
  FitReport report;
};

ParametricFit fit_parametric_impl(const Dataset& data, const CopulaSpec& spec, int degree) {
  const auto [lo, hi] = std::minmax_element(data.x.begin(), data.x.end());
  const double c = 0.5 * (*lo + *hi);
  const double s = 0.5 * (*hi - *lo);
  const auto pts = parametric_points(data, c, s);
  // the centered basis keeps raw and internal coefficient scales within a
  // small constant factor, so unit report scales suffice for the stopping rule
  const double report_scale[4] = {1, 1, 1, 1};

  std::vector<double> raw{0.0};
  NewtonOutcome outcome;
  for (int deg = 0; deg <= degree; ++deg) {
    std::vector<double> init;
    if (deg == 0) {
      init = {probe_constant(spec, pts)};
    } else {
      raw.resize(deg + 1, 0.0);
      init = scaled_from_raw(raw, c, s);
    }
    outcome = newton_maximize(spec, pts, std::move(init), report_scale, deg == 0);
    raw = raw_from_scaled(outcome.beta, c, s);
    if (deg == 0 && spec.link == Link::identity && std::abs(raw[0]) < kThetaWindow)
      raw[0] = raw[0] >= 0 ? kThetaWindow : -kThetaWindow;
  }

  ParametricFit fit;
  fit.model.degree = degree;
  fit.model.coefficients = raw;
  fit.model.spec = spec;
  fit.report.converged = outcome.converged;
  fit.report.iterations = outcome.iterations;
  fit.report.objective = outcome.objective;
  // gradient in raw-coefficient units
  double grad_max = 0;
  {
    double g[4] = {0, 0, 0, 0};
    for (std::size_t i = 0; i < data.size(); ++i) {
      const double t = fit.model.eta(data.x[i]);
      const CalibrationDerivs d =
          detail::ell_derivs_raw(spec, t, {data.u1[i], data.u2[i]});
      double xp = 1.0;
      for (int j = 0; j <= degree; ++j) {
        g[j] += d.first * xp;
        xp *= data.x[i];
      }
    }
    for (int j = 0; j <= degree; ++j) grad_max = std::max(grad_max, std::abs(g[j]));
  }
  fit.report.grad_max = grad_max;
  return fit;
}

// Local basis scaling: beta_j (in (x - x0)^j powers) corresponds to the
// internal coefficient b_j = beta_j h^j on the basis ((x - x0)/h)^j.
std::vector<double> local_scaled_from_beta(const std::vector<double>& beta, double h) {
  std::vector<double> scaled(beta.size());
  double hj = 1.0;
  for (std::size_t j = 0; j < beta.size(); ++j) {
    scaled[j] = beta[j] * hj;
    hj *= h;
  }
  return scaled;
}

LocalFit local_fit_impl(const Dataset& data, const CopulaSpec& spec,
                        const KernelSpec& kernel, double x0, double h, int degree,
                        const std::vector<double>& init_beta, int skip_index) {
  LocalFit fit;
  fit.x0 = x0;
  fit.h = h;
  fit.degree = degree;

  std::vector<FitPoint> pts;
  pts.reserve(data.size());
  const double inv_h = 1.0 / h;
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (static_cast<int>(i) == skip_index) continue;
    const double d = (data.x[i] - x0) * inv_h;
    const double w = kernel_eval(kernel, d) * inv_h;
    if (w > 0) pts.push_back({d, w, data.u1[i], data.u2[i]});
  }
  fit.n_effective = static_cast<int>(pts.size());
  const int needed = std::max(degree + 1, 4);
  if (fit.n_effective < needed)
    throw InsufficientLocalData(x0, h, fit.n_effective, needed);

  double report_scale[4];
  double hj = 1.0;
  for (int j = 0; j < 4; ++j) {
    report_scale[j] = 1.0 / hj;  // internal update * h^{-j} = reported update
    hj *= h;
  }

  NewtonOutcome outcome = newton_maximize(spec, pts, local_scaled_from_beta(init_beta, h),
                                          report_scale, degree == 0);

  fit.beta.resize(degree + 1);
  hj = 1.0;
  for (int j = 0; j <= degree; ++j) {
    fit.beta[j] = outcome.beta[j] / hj;
    hj *= h;
  }
  fit.eta_hat = fit.beta[0];
  double grad_max = 0;
  hj = 1.0;
  for (int j = 0; j <= degree; ++j) {
    grad_max = std::max(grad_max, std::abs(outcome.grad[j]) * hj);
    hj *= h;
  }
  fit.grad_max = grad_max;
  fit.converged = outcome.converged && grad_max <= kGradConverged;
  return fit;
}

// Global polynomial re-expanded around x0, truncated to the local degree.
std::vector<double> model_as_local_init(const CalibrationModel& model, double x0,
                                        int degree) {
  std::vector<double> shifted = compose_affine(model.coefficients, 1.0, x0);
  shifted.resize(degree + 1, 0.0);
  return shifted;
}

std::vector<double> shift_local_beta(const std::vector<double>& beta, double from_x0,
                                     double to_x0) {
  return compose_affine(beta, 1.0, to_x0 - from_x0);
}

}  // namespace

void validate_dataset(const Dataset& data) {
  const std::size_t n = data.size();
  if (data.u1.size() != n || data.u2.size() != n)
    throw std::invalid_argument("dataset columns have mismatched lengths");
  if (n < 10) throw std::invalid_argument("dataset needs at least 10 observations");
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(data.x[i]))
      throw std::invalid_argument("x is not finite at index " + std::to_string(i));
    if (!(data.u1[i] > 0) || !(data.u1[i] < 1) || !(data.u2[i] > 0) || !(data.u2[i] < 1))
      throw std::invalid_argument("u values must lie strictly inside (0,1) at index " +
                                  std::to_string(i));
  }
  const auto [lo, hi] = std::minmax_element(data.x.begin(), data.x.end());
  if (!(*hi > *lo)) throw std::invalid_argument("covariate values are all identical");
}

double covariate_range(const Dataset& data) {
  const auto [lo, hi] = std::minmax_element(data.x.begin(), data.x.end());
  return *hi - *lo;
}

std::pair<std::vector<double>, std::vector<double>> pseudo_observations(
    const std::vector<double>& y1, const std::vector<double>& y2) {
  if (y1.size() != y2.size())
    throw std::invalid_argument("pseudo_observations requires equal lengths");
  auto transform = [](const std::vector<double>& y) {
    const std::size_t n = y.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return y[a] < y[b]; });
    std::vector<double> u(n);
    std::size_t i = 0;
    while (i < n) {
      std::size_t j = i;
      while (j + 1 < n && y[order[j + 1]] == y[order[i]]) ++j;
      const double avg_rank = 0.5 * static_cast<double>(i + j) + 1.0;
      for (std::size_t k = i; k <= j; ++k) u[order[k]] = avg_rank / (n + 1);
      i = j + 1;
    }
    return u;
  };
  return {transform(y1), transform(y2)};
}

double CalibrationModel::eta(double x) const {
  double v = 0;
  for (std::size_t j = coefficients.size(); j-- > 0;) v = v * x + coefficients[j];
  return v;
}

CalibrationModel fit_parametric(const Dataset& data, const CopulaSpec& spec, int degree,
                                FitReport* report) {
  if (degree < 0 || degree > 3)
    throw std::invalid_argument("parametric degree must be in 0..3");
  validate_dataset(data);
  ParametricFit fit = fit_parametric_impl(data, spec, degree);
  if (report) *report = fit.report;
  return fit.model;
}

LocalFit local_polynomial_fit(const Dataset& data, const CopulaSpec& spec,
                              const KernelSpec& kernel, double x0, double h, int degree,
                              const std::vector<double>* init, int skip_index) {
  if (degree < 0 || degree > 3)
    throw std::invalid_argument("local polynomial degree must be in 0..3");
  if (!(h > 0)) throw std::domain_error("bandwidth must be positive");
  validate_dataset(data);
  std::vector<double> start;
  if (init) {
    start = *init;
    start.resize(degree + 1, 0.0);
  } else {
    start = model_as_local_init(fit_parametric_impl(data, spec, degree).model, x0, degree);
  }
  return local_fit_impl(data, spec, kernel, x0, h, degree, start, skip_index);
}

std::vector<LocalFit> estimate_curve(const Dataset& data, const CopulaSpec& spec,
                                     const KernelSpec& kernel,
                                     std::span<const double> grid, double h, int degree) {
  if (!(h > 0)) throw std::domain_error("bandwidth must be positive");
  validate_dataset(data);
  const CalibrationModel global = fit_parametric_impl(data, spec, degree).model;

  std::vector<std::size_t> order(grid.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return grid[a] < grid[b]; });

  std::vector<LocalFit> fits(grid.size());
  std::vector<double> init;
  bool have_neighbor = false;
  double prev_x0 = 0;
  for (std::size_t k : order) {
    const double x0 = grid[k];
    std::vector<double> start = have_neighbor ? shift_local_beta(init, prev_x0, x0)
                                              : model_as_local_init(global, x0, degree);
    fits[k] = local_fit_impl(data, spec, kernel, x0, h, degree, start, -1);
    init = fits[k].beta;
    prev_x0 = x0;
    have_neighbor = true;
  }
  return fits;
}

BandwidthSelection loo_cv_bandwidth(const Dataset& data, const CopulaSpec& spec,
                                    const KernelSpec& kernel,
                                    std::span<const double> grid, int degree,
                                    int threads) {
  if (grid.empty()) throw std::invalid_argument("bandwidth grid is empty");
  validate_dataset(data);
  const CalibrationModel global = fit_parametric_impl(data, spec, degree).model;

  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return data.x[a] < data.x[b]; });

  BandwidthSelection sel;
  sel.grid.assign(grid.begin(), grid.end());
  sel.cv_scores.assign(grid.size(), -kInf);
  sel.loo_failures.assign(grid.size(), 0);

  detail::parallel_for(static_cast<int>(grid.size()), threads, [&](int gi) {
    const double h = grid[gi];
    double score = 0;
    std::vector<double> init;
    bool have_neighbor = false;
    double prev_x0 = 0;
    for (std::size_t idx : order) {
      const double x0 = data.x[idx];
      std::vector<double> start = have_neighbor
                                      ? shift_local_beta(init, prev_x0, x0)
                                      : model_as_local_init(global, x0, degree);
      try {
        LocalFit fit = local_fit_impl(data, spec, kernel, x0, h, degree, start,
                                      static_cast<int>(idx));
        score += detail::ell_value_raw(spec, fit.eta_hat, {data.u1[idx], data.u2[idx]});
        init = fit.beta;
        prev_x0 = x0;
        have_neighbor = true;
      } catch (const InsufficientLocalData&) {
        sel.loo_failures[gi] += 1;
        score = -kInf;
        break;
      }
    }
    sel.cv_scores[gi] = score;
  });

  std::size_t best = 0;
  bool any = false;
  for (std::size_t i = 0; i < sel.cv_scores.size(); ++i) {
    if (!std::isfinite(sel.cv_scores[i])) continue;
    if (!any || sel.cv_scores[i] > sel.cv_scores[best]) {
      best = i;
      any = true;
    }
  }
  if (!any) throw NumericalError("every candidate bandwidth failed leave-one-out refitting");
  sel.chosen_index = best;
  sel.chosen = sel.grid[best];
  return sel;
}

std::vector<double> default_bandwidth_grid(double range) {
  if (!(range > 0)) throw std::domain_error("covariate range must be positive");
  std::vector<double> grid(12);
  for (int i = 0; i < 12; ++i)
    grid[i] = 0.11 * range * std::pow(9.0, i / 11.0);
  grid.back() = 0.99 * range;
  return grid;
}

}  // namespace copcal
