#include "copcal/kernel.hpp"

#include <array>
#include <cmath>
#include <stdexcept>

namespace copcal {

namespace {

// Gauss-Kronrod 7-15 pair on [-1,1].
constexpr std::array<double, 8> kKronrodNodes = {
    0.991455371120813, 0.949107912342759, 0.864864423359769,
    0.741531185599394, 0.586087235467691, 0.405845151377397,
    0.207784955007898, 0.0};
constexpr std::array<double, 8> kKronrodWeights = {
    0.022935322010529, 0.063092092629979, 0.104790010322250,
    0.140653259715525, 0.169004726639267, 0.190350578064785,
    0.204432940075298, 0.209482141084728};
constexpr std::array<double, 4> kGaussWeights = {
    0.129484966168870, 0.279705391489277, 0.381830050505119,
    0.417959183673469};

template <typename Fn>
void gk15(const Fn& f, double a, double b, double& kronrod, double& gauss) {
  const double c = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  kronrod = 0;
  gauss = 0;
  for (int i = 0; i < 8; ++i) {
    const double dx = half * kKronrodNodes[i];
    const double fv = i == 7 ? f(c) : f(c - dx) + f(c + dx);
    kronrod += kKronrodWeights[i] * fv;
    // odd indices are the embedded Gauss-7 nodes (the center included)
    if (i % 2 == 1) gauss += kGaussWeights[i / 2] * fv;
  }
  kronrod *= half;
  gauss *= half;
}

template <typename Fn>
double adaptive(const Fn& f, double a, double b, double tol, int depth) {
  double k, g;
  gk15(f, a, b, k, g);
  if (std::abs(k - g) <= tol || depth >= 40) return k;
  const double c = 0.5 * (a + b);
  return adaptive(f, a, c, 0.5 * tol, depth + 1) +
         adaptive(f, c, b, 0.5 * tol, depth + 1);
}

template <typename Fn>
double integrate(const Fn& f, double a, double b, double tol) {
  if (!(b > a)) return 0.0;
  return adaptive(f, a, b, tol, 0);
}

// Integrates over [knots.front(), knots.back()] splitting at every knot, so
// piecewise-polynomial integrands stay smooth inside each panel.
template <typename Fn>
double integrate_piecewise(const Fn& f, const std::vector<double>& knots, double tol) {
  double total = 0;
  for (std::size_t i = 0; i + 1 < knots.size(); ++i)
    total += integrate(f, knots[i], knots[i + 1], tol / (knots.size() - 1));
  return total;
}

double eval_poly(const std::vector<double>& coeffs, double t) {
  double v = 0;
  for (std::size_t j = coeffs.size(); j-- > 0;) v = v * t + coeffs[j];
  return v;
}

// Convolution of two copies of the weighted kernel at t, by quadrature of the
// defining integral over the support overlap.
double eq_self_convolution(const EquivalentKernel& eq, double t) {
  const double w = eq.support_halfwidth();
  const double lo = std::max(-w, t - w);
  const double hi = std::min(w, t + w);
  if (hi <= lo) return 0.0;
  return integrate([&](double s) { return eq(s) * eq(t - s); }, lo, hi, 1e-12);
}

// Solves the small SPD-ish system S y = e1 by Gaussian elimination with
// partial pivoting; S is at most 4x4 here.
std::vector<double> solve_first_column(std::vector<std::vector<double>> s) {
  const std::size_t n = s.size();
  std::vector<double> rhs(n, 0.0);
  rhs[0] = 1.0;
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = col;
    for (std::size_t r = col + 1; r < n; ++r)
      if (std::abs(s[r][col]) > std::abs(s[pivot][col])) pivot = r;
    if (s[pivot][col] == 0)
      throw std::runtime_error("singular kernel moment matrix");
    std::swap(s[pivot], s[col]);
    std::swap(rhs[pivot], rhs[col]);
    for (std::size_t r = col + 1; r < n; ++r) {
      const double f = s[r][col] / s[col][col];
      if (f == 0) continue;
      for (std::size_t c = col; c < n; ++c) s[r][c] -= f * s[col][c];
      rhs[r] -= f * rhs[col];
    }
  }
  std::vector<double> y(n, 0.0);
  for (std::size_t r = n; r-- > 0;) {
    double acc = rhs[r];
    for (std::size_t c = r + 1; c < n; ++c) acc -= s[r][c] * y[c];
    y[r] = acc / s[r][r];
  }
  return y;
}

}  // namespace

std::string kernel_name(KernelId id) {
  return id == KernelId::epanechnikov ? "epanechnikov" : "uniform";
}

double kernel_eval(const KernelSpec& k, double t) {
  if (std::abs(t) > k.support_halfwidth) return 0.0;
  if (k.id == KernelId::epanechnikov) return 0.75 * (1.0 - t * t);
  return 0.5;
}

double EquivalentKernel::operator()(double t) const {
  const double kv = kernel_eval(base, t);
  return kv == 0 ? 0.0 : eval_poly(weight_poly, t) * kv;
}

double kernel_self_convolution(const KernelSpec& k, double t) {
  return eq_self_convolution(EquivalentKernel{k, 0, {1.0}}, t);
}

EquivalentKernel equivalent_kernel(const KernelSpec& k, int order) {
  if (order < 0 || order > 3)
    throw std::invalid_argument("equivalent kernel supports orders 0..3");
  const double w = k.support_halfwidth;
  const std::size_t n = static_cast<std::size_t>(order) + 1;
  std::vector<std::vector<double>> s(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      s[i][j] = integrate(
          [&](double t) { return std::pow(t, static_cast<double>(i + j)) * kernel_eval(k, t); },
          -w, w, 1e-12);
  return EquivalentKernel{k, order, solve_first_column(std::move(s))};
}

KernelConstants constants_for(const KernelSpec& k, int order) {
  const EquivalentKernel eq = equivalent_kernel(k, order);
  const double w = eq.support_halfwidth();
  const double sq = integrate_piecewise(
      [&](double t) { return eq(t) * eq(t); }, {-w, 0.0, w}, 1e-10);
  KernelConstants out;
  out.c_k = eq(0.0) - 0.5 * sq;
  out.nu_k = 2.0 * integrate_piecewise(
                       [&](double t) {
                         const double d = eq(t) - 0.5 * eq_self_convolution(eq, t);
                         return d * d;
                       },
                       {-2 * w, -w, 0.0, w, 2 * w}, 1e-10);
  out.r_k = 2.0 * out.c_k / out.nu_k;
  return out;
}

double null_dof(const KernelConstants& constants, double covariate_range, double h) {
  if (!(covariate_range > 0)) throw std::domain_error("covariate range must be positive");
  if (!(h > 0)) throw std::domain_error("bandwidth must be positive");
  return constants.r_k * constants.c_k * covariate_range / h;
}

}  // namespace copcal
