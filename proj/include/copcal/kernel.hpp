#pragma once

#include <string>
#include <vector>

namespace copcal {

enum class KernelId { epanechnikov, uniform };

// Symmetric kernel density with compact support [-support_halfwidth, support_halfwidth].
struct KernelSpec {
  KernelId id = KernelId::epanechnikov;
  double support_halfwidth = 1.0;
};

std::string kernel_name(KernelId id);

double kernel_eval(const KernelSpec& k, double t);

// (K*K)(t) = int K(s) K(t-s) ds, supported on [-2w, 2w].
double kernel_self_convolution(const KernelSpec& k, double t);

// Equivalent kernel of order-p local polynomial fitting:
// K*(t) = e1' S^{-1} (1, t, ..., t^p)' K(t), with S the kernel moment matrix.
// For p in {0,1} and a symmetric base kernel, K* = K.
struct EquivalentKernel {
  KernelSpec base;
  int order = 0;
  std::vector<double> weight_poly;  // K*(t) = poly(t) * K(t)

  double operator()(double t) const;
  double support_halfwidth() const { return base.support_halfwidth; }
};

// order in {0,1,2,3}.
EquivalentKernel equivalent_kernel(const KernelSpec& k, int order);

// Test-statistic normalizing constants of the equivalent kernel:
//   mu_n = c_k * |X|/h,   nu_n = nu_k * |X|/h,   r_k = 2 mu_n / nu_n = 2 c_k / nu_k,
// with c_k = K*(0) - (1/2) int K*^2 and nu_k = 2 int (K* - (1/2) K* conv K*)^2.
struct KernelConstants {
  double c_k = 0;
  double nu_k = 0;
  double r_k = 0;
};

KernelConstants constants_for(const KernelSpec& k, int order);

// Effective parameter count of the nonparametric alternative,
// r_k * c_k * covariate_range / h; fractional values are expected.
double null_dof(const KernelConstants& constants, double covariate_range, double h);

}  // namespace copcal
