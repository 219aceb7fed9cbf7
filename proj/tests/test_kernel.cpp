#include <doctest.h>

#include <cmath>

#include "copcal/kernel.hpp"
#include "test_support.hpp"

using namespace copcal;

namespace {
const KernelSpec kEpan{KernelId::epanechnikov, 1.0};
const KernelSpec kUnif{KernelId::uniform, 1.0};

// closed-form Epanechnikov self-convolution on [0,2]
double epan_conv_closed(double t) {
  t = std::abs(t);
  if (t >= 2) return 0.0;
  return 9.0 / 16 *
         (16.0 / 15 - 4.0 / 3 * t * t + 2.0 / 3 * t * t * t - std::pow(t, 5) / 30);
}
}  // namespace

TEST_SUITE_BEGIN("kernel");

TEST_CASE("kernel evaluation") {
  CHECK(kernel_eval(kEpan, 0.0) == doctest::Approx(0.75));
  CHECK(kernel_eval(kEpan, 0.5) == doctest::Approx(0.5625));
  CHECK(kernel_eval(kEpan, 1.5) == 0.0);
  CHECK(kernel_eval(kEpan, -1.5) == 0.0);
  CHECK(kernel_eval(kUnif, 0.3) == doctest::Approx(0.5));
  CHECK(kernel_eval(kUnif, 1.2) == 0.0);
}

TEST_CASE("kernels are symmetric densities") {
  for (const KernelSpec& k : {kEpan, kUnif}) {
    const double mass = oracle::integrate([&](double t) { return kernel_eval(k, t); },
                                          -1.0, 1.0, 1e-12);
    CHECK(std::abs(mass - 1.0) <= 1e-10);
    for (double t : {0.2, 0.55, 0.9})
      CHECK(kernel_eval(k, t) == kernel_eval(k, -t));
  }
}

TEST_CASE("self convolution support, symmetry and values") {
  CHECK(kernel_self_convolution(kEpan, 3.0) == 0.0);
  CHECK(kernel_self_convolution(kUnif, -2.5) == 0.0);
  for (double t : {0.0, 0.4, 1.1, 1.7})
    CHECK(kernel_self_convolution(kEpan, t) ==
          doctest::Approx(kernel_self_convolution(kEpan, -t)).epsilon(1e-12));

  // quadrature of the defining integral, computed with an independent rule
  for (double t : {0.0, 0.35, 0.73, 1.2, 1.9}) {
    const double direct = oracle::integrate(
        [&](double s) { return kernel_eval(kEpan, s) * kernel_eval(kEpan, t - s); },
        std::max(-1.0, t - 1.0), 1.0, 1e-12);
    CHECK(kernel_self_convolution(kEpan, t) == doctest::Approx(direct).epsilon(1e-9));
    CHECK(kernel_self_convolution(kEpan, t) ==
          doctest::Approx(epan_conv_closed(t)).epsilon(1e-9));
  }
  CHECK(kernel_self_convolution(kEpan, 0.0) == doctest::Approx(0.6).epsilon(1e-10));
  // uniform kernel convolves to the triangle (2-|t|)/4
  for (double t : {0.0, 0.8, 1.6})
    CHECK(kernel_self_convolution(kUnif, t) ==
          doctest::Approx((2 - std::abs(t)) / 4).epsilon(1e-9));
}

TEST_CASE("equivalent kernels") {
  const EquivalentKernel k0 = equivalent_kernel(kEpan, 0);
  const EquivalentKernel k1 = equivalent_kernel(kEpan, 1);
  for (double t : {0.0, 0.25, 0.6, 0.95}) {
    CHECK(k0(t) == doctest::Approx(kernel_eval(kEpan, t)).epsilon(1e-12));
    CHECK(k1(t) == doctest::Approx(kernel_eval(kEpan, t)).epsilon(1e-12));
  }

  for (int p : {2, 3}) {
    const EquivalentKernel kp = equivalent_kernel(kEpan, p);
    for (int j = 0; j <= p; ++j) {
      const double moment = oracle::integrate(
          [&](double t) { return std::pow(t, j) * kp(t); }, -1.0, 1.0, 1e-12);
      CHECK(std::abs(moment - (j == 0 ? 1.0 : 0.0)) <= 1e-8);
    }
  }
  CHECK_THROWS_AS(equivalent_kernel(kEpan, 4), std::invalid_argument);
}

TEST_CASE("kernel constants match the tabulated values") {
  const KernelConstants e0 = constants_for(kEpan, 0);
  const KernelConstants e1 = constants_for(kEpan, 1);
  CHECK(std::abs(e1.c_k - 0.45) <= 1e-3);
  CHECK(std::abs(e1.r_k - 2.115) <= 5e-3);
  CHECK(std::abs(e0.c_k - e1.c_k) <= 1e-12);
  CHECK(std::abs(e0.r_k - e1.r_k) <= 1e-12);
  CHECK(std::abs(e0.nu_k - e1.nu_k) <= 1e-12);

  const KernelConstants u = constants_for(kUnif, 0);
  CHECK(u.c_k == doctest::Approx(0.25).epsilon(1e-9));
  CHECK(u.r_k == doctest::Approx(1.2).epsilon(1e-9));

  for (const KernelConstants& c : {e0, e1, u})
    CHECK(c.r_k == doctest::Approx(2 * c.c_k / c.nu_k).epsilon(1e-12));
}

TEST_CASE("constants agree with an independent quadrature") {
  // same functionals, fully independent integrator
  const double ck = kernel_eval(kEpan, 0.0) -
                    0.5 * oracle::integrate(
                              [&](double t) {
                                const double k = kernel_eval(kEpan, t);
                                return k * k;
                              },
                              -1.0, 1.0, 1e-12);
  const double nu = 2 * oracle::integrate(
                            [&](double t) {
                              const double d = kernel_eval(kEpan, t) -
                                               0.5 * epan_conv_closed(t);
                              return d * d;
                            },
                            -2.0, 2.0, 1e-12);
  const KernelConstants got = constants_for(kEpan, 1);
  CHECK(std::abs(got.c_k - ck) <= 1e-8);
  CHECK(std::abs(got.nu_k - nu) <= 1e-8);
  CHECK(std::abs(got.r_k - 2 * ck / nu) <= 1e-8);
}

TEST_CASE("degrees of freedom") {
  const KernelConstants c = constants_for(kEpan, 1);
  const double dof = null_dof(c, 3.0, 1.0);
  CHECK(dof == doctest::Approx(c.r_k * c.c_k * 3.0).epsilon(1e-12));
  // the identity dof = r_k * mu_n with mu_n = c_k * range / h
  CHECK(dof == doctest::Approx(c.r_k * (c.c_k * 3.0 / 1.0)).epsilon(1e-12));
  // close to the rounded constant quoted for this kernel (0.968 |X|/h)
  CHECK(std::abs(dof - 0.968 * 3.0) / (0.968 * 3.0) < 0.02);
  CHECK(null_dof(c, 3.0, 3.0) == doctest::Approx(dof / 3.0).epsilon(1e-12));
  CHECK_THROWS_AS(null_dof(c, -1.0, 1.0), std::domain_error);
  CHECK_THROWS_AS(null_dof(c, 3.0, 0.0), std::domain_error);
}

TEST_SUITE_END();
