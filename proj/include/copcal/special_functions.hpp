#pragma once

namespace copcal {

// ln Gamma(x), x > 0.
double gamma_log(double x);

// Regularized upper incomplete gamma Q(a, x) = Gamma(a, x) / Gamma(a),
// a > 0, x >= 0. Absolute error below 1e-12 over the ranges used here.
double gamma_q(double a, double x);

// The two evaluation routes behind gamma_q: the power series for the lower
// function P(a,x), and the Lentz continued fraction for Q(a,x) directly.
double gamma_p_series(double a, double x);
double gamma_q_continued_fraction(double a, double x);

// Complementary CDF of the Kolmogorov distribution,
// Q(t) = 2 sum_{j>=1} (-1)^{j-1} exp(-2 j^2 t^2).
double kolmogorov_complementary_cdf(double t);

}  // namespace copcal
