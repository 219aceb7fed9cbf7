#include "copcal/copula.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace copcal {

namespace {

// Branch windows for the Frank family. The D-bracket below cancels to
// O(theta) near independence, so direct evaluation of the derivatives loses
// ~eps/theta^2; the second-order expansion takes over well before that bites.
// The CDF keeps a narrower window (its expm1 form stays exact much closer to
// zero) and switches to fully scaled exponentials once 1 + P/Q itself starts
// cancelling at large theta.
constexpr double kFrankEllTaylorWindow = 1e-3;
constexpr double kFrankCdfTaylorWindow = 1e-6;
constexpr double kFrankCdfExpm1Limit = 2.0;
constexpr double kLogSpaceThreshold = 30.0;  // Clayton exponent scaling threshold

double logsumexp2(double a, double b) {
  const double m = std::max(a, b);
  return m + std::log(std::exp(a - m) + std::exp(b - m));
}

// Scaled exponential terms shared by the Frank density, CDF and calibration
// derivatives. With D = e^{-tu} + e^{-tv} - e^{-t(u+v)} - e^{-t}, carries
// ln|D| and the ratios D'/D, D''/D (derivatives in theta). Factoring out the
// largest exponent keeps every quantity representable for |theta| in the
// thousands and loses nothing for moderate theta.
struct FrankTerms {
  double log_abs_d;
  double d1_over_d;
  double d2_over_d;
};

FrankTerms frank_terms(double theta, double u, double v) {
  const double a1 = -theta * u;
  const double a2 = -theta * v;
  const double a3 = a1 + a2;
  const double a4 = -theta;
  const double m = std::max(std::max(a1, a2), std::max(a3, a4));
  const double e1 = std::exp(a1 - m);
  const double e2 = std::exp(a2 - m);
  const double e3 = std::exp(a3 - m);
  const double e4 = std::exp(a4 - m);
  const double s = u + v;
  const double bracket = e1 + e2 - e3 - e4;
  FrankTerms terms;
  terms.log_abs_d = m + std::log(std::abs(bracket));
  terms.d1_over_d = (-u * e1 - v * e2 + s * e3 + e4) / bracket;
  terms.d2_over_d = (u * u * e1 + v * v * e2 - s * s * e3 - e4) / bracket;
  return terms;
}

// ln|1 - e^{-theta}|, stable on both signs.
double frank_log_abs_1me(double theta) {
  if (theta > 0) return std::log1p(-std::exp(-theta));
  return -theta + std::log1p(-std::exp(theta));
}

// Independence expansions around theta = 0, second order in theta. The
// coefficients vanish on the margins, so C(u,1) = u stays exact inside the
// window.
double frank_cdf_taylor(double theta, double u, double v) {
  const double first = 0.5 * u * v * (1 - u) * (1 - v);
  const double bracket = 1.0 / 12 - (u + v) / 4 + (u * u + v * v) / 6 +
                         u * v / 4 + u * v * (1 - u - v) / 2 +
                         u * u * v * v / 3;
  return u * v + theta * first + theta * theta * u * v * bracket;
}

CalibrationDerivs frank_ell_taylor(double theta, double u, double v) {
  const double g1 = 0.5 * (1 - 2 * u) * (1 - 2 * v);
  const double g2 = 2 * u * v * (1 - u) * (1 - v) - 1.0 / 12;
  CalibrationDerivs d;
  d.value = theta * g1 + 0.5 * theta * theta * g2;
  d.first = g1 + theta * g2;
  d.second = g2;
  return d;
}

CalibrationDerivs frank_ell_derivs(double theta, double u, double v) {
  if (std::abs(theta) < kFrankEllTaylorWindow) return frank_ell_taylor(theta, u, v);
  const FrankTerms t = frank_terms(theta, u, v);
  const double s = u + v;
  CalibrationDerivs d;
  d.value = std::log(std::abs(theta)) + frank_log_abs_1me(theta) - theta * s -
            2 * t.log_abs_d;
  const double e_ratio = 1.0 / std::expm1(theta);            // e^{-t}/(1-e^{-t})
  const double e_ratio2 = -e_ratio / std::expm1(-theta);     // e^{-t}/(1-e^{-t})^2
  d.first = 1.0 / theta + e_ratio - s - 2 * t.d1_over_d;
  d.second = -1.0 / (theta * theta) - e_ratio2 -
             2 * (t.d2_over_d - t.d1_over_d * t.d1_over_d);
  return d;
}

double frank_ell_value(double theta, double u, double v) {
  if (std::abs(theta) < kFrankEllTaylorWindow) {
    const double g1 = 0.5 * (1 - 2 * u) * (1 - 2 * v);
    const double g2 = 2 * u * v * (1 - u) * (1 - v) - 1.0 / 12;
    return theta * g1 + 0.5 * theta * theta * g2;
  }
  const FrankTerms t = frank_terms(theta, u, v);
  return std::log(std::abs(theta)) + frank_log_abs_1me(theta) -
         theta * (u + v) - 2 * t.log_abs_d;
}


double frank_cdf(double theta, double u, double v) {
  if (std::abs(theta) < kFrankCdfTaylorWindow) return frank_cdf_taylor(theta, u, v);
  double c;
  if (std::abs(theta) <= kFrankCdfExpm1Limit) {
    const double ratio =
        std::expm1(-theta * u) * std::expm1(-theta * v) / std::expm1(-theta);
    c = -std::log1p(ratio) / theta;
  } else {
    const FrankTerms t = frank_terms(theta, u, v);
    c = -(t.log_abs_d - frank_log_abs_1me(theta)) / theta;
  }
  return std::clamp(c, 0.0, 1.0);
}

double frank_conditional_quantile(double theta, double u1, double w) {
  if (std::abs(theta) < kFrankCdfTaylorWindow)
    return w - 0.5 * theta * w * (1 - w) * (1 - 2 * u1);
  // u2 = -(1/theta) [ ln(e^{-t u1}(1-w) + w e^{-t}) - ln(e^{-t u1}(1-w) + w) ]
  const double a = -theta * u1 + std::log1p(-w);
  const double num = logsumexp2(a, -theta + std::log(w));
  const double den = logsumexp2(a, std::log(w));
  double u2 = -(num - den) / theta;
  if (u2 <= 0) u2 = std::numeric_limits<double>::min();
  if (u2 >= 1) u2 = std::nextafter(1.0, 0.0);
  return u2;
}

// Clayton pieces, S = u^{-theta} + v^{-theta} - 1 expressed through
// A = ln u, B = ln v. The plain path keeps full relative precision near
// independence; the scaled path keeps exponents representable when
// theta * |ln u| is large.
struct ClaytonTerms {
  double log_s;
  double s1_over_s;  // (dS/dtheta)/S
  double s2_over_s;  // (d2S/dtheta2)/S
};

ClaytonTerms clayton_terms(double theta, double a, double b) {
  ClaytonTerms t;
  const double ea_exp = -theta * a;  // >= 0
  const double eb_exp = -theta * b;
  if (std::max(ea_exp, eb_exp) <= kLogSpaceThreshold) {
    const double p = std::expm1(ea_exp);
    const double q = std::expm1(eb_exp);
    const double s = p + q + 1.0;
    t.log_s = std::log1p(p + q);
    t.s1_over_s = -(a * (p + 1) + b * (q + 1)) / s;
    t.s2_over_s = (a * a * (p + 1) + b * b * (q + 1)) / s;
  } else {
    const double m = std::max(ea_exp, eb_exp);
    const double ea = std::exp(ea_exp - m);
    const double eb = std::exp(eb_exp - m);
    const double e0 = std::exp(-m);
    const double st = ea + eb - e0;
    t.log_s = m + std::log(st);
    t.s1_over_s = -(a * ea + b * eb) / st;
    t.s2_over_s = (a * a * ea + b * b * eb) / st;
  }
  return t;
}

// Derivatives are taken in the calibration variable t = ln theta directly:
// with f = ln c, d(f)/dt = theta f_theta and d2(f)/dt2 = theta f_theta +
// theta^2 f_thetatheta; the combination below stays finite for theta -> 0.
CalibrationDerivs clayton_ell_derivs(double theta, double u, double v) {
  const double a = std::log(u);
  const double b = std::log(v);
  const ClaytonTerms t = clayton_terms(theta, a, b);
  const double ratio = t.log_s / theta;
  const double tr = theta / (1 + theta);
  CalibrationDerivs d;
  d.value = std::log1p(theta) - (1 + theta) * (a + b) - 2 * t.log_s - ratio;
  d.first = tr - theta * (a + b) + ratio - (2 * theta + 1) * t.s1_over_s;
  d.second = d.first - tr * tr - 2 * ratio + 2 * t.s1_over_s -
             (2 * theta * theta + theta) *
                 (t.s2_over_s - t.s1_over_s * t.s1_over_s);
  return d;
}

double clayton_ell_value(double theta, double u, double v) {
  const double a = std::log(u);
  const double b = std::log(v);
  const ClaytonTerms t = clayton_terms(theta, a, b);
  return std::log1p(theta) - (1 + theta) * (a + b) - 2 * t.log_s - t.log_s / theta;
}

double clayton_cdf(double theta, double u, double v) {
  const ClaytonTerms t = clayton_terms(theta, std::log(u), std::log(v));
  return std::exp(-t.log_s / theta);
}

double clayton_conditional_quantile(double theta, double u1, double w) {
  // v = [u1^{-theta} (w^{-theta/(1+theta)} - 1) + 1]^{-1/theta}
  const double a = std::log(u1);
  const double z = -theta * std::log(w) / (1 + theta);  // > 0
  const double lead = -theta * a;                       // > 0
  double log_t;                                         // ln(u1^{-theta} expm1(z) + 1)
  if (lead <= kLogSpaceThreshold) {
    log_t = std::log1p(std::exp(lead) * std::expm1(z));
  } else {
    const double lg = lead + (z > kLogSpaceThreshold
                                  ? z
                                  : std::log(std::expm1(z)));
    log_t = lg > kLogSpaceThreshold ? lg + std::log1p(std::exp(-lg))
                                    : std::log1p(std::exp(lg));
  }
  double u2 = std::exp(-log_t / theta);
  if (u2 <= 0) u2 = std::numeric_limits<double>::min();
  if (u2 >= 1) u2 = std::nextafter(1.0, 0.0);
  return u2;
}

}  // namespace

std::string family_name(Family f) {
  return f == Family::frank ? "frank" : "clayton";
}

std::string link_name(Link l) { return l == Link::identity ? "identity" : "log"; }

double link_value(Link link, double theta) {
  if (link == Link::identity) return theta;
  if (!(theta > 0)) throw std::domain_error("log link requires theta > 0");
  return std::log(theta);
}

double link_inverse(Link link, double t) {
  return link == Link::identity ? t : std::exp(t);
}

void check_theta(const CopulaSpec& spec, double theta) {
  if (!std::isfinite(theta)) throw std::domain_error("theta must be finite");
  if (spec.family == Family::frank) {
    if (theta == 0) throw std::domain_error("Frank copula requires theta != 0");
  } else {
    if (!(theta > 0)) throw std::domain_error("Clayton copula requires theta > 0");
  }
}

void check_pair(const UniformPair& pair) {
  if (!(pair.u1 > 0) || !(pair.u1 < 1) || !(pair.u2 > 0) || !(pair.u2 < 1))
    throw std::domain_error("uniform pair must lie strictly inside (0,1)");
}

double copula_cdf(const CopulaSpec& spec, const UniformPair& pair, double theta) {
  check_theta(spec, theta);
  check_pair(pair);
  return spec.family == Family::frank ? frank_cdf(theta, pair.u1, pair.u2)
                                      : clayton_cdf(theta, pair.u1, pair.u2);
}

double log_density(const CopulaSpec& spec, const UniformPair& pair, double theta) {
  check_theta(spec, theta);
  check_pair(pair);
  return spec.family == Family::frank
             ? frank_ell_derivs(theta, pair.u1, pair.u2).value
             : clayton_ell_derivs(theta, pair.u1, pair.u2).value;
}

CalibrationDerivs ell_derivs(const CopulaSpec& spec, double t, const UniformPair& pair) {
  check_pair(pair);
  if (spec.family == Family::frank) {
    if (!std::isfinite(t) || t == 0)
      throw std::domain_error("calibration value maps outside the Frank parameter space");
    return frank_ell_derivs(t, pair.u1, pair.u2);
  }
  if (!std::isfinite(t)) throw std::domain_error("calibration value must be finite");
  if (t > 690) {  // exp(t) would overflow; the likelihood is already -inf there
    return {-std::numeric_limits<double>::infinity(), 0, 0};
  }
  return clayton_ell_derivs(std::exp(t), pair.u1, pair.u2);
}

double ell(const CopulaSpec& spec, double t, const UniformPair& pair) {
  return ell_derivs(spec, t, pair).value;
}

double ell1(const CopulaSpec& spec, double t, const UniformPair& pair) {
  return ell_derivs(spec, t, pair).first;
}

double ell2(const CopulaSpec& spec, double t, const UniformPair& pair) {
  return ell_derivs(spec, t, pair).second;
}

double conditional_quantile(const CopulaSpec& spec, double u1, double w, double theta) {
  check_theta(spec, theta);
  if (!(u1 > 0) || !(u1 < 1) || !(w > 0) || !(w < 1))
    throw std::domain_error("conditional_quantile requires u1, w strictly inside (0,1)");
  return spec.family == Family::frank
             ? frank_conditional_quantile(theta, u1, w)
             : clayton_conditional_quantile(theta, u1, w);
}

UniformPair sample_pair(const CopulaSpec& spec, double theta, RngStream& rng) {
  check_theta(spec, theta);
  const double u1 = rng.next_open01();
  const double w = rng.next_open01();
  return {u1, conditional_quantile(spec, u1, w, theta)};
}

namespace detail {

CalibrationDerivs ell_derivs_raw(const CopulaSpec& spec, double t, const UniformPair& pair) {
  if (spec.family == Family::frank) return frank_ell_derivs(t, pair.u1, pair.u2);
  if (t > 690) return {-std::numeric_limits<double>::infinity(), 0, 0};
  return clayton_ell_derivs(std::exp(t), pair.u1, pair.u2);
}

double ell_value_raw(const CopulaSpec& spec, double t, const UniformPair& pair) {
  if (spec.family == Family::frank) return frank_ell_value(t, pair.u1, pair.u2);
  if (t > 690) return -std::numeric_limits<double>::infinity();
  return clayton_ell_value(std::exp(t), pair.u1, pair.u2);
}

}  // namespace detail

}  // namespace copcal
