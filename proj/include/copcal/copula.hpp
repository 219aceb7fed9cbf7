#pragma once

#include <string>

#include "copcal/rng.hpp"

namespace copcal {

enum class Family { frank, clayton };
enum class Link { identity, log };

// A copula family together with the link pairing its parameter space with the
// unrestricted calibration space. Frank pairs with the identity link
// (theta in R \ {0}); Clayton pairs with the log link (theta > 0, eta = ln theta).
struct CopulaSpec {
  Family family = Family::frank;
  Link link = Link::identity;

  static CopulaSpec frank() { return {Family::frank, Link::identity}; }
  static CopulaSpec clayton() { return {Family::clayton, Link::log}; }
};

struct UniformPair {
  double u1 = 0.5;
  double u2 = 0.5;
};

std::string family_name(Family f);
std::string link_name(Link l);

// g(theta) and g^{-1}(t).
double link_value(Link link, double theta);
double link_inverse(Link link, double t);

// Throws std::domain_error unless theta lies in the family's parameter space.
void check_theta(const CopulaSpec& spec, double theta);
// Throws std::domain_error unless both coordinates are strictly inside (0,1).
void check_pair(const UniformPair& pair);

// C(u1, u2 | theta).
double copula_cdf(const CopulaSpec& spec, const UniformPair& pair, double theta);

// ln c(u1, u2 | theta).
double log_density(const CopulaSpec& spec, const UniformPair& pair, double theta);

// Log copula density and its first two derivatives with respect to the
// calibration value t, chain-ruled through the link: theta = g^{-1}(t).
struct CalibrationDerivs {
  double value = 0;
  double first = 0;
  double second = 0;
};

CalibrationDerivs ell_derivs(const CopulaSpec& spec, double t, const UniformPair& pair);
double ell(const CopulaSpec& spec, double t, const UniformPair& pair);
double ell1(const CopulaSpec& spec, double t, const UniformPair& pair);
double ell2(const CopulaSpec& spec, double t, const UniformPair& pair);

// Solves dC/du1(u1, u2 | theta) = w for u2, via the family's closed-form
// inverse conditional distribution.
double conditional_quantile(const CopulaSpec& spec, double u1, double w, double theta);

// Draws one pair from C(.,.|theta): u1 uniform, then u2 through the inverse
// conditional distribution at a second uniform draw.
UniformPair sample_pair(const CopulaSpec& spec, double theta, RngStream& rng);

namespace detail {

// Unchecked evaluations for the fitting hot paths. Inputs are assumed
// validated once up front; the Frank t = 0 point evaluates through the
// independence expansion instead of being rejected, so optimizer line
// searches may cross it safely.
CalibrationDerivs ell_derivs_raw(const CopulaSpec& spec, double t, const UniformPair& pair);
double ell_value_raw(const CopulaSpec& spec, double t, const UniformPair& pair);

}  // namespace detail

}  // namespace copcal
