#pragma once

#include <cmath>
#include <limits>
#include <string>

#include "sip/errors.hpp"

namespace sip {

// log Gamma for strictly positive argument. glibc's lgamma writes the global
// signgam, which is a data race under threads; prefer the reentrant form.
inline double lgamma_pos(double x) {
#if defined(__unix__) || defined(__APPLE__)
  int sign = 0;
  return ::lgamma_r(x, &sign);
#else
  return std::lgamma(x);
#endif
}

inline double lbeta(double a, double b) {
  return lgamma_pos(a) + lgamma_pos(b) - lgamma_pos(a + b);
}

// Digamma via upward recurrence into the asymptotic region. Accurate to
// ~1e-13 over the shape ranges used here (x > 0).
inline double digamma(double x) {
  if (!(x > 0.0)) throw numeric_error("digamma: argument must be positive");
  double acc = 0.0;
  while (x < 10.0) {
    acc -= 1.0 / x;
    x += 1.0;
  }
  double inv = 1.0 / x;
  double inv2 = inv * inv;
  // ln x - 1/(2x) - sum B_{2k}/(2k x^{2k})
  double series = inv2 * (1.0 / 12 - inv2 * (1.0 / 120 - inv2 * (1.0 / 252 - inv2 * (1.0 / 240 - inv2 * (1.0 / 132 - inv2 * (691.0 / 32760 - inv2 / 12))))));
  return acc + std::log(x) - 0.5 * inv - series;
}

// Trigamma via the same shift-then-asymptotic scheme.
inline double trigamma(double x) {
  if (!(x > 0.0)) throw numeric_error("trigamma: argument must be positive");
  double acc = 0.0;
  while (x < 10.0) {
    acc += 1.0 / (x * x);
    x += 1.0;
  }
  double inv = 1.0 / x;
  double inv2 = inv * inv;
  double series =
      inv * (1.0 + inv * (0.5 + inv * (1.0 / 6 - inv2 * (1.0 / 30 - inv2 * (1.0 / 42 - inv2 * (1.0 / 30 - inv2 * (5.0 / 66 - inv2 * (691.0 / 2730 - inv2 * 7.0 / 6))))))));
  return acc + series;
}

namespace detail {

// Continued fraction for the regularized incomplete beta (modified Lentz).
inline double betacf(double a, double b, double x) {
  constexpr int kMaxIter = 300;
  constexpr double kEps = std::numeric_limits<double>::epsilon();
  constexpr double kTiny = 1e-300;

  double qab = a + b;
  double qap = a + 1.0;
  double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < kEps) return h;
  }
  throw numeric_error("betainc: continued fraction did not converge");
}

} // namespace detail

// Regularized incomplete beta function I_x(a, b).
inline double betainc(double a, double b, double x) {
  if (!(a > 0.0) || !(b > 0.0))
    throw numeric_error("betainc: shape parameters must be positive");
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  double lnfront = a * std::log(x) + b * std::log1p(-x) - lbeta(a, b);
  if (x < (a + 1.0) / (a + b + 2.0))
    return std::exp(lnfront) * detail::betacf(a, b, x) / a;
  return 1.0 - std::exp(lnfront) * detail::betacf(b, a, 1.0 - x) / b;
}

// Log density of Beta(a, b) at u in (0, 1); -inf outside the open interval
// unless the corresponding shape makes the endpoint finite.
inline double beta_log_pdf(double u, double a, double b) {
  if (u <= 0.0 || u >= 1.0) {
    if (u == 0.0 && a == 1.0) return (b - 1.0) * std::log1p(-u) - lbeta(a, b);
    if (u == 1.0 && b == 1.0) return (a - 1.0) * std::log(u) - lbeta(a, b);
    return -std::numeric_limits<double>::infinity();
  }
  return (a - 1.0) * std::log(u) + (b - 1.0) * std::log1p(-u) - lbeta(a, b);
}

inline double beta_pdf(double u, double a, double b) {
  double lp = beta_log_pdf(u, a, b);
  return std::isinf(lp) && lp < 0 ? 0.0 : std::exp(lp);
}

} // namespace sip
