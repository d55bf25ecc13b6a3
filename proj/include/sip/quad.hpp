#pragma once

#include <cmath>
#include <cstddef>

#include "sip/errors.hpp"

namespace sip {

inline constexpr double kQuadTol = 1e-10;
inline constexpr std::size_t kQuadMaxIntervals = 1'000'000;

namespace detail {

struct SimpsonState {
  std::size_t intervals = 0;
};

template <class F>
double simpson_rec(const F& f, double a, double fa, double b, double fb,
                   double m, double fm, double whole, double tol,
                   SimpsonState& st) {
  if (++st.intervals > kQuadMaxIntervals)
    throw numeric_error("adaptive Simpson: interval budget exhausted");
  double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  double flm = f(lm), frm = f(rm);
  if (!std::isfinite(flm) || !std::isfinite(frm))
    throw numeric_error("adaptive Simpson: non-finite integrand value");
  double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  double delta = left + right - whole;
  if (std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
  return simpson_rec(f, a, fa, m, fm, lm, flm, left, 0.5 * tol, st) +
         simpson_rec(f, m, fm, b, fb, rm, frm, right, 0.5 * tol, st);
}

} // namespace detail

// Adaptive Simpson quadrature with an absolute tolerance and a hard cap on
// the number of interval refinements (a cap hit means the integrand is not
// being resolved and the result cannot be trusted, so it throws).
template <class F>
double integrate(const F& f, double a, double b, double tol = kQuadTol) {
  if (a == b) return 0.0;
  double fa = f(a), fb = f(b);
  double m = 0.5 * (a + b);
  double fm = f(m);
  if (!std::isfinite(fa) || !std::isfinite(fb) || !std::isfinite(fm))
    throw numeric_error("adaptive Simpson: non-finite integrand value");
  double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  detail::SimpsonState st;
  return detail::simpson_rec(f, a, fa, b, fb, m, fm, whole, tol, st);
}

// Trapezoid rule on a uniform grid for periodic integrands, where it is
// spectrally accurate. n is the number of subintervals over one period.
template <class F>
double integrate_periodic(const F& f, double a, double b, std::size_t n) {
  double h = (b - a) / static_cast<double>(n);
  double acc = 0.0;
  // endpoints coincide for a periodic integrand, so sum interior nodes once
  for (std::size_t i = 0; i < n; ++i) acc += f(a + h * static_cast<double>(i));
  return acc * h;
}

} // namespace sip
