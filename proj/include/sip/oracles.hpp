// Closed-form and high-accuracy reference solutions used to validate the
// sampling estimator: an exactly solvable discrete problem (rational
// arithmetic), the exponential-decay model with a uniform prior (analytic
// pushforward, tabulated update weight, box probabilities), contour arc
// lengths, and the conditional density on circular contours of the
// disk-radius model.
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numbers>
#include <numeric>
#include <string>
#include <vector>

#include "sip/errors.hpp"
#include "sip/model.hpp"
#include "sip/parallel.hpp"
#include "sip/partition.hpp"
#include "sip/posterior.hpp"
#include "sip/quad.hpp"
#include "sip/special.hpp"

namespace sip::oracle {

// ---------------------------------------------------------------------------
// Exact rational arithmetic (small denominators only). Intermediate products
// use 128-bit integers; results must fit back into 64 bits or we refuse.
// ---------------------------------------------------------------------------
struct Rational {
  long long num = 0;
  long long den = 1;

  Rational() = default;
  Rational(long long n) : num(n), den(1) {}  // NOLINT(google-explicit-constructor)
  Rational(long long n, long long d) {
    if (d == 0) throw numeric_error("Rational: zero denominator");
    num = n;
    den = d;
    normalize();
  }

  void normalize() {
    if (den < 0) {
      num = -num;
      den = -den;
    }
    long long g = std::gcd(num < 0 ? -num : num, den);
    if (g > 1) {
      num /= g;
      den /= g;
    }
    if (num == 0) den = 1;
  }

  double value() const { return static_cast<double>(num) / static_cast<double>(den); }

  static Rational reduce128(__int128 n, __int128 d) {
    if (d == 0) throw numeric_error("Rational: zero denominator");
    if (d < 0) {
      n = -n;
      d = -d;
    }
    __int128 a = n < 0 ? -n : n;
    __int128 b = d;
    while (b != 0) {
      __int128 t = a % b;
      a = b;
      b = t;
    }
    if (a > 1) {
      n /= a;
      d /= a;
    }
    constexpr __int128 lo = static_cast<__int128>(std::numeric_limits<long long>::min());
    constexpr __int128 hi = static_cast<__int128>(std::numeric_limits<long long>::max());
    if (n < lo || n > hi || d > hi)
      throw numeric_error("Rational: overflow after reduction");
    Rational r;
    r.num = static_cast<long long>(n);
    r.den = static_cast<long long>(d);
    if (r.num == 0) r.den = 1;
    return r;
  }

  friend Rational operator+(const Rational& a, const Rational& b) {
    return reduce128(static_cast<__int128>(a.num) * b.den + static_cast<__int128>(b.num) * a.den,
                     static_cast<__int128>(a.den) * b.den);
  }
  friend Rational operator-(const Rational& a, const Rational& b) {
    return reduce128(static_cast<__int128>(a.num) * b.den - static_cast<__int128>(b.num) * a.den,
                     static_cast<__int128>(a.den) * b.den);
  }
  friend Rational operator*(const Rational& a, const Rational& b) {
    return reduce128(static_cast<__int128>(a.num) * b.num,
                     static_cast<__int128>(a.den) * b.den);
  }
  friend Rational operator/(const Rational& a, const Rational& b) {
    if (b.num == 0) throw numeric_error("Rational: division by zero");
    return reduce128(static_cast<__int128>(a.num) * b.den,
                     static_cast<__int128>(a.den) * b.num);
  }
  friend bool operator==(const Rational& a, const Rational& b) {
    return a.num == b.num && a.den == b.den;
  }
  friend bool operator!=(const Rational& a, const Rational& b) { return !(a == b); }
  friend bool operator<(const Rational& a, const Rational& b) {
    return static_cast<__int128>(a.num) * b.den < static_cast<__int128>(b.num) * a.den;
  }
};

// ---------------------------------------------------------------------------
// Discrete inverse problem on a finite lattice. The forward map sends each
// lattice point to a small integer symbol; the observed distribution lives on
// symbols, the prior on points. Everything is exact.
// ---------------------------------------------------------------------------
struct DiscreteSip {
  std::vector<std::array<int, 2>> points;  // lattice points (lam1, lam2)
  std::vector<int> symbols;                // forward-map output per point
  std::vector<Rational> prior;             // pmf over points
  std::vector<Rational> data;              // pmf over symbol values 0..S-1
};

struct DiscretePosterior {
  std::vector<Rational> pmf;          // posterior mass per lattice point
  std::vector<Rational> conditional;  // prior mass of the point within its contour
};

// 3x3 lattice {1,2,3}^2 with the even/odd forward map: symbol 0 when
// lam1+lam2 is odd, 1 when it is even. `prior` is indexed [lam1-1][lam2-1].
inline DiscreteSip make_parity_sip(const std::vector<std::vector<Rational>>& prior,
                                   const std::vector<Rational>& data) {
  if (prior.size() != 3) throw config_error("make_parity_sip: prior must be 3x3");
  for (const auto& row : prior)
    if (row.size() != 3) throw config_error("make_parity_sip: prior must be 3x3");
  if (data.size() != 2) throw config_error("make_parity_sip: data pmf must have 2 entries");
  DiscreteSip s;
  for (int i = 1; i <= 3; ++i) {
    for (int j = 1; j <= 3; ++j) {
      s.points.push_back({i, j});
      s.symbols.push_back((i + j) % 2 == 0 ? 1 : 0);
      s.prior.push_back(prior[static_cast<std::size_t>(i - 1)][static_cast<std::size_t>(j - 1)]);
    }
  }
  s.data = data;
  return s;
}

inline std::vector<std::vector<Rational>> uniform_prior9() {
  return {{Rational(1, 9), Rational(1, 9), Rational(1, 9)},
          {Rational(1, 9), Rational(1, 9), Rational(1, 9)},
          {Rational(1, 9), Rational(1, 9), Rational(1, 9)}};
}

// Prior concentrated toward the lower-left block of the lattice.
inline std::vector<std::vector<Rational>> informed_prior9() {
  return {{Rational(1, 20), Rational(1, 20), Rational(1, 20)},
          {Rational(3, 16), Rational(3, 16), Rational(1, 20)},
          {Rational(3, 16), Rational(3, 16), Rational(1, 20)}};
}

// The distribution the synthetic experiment actually draws parameters from.
inline std::vector<std::vector<Rational>> generating_prior9() {
  return {{Rational(1, 20), Rational(1, 20), Rational(1, 20)},
          {Rational(1, 9), Rational(1, 9), Rational(1, 20)},
          {Rational(5, 12), Rational(1, 9), Rational(1, 20)}};
}

// Exact symbol distribution induced by generating_prior9: (29/90, 61/90).
inline std::vector<Rational> parity_data_exact() {
  return {Rational(29, 90), Rational(61, 90)};
}

// The 200-draw empirical estimate used throughout the worked example.
inline std::vector<Rational> parity_data_estimate() {
  return {Rational(17, 50), Rational(33, 50)};
}

// Pushforward of the prior onto symbols.
inline std::vector<Rational> induced_symbol_pmf(const DiscreteSip& s) {
  int max_symbol = 0;
  for (int v : s.symbols) max_symbol = std::max(max_symbol, v);
  std::vector<Rational> out(static_cast<std::size_t>(max_symbol) + 1, Rational(0));
  for (std::size_t k = 0; k < s.points.size(); ++k)
    out[static_cast<std::size_t>(s.symbols[k])] = out[static_cast<std::size_t>(s.symbols[k])] + s.prior[k];
  return out;
}

// Exact posterior: within each contour (preimage of a symbol) the prior is
// renormalized to a conditional, then scaled by the observed symbol mass.
inline DiscretePosterior discrete_posterior(const DiscreteSip& s) {
  if (s.points.size() != s.symbols.size() || s.points.size() != s.prior.size())
    throw config_error("discrete_posterior: inconsistent field sizes");
  Rational prior_total(0);
  for (const auto& p : s.prior) prior_total = prior_total + p;
  if (prior_total != Rational(1)) throw config_error("discrete_posterior: prior must sum to 1");
  Rational data_total(0);
  for (const auto& d : s.data) data_total = data_total + d;
  if (data_total != Rational(1)) throw config_error("discrete_posterior: data pmf must sum to 1");

  std::vector<Rational> contour_mass(s.data.size(), Rational(0));
  for (std::size_t k = 0; k < s.points.size(); ++k) {
    auto sym = static_cast<std::size_t>(s.symbols[k]);
    if (sym >= s.data.size()) throw config_error("discrete_posterior: symbol outside data pmf");
    contour_mass[sym] = contour_mass[sym] + s.prior[k];
  }
  for (std::size_t v = 0; v < s.data.size(); ++v)
    if (s.data[v].num != 0 && contour_mass[v].num == 0)
      throw data_error("discrete_posterior: data mass on a contour with zero prior mass");

  DiscretePosterior out;
  out.pmf.resize(s.points.size(), Rational(0));
  out.conditional.resize(s.points.size(), Rational(0));
  for (std::size_t k = 0; k < s.points.size(); ++k) {
    auto sym = static_cast<std::size_t>(s.symbols[k]);
    if (contour_mass[sym].num == 0) continue;  // unhit contour: posterior mass 0
    out.conditional[k] = s.prior[k] / contour_mass[sym];
    out.pmf[k] = s.data[sym] * out.conditional[k];
  }
  return out;
}

// Shannon entropy in nats; zero-mass entries contribute nothing.
inline double discrete_entropy(const std::vector<double>& pmf) {
  NeumaierSum h;
  for (double p : pmf) {
    if (p < 0.0) throw config_error("discrete_entropy: negative probability");
    if (p > 0.0) h.add(-p * std::log(p));
  }
  return h.value();
}

inline double discrete_entropy(const std::vector<Rational>& pmf) {
  std::vector<double> v(pmf.size());
  for (std::size_t i = 0; i < pmf.size(); ++i) v[i] = pmf[i].value();
  return discrete_entropy(v);
}

// ---------------------------------------------------------------------------
// Exponential-decay model q = lam1 * exp(-T lam2) on [0,1]^2.
// ---------------------------------------------------------------------------

// Density at q of the image of the uniform distribution on [0,1]^2. Piecewise
// closed form with a kink at q = exp(-T); continuous across it.
inline double expdecay_pushforward_density(double q, double t_end) {
  if (!(t_end > 0.0)) throw config_error("expdecay_pushforward_density: t_end must be positive");
  if (!(q > 0.0) || !(q < 1.0))
    throw config_error("expdecay_pushforward_density: q must lie in (0,1)");
  if (q < std::exp(-t_end)) return std::expm1(t_end) / t_end;
  return (1.0 / q - 1.0) / t_end;
}

// Density at q of the image of Beta(a,b) x Beta(a,b) coordinates: integrate
// over the contour parameterized by lam2, picking up the Jacobian e^{T lam2}.
class ExpDecayDataDensity {
 public:
  ExpDecayDataDensity(double alpha, double beta, double t_end, double tol = 1e-11)
      : alpha_(alpha), beta_(beta), t_end_(t_end), tol_(tol) {
    if (!(alpha > 0.0) || !(beta > 0.0))
      throw config_error("ExpDecayDataDensity: shape parameters must be positive");
    if (!(t_end > 0.0)) throw config_error("ExpDecayDataDensity: t_end must be positive");
  }

  double operator()(double q) const {
    if (!(q > 0.0) || q >= 1.0) return 0.0;
    const double upper = std::min(1.0, std::log(1.0 / q) / t_end_);
    auto integrand = [&](double lam2) {
      const double growth = std::exp(t_end_ * lam2);
      const double lam1 = q * growth;
      if (lam1 <= 0.0 || lam1 >= 1.0 || lam2 <= 0.0 || lam2 >= 1.0) return 0.0;
      return beta_pdf(lam2, alpha_, beta_) * beta_pdf(lam1, alpha_, beta_) * growth;
    };
    return integrate(integrand, 0.0, upper, tol_);
  }

  double alpha() const { return alpha_; }
  double beta() const { return beta_; }
  double t_end() const { return t_end_; }

 private:
  double alpha_;
  double beta_;
  double t_end_;
  double tol_;
};

// Pointwise posterior density for the uniform prior: data density over
// pushforward density at q = Q(lam). A vanishing pushforward density means
// the point sits on a contour the prior cannot reach.
inline double expdecay_uniform_posterior_density(double lam1, double lam2, double t_end,
                                                 const std::function<double(double)>& data_density) {
  if (!(lam1 >= 0.0) || !(lam1 <= 1.0) || !(lam2 >= 0.0) || !(lam2 <= 1.0))
    throw config_error("expdecay_uniform_posterior_density: point outside [0,1]^2");
  const double q = eval_exp_decay(lam1, lam2, t_end);
  if (!(q > 0.0) || !(q < 1.0)) {
    if (q <= 0.0) throw numeric_error("expdecay_uniform_posterior_density: singular contour q=0");
    // q == 1 only at (1,0); the pushforward density vanishes there.
    throw numeric_error("expdecay_uniform_posterior_density: singular contour q=1");
  }
  return data_density(q) / expdecay_pushforward_density(q, t_end);
}

// Reference posterior for the uniform prior with a tabulated update weight
// w(q) = data(q)/pushforward(q). Box probabilities reduce to a 1-D integral:
//   P(A1 x A2) = Int_{A2} e^{T u} [ W(b1 e^{-Tu}) - W(a1 e^{-Tu}) ] du,
// where W is the running integral of w. W is evaluated exactly for the
// piecewise-linear interpolant of the table, so only the outer integral is
// adaptive.
class ExpDecayOracle {
 public:
  ExpDecayOracle(double t_end, const std::function<double(double)>& data_density,
                 std::size_t nodes = 20001)
      : t_end_(t_end), nodes_(nodes) {
    if (!(t_end > 0.0)) throw config_error("ExpDecayOracle: t_end must be positive");
    if (nodes_ < 3) throw config_error("ExpDecayOracle: need at least 3 table nodes");
    step_ = 1.0 / static_cast<double>(nodes_ - 1);
    w_.assign(nodes_, 0.0);
    // Endpoints stay 0: the data density vanishes at q=0 and decays faster
    // than the pushforward density near q=1 for interior-supported data.
    for (std::size_t i = 1; i + 1 < nodes_; ++i) {
      const double q = static_cast<double>(i) * step_;
      w_[i] = data_density(q) / expdecay_pushforward_density(q, t_end_);
      if (!std::isfinite(w_[i]) || w_[i] < 0.0)
        throw numeric_error("ExpDecayOracle: invalid update weight in table");
    }
    prefix_.assign(nodes_, 0.0);
    NeumaierSum acc;
    for (std::size_t i = 1; i < nodes_; ++i) {
      acc.add(0.5 * step_ * (w_[i - 1] + w_[i]));
      prefix_[i] = acc.value();
    }
  }

  double t_end() const { return t_end_; }
  std::size_t table_nodes() const { return nodes_; }
  double table_node(std::size_t i) const { return static_cast<double>(i) * step_; }
  double table_weight(std::size_t i) const { return w_.at(i); }

  // Piecewise-linear interpolation of the tabulated update weight.
  double update_weight(double q) const {
    if (q <= 0.0 || q >= 1.0) return 0.0;
    const double x = q / step_;
    auto k = static_cast<std::size_t>(x);
    if (k + 1 >= nodes_) k = nodes_ - 2;
    const double t = x - static_cast<double>(k);
    return w_[k] + (w_[k + 1] - w_[k]) * t;
  }

  double posterior_density(double lam1, double lam2) const {
    return update_weight(eval_exp_decay(lam1, lam2, t_end_));
  }

  // Exact running integral of the piecewise-linear table on [0, x].
  double weight_antiderivative(double x) const {
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return prefix_.back();
    const double s = x / step_;
    auto k = static_cast<std::size_t>(s);
    if (k + 1 >= nodes_) k = nodes_ - 2;
    const double t = s - static_cast<double>(k);
    const double wk = w_[k];
    const double slope = w_[k + 1] - w_[k];
    return prefix_[k] + step_ * t * (wk + 0.5 * slope * t);
  }

  double box_probability(double a1, double b1, double a2, double b2, double tol = 1e-9) const {
    if (!(0.0 <= a1 && a1 < b1 && b1 <= 1.0 && 0.0 <= a2 && a2 < b2 && b2 <= 1.0))
      throw config_error("ExpDecayOracle::box_probability: box must be a sub-box of [0,1]^2");
    auto strip = [&](double lam2) {
      const double decay = std::exp(-t_end_ * lam2);
      return std::exp(t_end_ * lam2) *
             (weight_antiderivative(b1 * decay) - weight_antiderivative(a1 * decay));
    };
    return integrate(strip, a2, b2, tol);
  }

  double total_mass() const { return box_probability(0.0, 1.0, 0.0, 1.0); }

  // Cell probabilities of the posterior on a G x G grid over [0,1]^2,
  // normalized to sum to one; layout matches marginal_heatmap (lam1 rows).
  GridHeatmap heatmap(std::size_t cells, double tol = 1e-9) const {
    if (cells == 0) throw config_error("ExpDecayOracle::heatmap: need at least one cell");
    GridHeatmap hm;
    hm.grid = build_uniform_partition({{0.0, 1.0}, {0.0, 1.0}}, {cells, cells});
    hm.dim_a = 0;
    hm.dim_b = 1;
    hm.probs.assign(cells * cells, 0.0);
    hm.outside_mass = 0.0;
    const double width = 1.0 / static_cast<double>(cells);
    NeumaierSum total;
    for (std::size_t ia = 0; ia < cells; ++ia) {
      const double a1 = static_cast<double>(ia) * width;
      const double b1 = ia + 1 == cells ? 1.0 : a1 + width;
      for (std::size_t ib = 0; ib < cells; ++ib) {
        const double a2 = static_cast<double>(ib) * width;
        const double b2 = ib + 1 == cells ? 1.0 : a2 + width;
        const double p = box_probability(a1, b1, a2, b2, tol);
        hm.probs[ia * cells + ib] = p;
        total.add(p);
      }
    }
    const double mass = total.value();
    if (!(mass > 0.0)) throw numeric_error("ExpDecayOracle::heatmap: zero total mass");
    for (double& p : hm.probs) p /= mass;
    return hm;
  }

 private:
  double t_end_;
  std::size_t nodes_;
  double step_ = 0.0;
  std::vector<double> w_;
  std::vector<double> prefix_;
};

// Arc length of the contour {(lam1, lam2) : lam1 e^{-T lam2} = q} inside the
// unit square, parameterized by lam2 on [0, min(1, ln(1/q)/T)].
inline double expdecay_contour_arclength(double q, double t_end, double tol = 1e-10) {
  if (!(t_end > 0.0)) throw config_error("expdecay_contour_arclength: t_end must be positive");
  if (!(q >= 0.0) || !(q <= 1.0))
    throw config_error("expdecay_contour_arclength: q must lie in [0,1]");
  const double upper = q == 0.0 ? 1.0 : std::min(1.0, std::log(1.0 / q) / t_end);
  if (upper <= 0.0) return 0.0;
  auto integrand = [&](double lam2) {
    const double d = q * t_end * std::exp(t_end * lam2);
    return std::sqrt(1.0 + d * d);
  };
  return integrate(integrand, 0.0, upper, tol);
}

// Gradient-weighted measure of the same contour: the arc-length element
// scaled by 1/|grad Q|. This is the measure the disintegration theory puts on
// contours, and it is NOT the plain arc length above; integrating it over the
// whole contour recovers the uniform pushforward density at q (coarea
// formula), which makes the two easy to tell apart in tests.
inline double expdecay_contour_weighted_measure(double q, double t_end, double tol = 1e-10) {
  if (!(t_end > 0.0))
    throw config_error("expdecay_contour_weighted_measure: t_end must be positive");
  if (!(q > 0.0) || !(q < 1.0))
    throw config_error("expdecay_contour_weighted_measure: q must lie in (0,1)");
  const double upper = std::min(1.0, std::log(1.0 / q) / t_end);
  if (upper <= 0.0) return 0.0;
  auto integrand = [&](double lam2) {
    const double lam1 = q * std::exp(t_end * lam2);
    const double dlam1 = lam1 * t_end;  // d lam1 / d lam2 along the contour
    const double arc = std::sqrt(1.0 + dlam1 * dlam1);
    // |grad Q| at (lam1, lam2): Q = lam1 e^{-T lam2}.
    const double grad = std::exp(-t_end * lam2) * std::sqrt(1.0 + t_end * t_end * lam1 * lam1);
    return arc / grad;
  };
  return integrate(integrand, 0.0, upper, tol);
}

// Conditional density over the angle of the radius-q circular contour of the
// disk-radius model, for an arbitrary prior density on the plane. Normalized
// over theta in [0, 2pi) with a fixed-node periodic trapezoid rule.
inline double disk_conditional_density(const std::function<double(double, double)>& prior_density,
                                       double radius, double theta, std::size_t nodes = 4096) {
  if (!(radius > 0.0)) throw config_error("disk_conditional_density: radius must be positive");
  auto along = [&](double t) { return prior_density(radius * std::cos(t), radius * std::sin(t)); };
  const double denom = integrate_periodic(along, 0.0, 2.0 * std::numbers::pi, nodes);
  if (!(denom > 0.0))
    throw numeric_error("disk_conditional_density: prior mass on this contour is zero");
  return along(theta) / denom;
}

}  // namespace sip::oracle
