#pragma once

#include <algorithm>
#include <cmath>
#include <iostream>
#include <string>
#include <utility>
#include <vector>

#include "sip/csv.hpp"
#include "sip/errors.hpp"
#include "sip/rng.hpp"
#include "sip/special.hpp"

namespace sip {

// Observed outputs of the physical system: K rows of m columns, together
// with the box they are required to live in.
struct ObservedData {
  std::vector<double> values; // row-major size() x m
  std::size_t m = 1;
  std::vector<std::pair<double, double>> d_bounds;
  std::size_t dropped = 0; // out-of-bounds rows discarded at load time
  std::size_t clipped = 0; // jittered values clipped back into the box

  std::size_t size() const { return m ? values.size() / m : 0; }
  const double* row(std::size_t i) const { return values.data() + i * m; }
};

// Load observations from a CSV file with header q_1[,q_2,...]. Rows that
// fall outside the declared bounds are dropped with a warning; an input
// that leaves nothing usable is an error.
inline ObservedData load_observations(
    const std::string& path,
    const std::vector<std::pair<double, double>>& d_bounds) {
  if (d_bounds.empty()) throw config_error("load_observations: empty bounds");
  for (auto [lo, hi] : d_bounds)
    if (!(lo < hi)) throw config_error("load_observations: bounds need lo < hi");

  csv::Table t = csv::read_table(path);
  std::size_t m = d_bounds.size();
  if (t.header.size() != m)
    throw data_error("'" + path + "': expected " + std::to_string(m) +
                     " columns for the declared bounds, found " +
                     std::to_string(t.header.size()));
  for (std::size_t j = 0; j < m; ++j) {
    std::string want = "q_" + std::to_string(j + 1);
    if (t.header[j] != want)
      throw data_error("'" + path + "': column " + std::to_string(j + 1) +
                       " must be named '" + want + "', found '" + t.header[j] + "'");
  }

  ObservedData out;
  out.m = m;
  out.d_bounds = d_bounds;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    bool inside = true;
    for (std::size_t j = 0; j < m; ++j) {
      double v = t.rows[r][j];
      if (!std::isfinite(v) || v < d_bounds[j].first || v > d_bounds[j].second) {
        inside = false;
        break;
      }
    }
    if (!inside) {
      ++out.dropped;
      std::cerr << "warning: '" << path << "' row " << (r + 2)
                << " outside declared bounds, dropped\n";
      continue;
    }
    out.values.insert(out.values.end(), t.rows[r].begin(), t.rows[r].end());
  }
  if (out.values.empty())
    throw data_error("'" + path + "': no rows inside the declared bounds");
  return out;
}

// Smallest interval containing the values, padded on each side by frac of
// the value range. This is the conventional support choice when fitting a
// bounded-interval density to data whose true support is unknown.
inline std::pair<double, double> padded_range(const std::vector<double>& values,
                                              double frac = 0.1) {
  if (values.empty()) throw data_error("padded_range: no values");
  auto [lo_it, hi_it] = std::minmax_element(values.begin(), values.end());
  double span = *hi_it - *lo_it;
  if (!(span > 0.0)) throw data_error("padded_range: values are all equal");
  return {*lo_it - frac * span, *hi_it + frac * span};
}

// Beta density fitted to scalar data, recorded with the support interval the
// data were mapped from: density lives on (lo, hi).
struct BetaFit {
  double alpha = 0.0;
  double beta = 0.0;
  double lo = 0.0;
  double hi = 1.0;

  double mean() const { return lo + (hi - lo) * alpha / (alpha + beta); }
};

// Maximum-likelihood Beta fit of scalar observations. The declared bounds
// are mapped affinely onto (0, 1) (so the fit is equivariant under affine
// rescaling of the data); Newton iteration on the log-likelihood gradient
// with method-of-moments start and step halving.
inline BetaFit fit_beta_mle(const ObservedData& data) {
  if (data.m != 1)
    throw config_error("fit_beta_mle: only scalar observations are supported");
  std::size_t k = data.size();
  if (k < 2) throw data_error("fit_beta_mle: need at least two observations");
  auto [lo, hi] = data.d_bounds[0];

  // map onto (0,1), nudging exact endpoints inward so logs stay finite
  constexpr double kNudge = 1e-9;
  double s1 = 0.0, s2 = 0.0, mean = 0.0, sq = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    double u = (data.values[i] - lo) / (hi - lo);
    u = std::min(1.0 - kNudge, std::max(kNudge, u));
    s1 += std::log(u);
    s2 += std::log1p(-u);
    mean += u;
    sq += u * u;
  }
  double n = static_cast<double>(k);
  s1 /= n;
  s2 /= n;
  mean /= n;
  double var = sq / n - mean * mean;
  if (!(var > 0.0)) throw numeric_error("fit_beta_mle: degenerate sample (zero variance)");

  // method-of-moments start
  double common = mean * (1.0 - mean) / var - 1.0;
  double a = std::max(1e-3, mean * common);
  double b = std::max(1e-3, (1.0 - mean) * common);

  constexpr int kMaxIter = 200;
  constexpr double kGradTol = 1e-8;
  for (int it = 0; it < kMaxIter; ++it) {
    double psiab = digamma(a + b);
    double ga = s1 - digamma(a) + psiab;
    double gb = s2 - digamma(b) + psiab;
    if (std::max(std::abs(ga), std::abs(gb)) < kGradTol) {
      BetaFit fit;
      fit.alpha = a;
      fit.beta = b;
      fit.lo = lo;
      fit.hi = hi;
      return fit;
    }
    double tab = trigamma(a + b);
    double haa = -trigamma(a) + tab;
    double hbb = -trigamma(b) + tab;
    double det = haa * hbb - tab * tab;
    if (!(std::abs(det) > 0.0))
      throw numeric_error("fit_beta_mle: singular Hessian");
    double da = -(hbb * ga - tab * gb) / det;
    double db = -(-tab * ga + haa * gb) / det;
    double step = 1.0;
    while (a + step * da <= 0.0 || b + step * db <= 0.0) step *= 0.5;
    a += step * da;
    b += step * db;
  }
  throw numeric_error("fit_beta_mle: no convergence after 200 iterations (last a=" +
                      csv::format(a) + ", b=" + csv::format(b) + ")");
}

// Replace each observation by R noisy copies: value + w * (2B - 1) with
// B ~ Beta(alpha, beta), clipped back into the declared box. Each original
// datum owns its own noise substream keyed by its row index, so appending
// rows never perturbs the noise attached to existing rows.
inline ObservedData jitter_augment(const ObservedData& data, double half_width,
                                   double alpha, double beta, std::size_t repeats,
                                   const RandomStream& stream) {
  if (data.m != 1)
    throw config_error("jitter_augment: only scalar observations are supported");
  if (!(half_width > 0.0)) throw config_error("jitter_augment: half_width must be positive");
  if (repeats == 0) throw config_error("jitter_augment: repeats must be >= 1");
  auto [lo, hi] = data.d_bounds[0];

  ObservedData out;
  out.m = 1;
  out.d_bounds = data.d_bounds;
  out.dropped = data.dropped;
  out.values.reserve(data.size() * repeats);
  for (std::size_t i = 0; i < data.size(); ++i) {
    RandomStream sub = stream.substream(static_cast<std::uint64_t>(i));
    double q = data.values[i];
    for (std::size_t r = 0; r < repeats; ++r) {
      double shift = half_width * (2.0 * sub.next_beta(alpha, beta) - 1.0);
      double v = q + shift;
      if (v < lo) {
        v = lo;
        ++out.clipped;
      } else if (v > hi) {
        v = hi;
        ++out.clipped;
      }
      out.values.push_back(v);
    }
  }
  return out;
}

// Draw N synthetic observations from a fitted Beta density on its support.
inline std::vector<double> resample_parametric(const BetaFit& fit, std::size_t n,
                                               RandomStream& stream) {
  if (!(fit.alpha > 0.0) || !(fit.beta > 0.0))
    throw config_error("resample_parametric: invalid fit");
  std::vector<double> out(n);
  for (auto& v : out)
    v = fit.lo + (fit.hi - fit.lo) * stream.next_beta(fit.alpha, fit.beta);
  return out;
}

} // namespace sip
