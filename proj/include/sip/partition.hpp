#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "sip/data_io.hpp"
#include "sip/errors.hpp"
#include "sip/quad.hpp"
#include "sip/special.hpp"

namespace sip {

// Tensor-product partition of an axis-aligned box into half-open cells
// [e_k, e_{k+1}) per dimension; the last cell in each dimension is closed so
// the cells exactly cover the box.
struct PartitionD {
  std::vector<std::vector<double>> edges; // per dimension, strictly increasing

  std::size_t dims() const { return edges.size(); }

  std::size_t cells_in_dim(std::size_t d) const { return edges[d].size() - 1; }

  std::size_t cells() const {
    std::size_t n = 1;
    for (const auto& e : edges) n *= e.size() - 1;
    return n;
  }

  // Flat row-major cell index (dimension 0 slowest); -1 if outside the box.
  std::int64_t cell_index(const double* q) const {
    std::int64_t idx = 0;
    for (std::size_t d = 0; d < edges.size(); ++d) {
      const auto& e = edges[d];
      double v = q[d];
      if (!(v >= e.front()) || !(v <= e.back())) return -1;
      std::size_t k;
      if (v == e.back()) {
        k = e.size() - 2;
      } else {
        k = static_cast<std::size_t>(
                std::upper_bound(e.begin(), e.end(), v) - e.begin()) - 1;
      }
      idx = idx * static_cast<std::int64_t>(e.size() - 1) + static_cast<std::int64_t>(k);
    }
    return idx;
  }

  void cell_bounds(std::int64_t idx, double* lo, double* hi) const {
    for (std::size_t d = edges.size(); d-- > 0;) {
      auto n = static_cast<std::int64_t>(edges[d].size() - 1);
      std::int64_t k = idx % n;
      idx /= n;
      lo[d] = edges[d][static_cast<std::size_t>(k)];
      hi[d] = edges[d][static_cast<std::size_t>(k) + 1];
    }
  }

  double cell_volume(std::int64_t idx) const {
    double v = 1.0;
    for (std::size_t d = edges.size(); d-- > 0;) {
      auto n = static_cast<std::int64_t>(edges[d].size() - 1);
      std::int64_t k = idx % n;
      idx /= n;
      v *= edges[d][static_cast<std::size_t>(k) + 1] - edges[d][static_cast<std::size_t>(k)];
    }
    return v;
  }

  std::pair<double, double> dim_range(std::size_t d) const {
    return {edges[d].front(), edges[d].back()};
  }

  bool same_as(const PartitionD& o) const { return edges == o.edges; }
};

// Equal-width partition of a box.
inline PartitionD build_uniform_partition(
    const std::vector<std::pair<double, double>>& d_bounds,
    const std::vector<std::size_t>& cells_per_dim) {
  if (d_bounds.empty() || d_bounds.size() != cells_per_dim.size())
    throw config_error("build_uniform_partition: bounds/cell counts mismatch");
  PartitionD p;
  p.edges.resize(d_bounds.size());
  for (std::size_t d = 0; d < d_bounds.size(); ++d) {
    auto [lo, hi] = d_bounds[d];
    std::size_t m = cells_per_dim[d];
    if (!(lo < hi)) throw config_error("build_uniform_partition: need lo < hi");
    if (m == 0) throw config_error("build_uniform_partition: need at least one cell");
    auto& e = p.edges[d];
    e.resize(m + 1);
    for (std::size_t k = 0; k <= m; ++k)
      e[k] = lo + (hi - lo) * (static_cast<double>(k) / static_cast<double>(m));
    e[0] = lo;
    e[m] = hi;
  }
  return p;
}

// Default cell count for a K-point data set: sqrt(K) clamped to [10, 200].
inline std::size_t default_cell_count(std::size_t k) {
  auto m = static_cast<std::size_t>(std::llround(std::sqrt(static_cast<double>(k))));
  return std::clamp<std::size_t>(m, 10, 200);
}

// Probabilities attached to the cells of a partition. Invariant for the
// estimator constructors below: probs sums to 1 within 1e-12.
struct CellProbabilities {
  PartitionD partition;
  std::vector<double> probs;
  std::string source;            // "histogram" | "kde" | "parametric" | ...
  double bandwidth = 0.0;        // kde only
  double interior_mass = 1.0;    // kde: mass inside the box before renormalizing
  double overflow = 0.0;         // forecast only: weight landing outside

  std::size_t cells() const { return probs.size(); }
};

// Empirical histogram: fraction of observations per cell.
inline CellProbabilities histogram_probs(const ObservedData& data,
                                         const PartitionD& partition) {
  if (data.m != partition.dims())
    throw config_error("histogram_probs: data/partition dimension mismatch");
  if (data.size() == 0) throw data_error("histogram_probs: no observations");
  CellProbabilities out;
  out.partition = partition;
  out.source = "histogram";
  out.probs.assign(partition.cells(), 0.0);
  std::size_t outside = 0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    std::int64_t c = partition.cell_index(data.row(i));
    if (c < 0) {
      ++outside;
      continue;
    }
    out.probs[static_cast<std::size_t>(c)] += 1.0;
  }
  std::size_t used = data.size() - outside;
  if (used == 0) throw data_error("histogram_probs: all observations outside the partition");
  for (auto& p : out.probs) p /= static_cast<double>(used);
  return out;
}

// Gaussian-kernel bandwidth h = c * K^{-1/(m+4)}.
inline double default_bandwidth(std::size_t k, std::size_t m, double c) {
  if (k == 0 || m == 0 || !(c > 0.0))
    throw config_error("default_bandwidth: invalid arguments");
  return c * std::pow(static_cast<double>(k),
                      -1.0 / (static_cast<double>(m) + 4.0));
}

// Conventional scale factor for the bandwidth: 1.06 times the sample
// standard deviation of the (scalar) observations.
inline double silverman_factor(const ObservedData& data) {
  if (data.m != 1) throw config_error("silverman_factor: scalar data only");
  std::size_t k = data.size();
  if (k < 2) throw data_error("silverman_factor: need at least two observations");
  double mean = 0.0, sq = 0.0;
  for (double v : data.values) {
    mean += v;
    sq += v * v;
  }
  double n = static_cast<double>(k);
  mean /= n;
  double var = (sq - n * mean * mean) / (n - 1.0);
  if (!(var > 0.0)) throw data_error("silverman_factor: zero-variance sample");
  return 1.06 * std::sqrt(var);
}

// Gaussian-kernel density estimate integrated exactly over each cell (the
// integral of the kernel over a box is a product of erf differences), then
// renormalized so that mass trapped inside the partition sums to one.
inline CellProbabilities kde_cell_probs(const ObservedData& data,
                                        const PartitionD& partition, double h) {
  std::size_t m = partition.dims();
  if (data.m != m) throw config_error("kde_cell_probs: data/partition dimension mismatch");
  if (!(h > 0.0)) throw config_error("kde_cell_probs: bandwidth must be positive");
  std::size_t k = data.size();
  if (k == 0) throw data_error("kde_cell_probs: no observations");

  CellProbabilities out;
  out.partition = partition;
  out.source = "kde";
  out.bandwidth = h;
  out.probs.assign(partition.cells(), 0.0);

  const double inv = 1.0 / (h * std::sqrt(2.0));
  // per-dimension kernel masses for one datum: Phi((e_{j+1}-q)/h) - Phi((e_j-q)/h)
  std::vector<std::vector<double>> dim_mass(m);
  std::vector<std::size_t> radix(m);
  for (std::size_t d = 0; d < m; ++d) {
    radix[d] = partition.cells_in_dim(d);
    dim_mass[d].resize(radix[d]);
  }
  for (std::size_t i = 0; i < k; ++i) {
    const double* q = data.row(i);
    for (std::size_t d = 0; d < m; ++d) {
      const auto& e = partition.edges[d];
      double prev = std::erf((e[0] - q[d]) * inv);
      for (std::size_t j = 0; j < radix[d]; ++j) {
        double cur = std::erf((e[j + 1] - q[d]) * inv);
        dim_mass[d][j] = 0.5 * (cur - prev);
        prev = cur;
      }
    }
    // accumulate the tensor product over all cells
    std::vector<std::size_t> ix(m, 0);
    for (std::size_t c = 0; c < out.probs.size(); ++c) {
      double w = 1.0;
      for (std::size_t d = 0; d < m; ++d) w *= dim_mass[d][ix[d]];
      out.probs[c] += w;
      for (std::size_t d = m; d-- > 0;) {
        if (++ix[d] < radix[d]) break;
        ix[d] = 0;
      }
    }
  }
  double total = 0.0;
  for (double p : out.probs) total += p;
  if (!(total > 0.0)) throw numeric_error("kde_cell_probs: no kernel mass inside the box");
  for (auto& p : out.probs) p /= total;
  out.interior_mass = total / static_cast<double>(k);
  return out;
}

// Cell probabilities of a fitted Beta density over a scalar partition whose
// range must lie inside the fit's support. Regular shapes are integrated by
// adaptive Simpson; shapes below one have integrable endpoint singularities
// that defeat Simpson, so those use the regularized incomplete beta instead.
inline CellProbabilities parametric_cell_probs(const BetaFit& fit,
                                               const PartitionD& partition) {
  if (partition.dims() != 1)
    throw config_error("parametric_cell_probs: scalar partitions only");
  auto [plo, phi] = partition.dim_range(0);
  constexpr double kSlack = 1e-9;
  if (plo < fit.lo - kSlack || phi > fit.hi + kSlack)
    throw config_error("parametric_cell_probs: partition exceeds the fit support");

  const double scale = fit.hi - fit.lo;
  auto to_unit = [&](double x) {
    return std::clamp((x - fit.lo) / scale, 0.0, 1.0);
  };

  CellProbabilities out;
  out.partition = partition;
  out.source = "parametric";
  const auto& e = partition.edges[0];
  out.probs.resize(e.size() - 1);
  bool singular = fit.alpha < 1.0 || fit.beta < 1.0;
  for (std::size_t j = 0; j + 1 < e.size(); ++j) {
    double a = to_unit(e[j]), b = to_unit(e[j + 1]);
    if (singular) {
      out.probs[j] = betainc(fit.alpha, fit.beta, b) - betainc(fit.alpha, fit.beta, a);
    } else {
      out.probs[j] = integrate(
          [&](double u) { return beta_pdf(u, fit.alpha, fit.beta); }, a, b, kQuadTol);
    }
  }
  double total = 0.0;
  for (double p : out.probs) total += p;
  if (!(total > 0.0))
    throw numeric_error("parametric_cell_probs: no density mass over the partition");
  for (auto& p : out.probs) p /= total;
  return out;
}

} // namespace sip
