#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "sip/csv.hpp"
#include "sip/errors.hpp"
#include "sip/model.hpp"
#include "sip/parallel.hpp"
#include "sip/partition.hpp"

namespace sip {

// Posterior over parameter space represented as the prior sample reweighted:
// every sample whose model output lands in data cell i shares that cell's
// observed probability equally with its cellmates.
struct WeightedPosterior {
  SampleSet samples;               // prior points with model outputs attached
  PartitionD partition;            // partition of the output box
  std::vector<double> p_hat;       // observed cell probabilities used
  std::vector<std::int64_t> cell_of; // per-sample cell index, -1 if outside
  std::vector<double> weights;     // per-sample, renormalized to sum 1
  double empty_cell_mass = 0.0;    // observed mass in cells no sample reached
  std::size_t out_of_range = 0;    // samples whose output left the box
};

inline constexpr double kEmptyCellThreshold = 0.05;

// Build the weighted posterior from prior samples and observed cell
// probabilities: weight = p_hat(cell)/count(cell), empty cells drop their
// mass (renormalizing the rest), and losing more than `empty_threshold` of
// the observed mass aborts with advice to raise N.
inline WeightedPosterior compute_weights(SampleSet samples,
                                         const CellProbabilities& cellprobs,
                                         double empty_threshold = kEmptyCellThreshold,
                                         unsigned threads = 0) {
  if (samples.m_dim != cellprobs.partition.dims())
    throw config_error("compute_weights: output dimension does not match partition");
  if (samples.size() == 0) throw config_error("compute_weights: no prior samples");

  WeightedPosterior post;
  post.partition = cellprobs.partition;
  post.p_hat = cellprobs.probs;
  post.samples = std::move(samples);

  const std::size_t n = post.samples.size();
  post.cell_of.assign(n, -1);
  parallel_for(
      n,
      [&](std::size_t b, std::size_t e, std::size_t) {
        for (std::size_t i = b; i < e; ++i)
          post.cell_of[i] = post.partition.cell_index(post.samples.qval(i));
      },
      threads);

  std::vector<std::size_t> count(post.p_hat.size(), 0);
  std::size_t outside = 0;
  for (std::int64_t c : post.cell_of) {
    if (c < 0)
      ++outside;
    else
      ++count[static_cast<std::size_t>(c)];
  }
  post.out_of_range = outside;

  NeumaierSum empty, kept;
  for (std::size_t c = 0; c < count.size(); ++c) {
    if (count[c] == 0)
      empty.add(post.p_hat[c]);
    else
      kept.add(post.p_hat[c]);
  }
  post.empty_cell_mass = empty.value();
  if (post.empty_cell_mass > empty_threshold)
    throw under_resolved_error(
        "compute_weights: " + csv::format(post.empty_cell_mass) +
        " of the observed probability mass fell in cells containing no prior "
        "sample (threshold " + csv::format(empty_threshold) +
        "); increase the prior sample size N");

  const double total = kept.value();
  if (!(total > 0.0))
    throw under_resolved_error("compute_weights: no observed mass is reachable");

  post.weights.assign(n, 0.0);
  parallel_for(
      n,
      [&](std::size_t b, std::size_t e, std::size_t) {
        for (std::size_t i = b; i < e; ++i) {
          std::int64_t c = post.cell_of[i];
          if (c < 0) continue;
          auto ci = static_cast<std::size_t>(c);
          post.weights[i] =
              post.p_hat[ci] / (static_cast<double>(count[ci]) * total);
        }
      },
      threads);
  return post;
}

// Probability of an axis-aligned event box under the posterior.
inline double event_probability(const WeightedPosterior& post,
                                const std::vector<std::pair<double, double>>& box,
                                unsigned threads = 0) {
  if (box.size() != post.samples.n_dim)
    throw config_error("event_probability: box dimension mismatch");
  return parallel_sum(
      post.samples.size(),
      [&](std::size_t i) {
        const double* p = post.samples.point(i);
        for (std::size_t d = 0; d < box.size(); ++d)
          if (p[d] < box[d].first || p[d] > box[d].second) return 0.0;
        return post.weights[i];
      },
      threads);
}

// Two-dimensional marginal of the posterior on a uniform grid.
struct GridHeatmap {
  PartitionD grid;           // 2-D partition over the chosen coordinate pair
  std::size_t dim_a = 0;     // sample coordinate mapped to grid rows
  std::size_t dim_b = 1;     // sample coordinate mapped to grid columns
  std::vector<double> probs; // row-major rows x cols, sums to <= 1
  double outside_mass = 0.0; // weight of samples falling off the grid
};

inline GridHeatmap marginal_heatmap(const WeightedPosterior& post,
                                    std::size_t dim_a, std::size_t dim_b,
                                    std::size_t cells_a, std::size_t cells_b,
                                    std::pair<double, double> range_a,
                                    std::pair<double, double> range_b) {
  if (dim_a == dim_b || dim_a >= post.samples.n_dim || dim_b >= post.samples.n_dim)
    throw config_error("marginal_heatmap: invalid dimension pair");
  GridHeatmap hm;
  hm.grid = build_uniform_partition({range_a, range_b}, {cells_a, cells_b});
  hm.dim_a = dim_a;
  hm.dim_b = dim_b;
  hm.probs.assign(cells_a * cells_b, 0.0);
  NeumaierSum outside;
  for (std::size_t i = 0; i < post.samples.size(); ++i) {
    const double* p = post.samples.point(i);
    double xy[2] = {p[dim_a], p[dim_b]};
    std::int64_t c = hm.grid.cell_index(xy);
    if (c < 0)
      outside.add(post.weights[i]);
    else
      hm.probs[static_cast<std::size_t>(c)] += post.weights[i];
  }
  hm.outside_mass = outside.value();
  return hm;
}

// Per-cell comparison of posterior pushforward mass against the observed
// cell probabilities (renormalized over reachable cells). For a posterior
// straight out of compute_weights this is exact up to rounding; after
// accept-reject resampling it measures the resampling error.
struct PushforwardCheck {
  std::vector<double> discrepancy; // per cell
  double max_abs = 0.0;
};

inline PushforwardCheck pushforward_check(const WeightedPosterior& post,
                                          const PartitionD& partition) {
  if (!partition.same_as(post.partition))
    throw config_error("pushforward_check: partition differs from the posterior's");
  std::vector<NeumaierSum> cell_mass(post.p_hat.size());
  for (std::size_t i = 0; i < post.samples.size(); ++i) {
    std::int64_t c = post.cell_of[i];
    if (c >= 0) cell_mass[static_cast<std::size_t>(c)].add(post.weights[i]);
  }
  PushforwardCheck out;
  out.discrepancy.resize(post.p_hat.size());
  double denom = 1.0 - post.empty_cell_mass;
  for (std::size_t c = 0; c < post.p_hat.size(); ++c) {
    double want = cell_mass[c].value() > 0.0 || post.p_hat[c] > 0.0
                      ? post.p_hat[c] / denom
                      : 0.0;
    // cells that had observations but no samples were dropped: their target
    // under the renormalized posterior is 0 only if the cell stayed empty
    bool empty_cell = cell_mass[c].value() == 0.0 && post.p_hat[c] > 0.0;
    out.discrepancy[c] = empty_cell ? 0.0 : std::abs(cell_mass[c].value() - want);
    out.max_abs = std::max(out.max_abs, out.discrepancy[c]);
  }
  return out;
}

// Push the posterior through a different model of the same parameters and
// histogram the outcome; mass landing outside the target partition is
// reported as overflow rather than silently renormalized away.
inline CellProbabilities forecast_pushforward(const WeightedPosterior& post,
                                              const QoiModel& new_model,
                                              const PartitionD& partition2) {
  if (new_model.input_dim != post.samples.n_dim)
    throw config_error("forecast_pushforward: model input dimension mismatch");
  if (new_model.output_dim != partition2.dims())
    throw config_error("forecast_pushforward: model output dimension mismatch");
  CellProbabilities out;
  out.partition = partition2;
  out.source = "forecast";
  out.probs.assign(partition2.cells(), 0.0);
  NeumaierSum overflow;
  std::vector<double> q(new_model.output_dim);
  for (std::size_t i = 0; i < post.samples.size(); ++i) {
    new_model.eval(post.samples.point(i), q.data());
    std::int64_t c = partition2.cell_index(q.data());
    if (c < 0)
      overflow.add(post.weights[i]);
    else
      out.probs[static_cast<std::size_t>(c)] += post.weights[i];
  }
  out.overflow = overflow.value();
  return out;
}

// Plug-in differential entropy (nats) of the posterior on a uniform grid
// over the given parameter box: -sum P_c ln(P_c / vol_c), empty cells
// contributing zero.
inline double entropy_estimate(const WeightedPosterior& post,
                               const std::vector<std::size_t>& cells_per_dim,
                               const std::vector<std::pair<double, double>>& box) {
  if (cells_per_dim.size() != post.samples.n_dim || box.size() != cells_per_dim.size())
    throw config_error("entropy_estimate: grid must span the parameter space");
  PartitionD grid = build_uniform_partition(box, cells_per_dim);
  std::vector<double> mass(grid.cells(), 0.0);
  for (std::size_t i = 0; i < post.samples.size(); ++i) {
    std::int64_t c = grid.cell_index(post.samples.point(i));
    if (c >= 0) mass[static_cast<std::size_t>(c)] += post.weights[i];
  }
  NeumaierSum h;
  for (std::size_t c = 0; c < mass.size(); ++c)
    if (mass[c] > 0.0)
      h.add(-mass[c] * std::log(mass[c] / grid.cell_volume(static_cast<std::int64_t>(c))));
  return h.value();
}

// Total variation distance between probability vectors on identical layouts.
inline double tv_distance(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) throw config_error("tv_distance: shape mismatch");
  NeumaierSum s;
  for (std::size_t i = 0; i < a.size(); ++i) s.add(std::abs(a[i] - b[i]));
  return 0.5 * s.value();
}

inline double tv_distance(const CellProbabilities& a, const CellProbabilities& b) {
  if (!a.partition.same_as(b.partition))
    throw config_error("tv_distance: partitions differ");
  return tv_distance(a.probs, b.probs);
}

inline double tv_distance(const GridHeatmap& a, const GridHeatmap& b) {
  if (!a.grid.same_as(b.grid)) throw config_error("tv_distance: grids differ");
  return tv_distance(a.probs, b.probs);
}

// ---- result export -------------------------------------------------------

inline void write_posterior_csv(const std::string& path, const WeightedPosterior& post) {
  std::vector<std::string> header;
  for (std::size_t d = 0; d < post.samples.n_dim; ++d)
    header.push_back("lam_" + std::to_string(d + 1));
  for (std::size_t d = 0; d < post.samples.m_dim; ++d)
    header.push_back("q_" + std::to_string(d + 1));
  header.push_back("cell");
  header.push_back("weight");
  csv::Writer w(path, header);
  std::vector<double> row(header.size());
  for (std::size_t i = 0; i < post.samples.size(); ++i) {
    std::size_t k = 0;
    for (std::size_t d = 0; d < post.samples.n_dim; ++d)
      row[k++] = post.samples.point(i)[d];
    for (std::size_t d = 0; d < post.samples.m_dim; ++d)
      row[k++] = post.samples.qval(i)[d];
    row[k++] = static_cast<double>(post.cell_of[i]);
    row[k++] = post.weights[i];
    w.row_vec(row);
  }
  w.close();
}

// Minimal posterior reload: points and weights (enough to forecast or
// re-examine events from a finished run).
inline WeightedPosterior read_posterior_csv(const std::string& path) {
  csv::Table t = csv::read_table(path);
  std::size_t n_dim = 0, m_dim = 0;
  for (const auto& h : t.header) {
    if (h.rfind("lam_", 0) == 0) ++n_dim;
    else if (h.rfind("q_", 0) == 0) ++m_dim;
  }
  if (n_dim == 0 || t.header.size() != n_dim + m_dim + 2 ||
      t.header[n_dim + m_dim] != "cell" || t.header.back() != "weight")
    throw data_error("'" + path + "': not a posterior table");
  WeightedPosterior post;
  post.samples.n_dim = n_dim;
  post.samples.m_dim = m_dim;
  for (const auto& r : t.rows) {
    for (std::size_t d = 0; d < n_dim; ++d) post.samples.points.push_back(r[d]);
    for (std::size_t d = 0; d < m_dim; ++d) post.samples.qvals.push_back(r[n_dim + d]);
    post.cell_of.push_back(static_cast<std::int64_t>(r[n_dim + m_dim]));
    post.weights.push_back(r[n_dim + m_dim + 1]);
  }
  if (post.weights.empty()) throw data_error("'" + path + "': empty posterior");
  return post;
}

inline void write_heatmap_csv(const std::string& path, const GridHeatmap& hm) {
  csv::Writer w(path, {"i", "j", "lo_1", "hi_1", "lo_2", "hi_2", "prob"});
  std::size_t cols = hm.grid.cells_in_dim(1);
  double lo[2], hi[2];
  for (std::size_t c = 0; c < hm.probs.size(); ++c) {
    hm.grid.cell_bounds(static_cast<std::int64_t>(c), lo, hi);
    w.row(c / cols, c % cols, lo[0], hi[0], lo[1], hi[1], hm.probs[c]);
  }
  w.close();
}

// Portable graymap of the heatmap, cells scaled to the maximum probability;
// P2 is the plain-text variant, P5 the binary one.
inline void write_heatmap_pgm(const std::string& path, const GridHeatmap& hm,
                              bool binary) {
  std::size_t rows = hm.grid.cells_in_dim(0);
  std::size_t cols = hm.grid.cells_in_dim(1);
  double maxp = 0.0;
  for (double p : hm.probs) maxp = std::max(maxp, p);
  std::string payload;
  payload += binary ? "P5\n" : "P2\n";
  payload += std::to_string(cols) + " " + std::to_string(rows) + "\n255\n";
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      double p = hm.probs[r * cols + c];
      int v = maxp > 0.0 ? static_cast<int>(std::lround(255.0 * p / maxp)) : 0;
      if (binary) {
        payload.push_back(static_cast<char>(static_cast<unsigned char>(v)));
      } else {
        payload += std::to_string(v);
        payload.push_back(c + 1 < cols ? ' ' : '\n');
      }
    }
  }
  csv::Writer::write_atomic(path, payload);
}

inline void write_cell_probs_csv(const std::string& path, const CellProbabilities& cp) {
  std::size_t m = cp.partition.dims();
  std::vector<std::string> header{"cell_index"};
  for (std::size_t d = 0; d < m; ++d) header.push_back("lo_" + std::to_string(d + 1));
  for (std::size_t d = 0; d < m; ++d) header.push_back("hi_" + std::to_string(d + 1));
  header.push_back("prob");
  csv::Writer w(path, header);
  std::vector<double> lo(m), hi(m), row(header.size());
  for (std::size_t c = 0; c < cp.probs.size(); ++c) {
    cp.partition.cell_bounds(static_cast<std::int64_t>(c), lo.data(), hi.data());
    std::size_t k = 0;
    row[k++] = static_cast<double>(c);
    for (std::size_t d = 0; d < m; ++d) row[k++] = lo[d];
    for (std::size_t d = 0; d < m; ++d) row[k++] = hi[d];
    row[k++] = cp.probs[c];
    w.row_vec(row);
  }
  w.close();
}

} // namespace sip
