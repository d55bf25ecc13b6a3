#pragma once

#include <cstdint>
#include <vector>

#include "sip/errors.hpp"
#include "sip/partition.hpp"
#include "sip/posterior.hpp"
#include "sip/rng.hpp"

namespace sip {

// Per-cell update ratios between observed-data probabilities and the prior
// pushforward, plus their maximum C (the accept-reject envelope).
struct RatioTable {
  std::vector<double> ratios;     // data / pushforward per cell; 0 where undefined
  double C = 0.0;                 // max ratio
  double unreachable_mass = 0.0;  // observed mass in cells the prior never hits
};

inline RatioTable cell_ratio_table(const CellProbabilities& data_probs,
                                   const CellProbabilities& prior_push) {
  if (!data_probs.partition.same_as(prior_push.partition))
    throw config_error("cell_ratio_table: partitions differ");
  RatioTable t;
  t.ratios.assign(data_probs.probs.size(), 0.0);
  NeumaierSum unreachable;
  for (std::size_t c = 0; c < t.ratios.size(); ++c) {
    double data = data_probs.probs[c];
    double push = prior_push.probs[c];
    if (push > 0.0) {
      t.ratios[c] = data / push;
      t.C = std::max(t.C, t.ratios[c]);
    } else if (data > 0.0) {
      unreachable.add(data);
    }
  }
  t.unreachable_mass = unreachable.value();
  if (!(t.C > 0.0))
    throw data_error("cell_ratio_table: all ratios are zero (degenerate data)");
  return t;
}

// Histogram pushforward of a sample batch's model outputs on a partition
// (counts over the total batch size, so samples leaving the box shed mass).
inline CellProbabilities sample_pushforward(const SampleSet& samples,
                                            const PartitionD& partition) {
  if (samples.m_dim != partition.dims())
    throw config_error("sample_pushforward: dimension mismatch");
  if (samples.size() == 0) throw config_error("sample_pushforward: empty sample");
  CellProbabilities out;
  out.partition = partition;
  out.source = "pushforward";
  out.probs.assign(partition.cells(), 0.0);
  for (std::size_t i = 0; i < samples.size(); ++i) {
    std::int64_t c = partition.cell_index(samples.qval(i));
    if (c >= 0) out.probs[static_cast<std::size_t>(c)] += 1.0;
  }
  for (auto& p : out.probs) p /= static_cast<double>(samples.size());
  return out;
}

struct AcceptRejectResult {
  SampleSet accepted;
  std::vector<std::uint8_t> mask; // 1 where the proposal was kept
  std::size_t accept_count = 0;
  double acceptance_rate = 0.0;
  RatioTable table;
};

// Thin the prior sample into an approximately posterior-distributed subset:
// sample k survives iff its own uniform draw is at most ratio(cell)/C.
// Each proposal consumes exactly one substream keyed by its index, so a
// sample's fate depends only on its own cell and draw, never on neighbors.
inline AcceptRejectResult run_accept_reject(const SampleSet& prior,
                                            const CellProbabilities& data_probs,
                                            const RandomStream& stream) {
  if (prior.size() == 0) throw config_error("run_accept_reject: empty prior");
  const PartitionD& partition = data_probs.partition;
  if (prior.m_dim != partition.dims())
    throw config_error("run_accept_reject: output dimension mismatch");

  AcceptRejectResult res;
  res.table = cell_ratio_table(data_probs, sample_pushforward(prior, partition));

  const std::size_t n = prior.size();
  res.mask.assign(n, 0);
  res.accepted.n_dim = prior.n_dim;
  res.accepted.m_dim = prior.m_dim;
  for (std::size_t k = 0; k < n; ++k) {
    std::int64_t c = partition.cell_index(prior.qval(k));
    double ratio = c >= 0 ? res.table.ratios[static_cast<std::size_t>(c)] : 0.0;
    RandomStream sub = stream.substream(static_cast<std::uint64_t>(k));
    double xi = sub.next_unit();
    if (ratio > 0.0 && xi <= ratio / res.table.C) {
      res.mask[k] = 1;
      ++res.accept_count;
      res.accepted.points.insert(res.accepted.points.end(), prior.point(k),
                                 prior.point(k) + prior.n_dim);
      res.accepted.qvals.insert(res.accepted.qvals.end(), prior.qval(k),
                                prior.qval(k) + prior.m_dim);
    }
  }
  res.acceptance_rate = static_cast<double>(res.accept_count) / static_cast<double>(n);
  return res;
}

// Wrap an accepted (or otherwise equally weighted) sample as a posterior so
// the posterior-side diagnostics apply to it directly.
inline WeightedPosterior make_uniform_posterior(SampleSet samples,
                                                const CellProbabilities& reference) {
  if (samples.size() == 0) throw config_error("make_uniform_posterior: empty sample");
  WeightedPosterior post;
  post.partition = reference.partition;
  post.p_hat = reference.probs;
  post.samples = std::move(samples);
  const std::size_t n = post.samples.size();
  post.cell_of.resize(n);
  for (std::size_t i = 0; i < n; ++i)
    post.cell_of[i] = post.partition.cell_index(post.samples.qval(i));
  post.weights.assign(n, 1.0 / static_cast<double>(n));
  return post;
}

} // namespace sip
