// Accept-reject resampling of the prior: per-cell update ratios, the
// acceptance envelope, per-sample independence, conditional acceptance
// rates, and agreement with the reweighting estimator.
#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <vector>

#include "sip/accept_reject.hpp"
#include "sip/data_io.hpp"
#include "sip/model.hpp"
#include "sip/posterior.hpp"
#include "sip/rng.hpp"

using namespace sip;

namespace {

SampleSet uniform_prior_samples(std::size_t n, std::uint64_t seed, std::uint64_t id) {
  ParameterSpace unit_square{{{0.0, 1.0}, {0.0, 1.0}}};
  RandomStream stream(seed, id);
  SampleSet s = sample_uniform_box(unit_square, n, stream);
  eval_model(s, make_model("exp-decay", {{"t_end", 2.0}}));
  return s;
}

CellProbabilities synthetic_data_probs(std::size_t k, std::size_t cells, RandomStream stream) {
  RandomStream s1 = stream.substream("lam1");
  RandomStream s2 = stream.substream("lam2");
  ObservedData obs;
  obs.m = 1;
  obs.d_bounds = {{0.0, 1.0}};
  obs.values.resize(k);
  for (std::size_t i = 0; i < k; ++i)
    obs.values[i] = eval_exp_decay(s1.next_beta(12.0, 12.0), s2.next_beta(12.0, 12.0), 2.0);
  return histogram_probs(obs, build_uniform_partition({{0.0, 1.0}}, {cells}));
}

CellProbabilities probs_on(const PartitionD& partition, std::vector<double> probs,
                           const std::string& source = "histogram") {
  CellProbabilities cp;
  cp.partition = partition;
  cp.probs = std::move(probs);
  cp.source = source;
  return cp;
}

// One-dimensional sample batch whose outputs are placed explicitly.
SampleSet samples_at(const std::vector<std::pair<double, std::size_t>>& placement) {
  SampleSet s;
  s.n_dim = 1;
  s.m_dim = 1;
  for (const auto& [q, copies] : placement)
    for (std::size_t i = 0; i < copies; ++i) {
      s.points.push_back(q);
      s.qvals.push_back(q);
    }
  return s;
}

}  // namespace

TEST_CASE("cell ratio tables", "[accept-reject]") {
  auto partition = build_uniform_partition({{0.0, 1.0}}, {2});

  SECTION("matching distributions give unit ratios") {
    auto t = cell_ratio_table(probs_on(partition, {0.4, 0.6}),
                              probs_on(partition, {0.4, 0.6}));
    REQUIRE(t.ratios == std::vector<double>{1.0, 1.0});
    REQUIRE(t.C == 1.0);
    REQUIRE(t.unreachable_mass == 0.0);
  }

  SECTION("direct division and envelope") {
    auto t = cell_ratio_table(probs_on(partition, {0.5, 0.5}),
                              probs_on(partition, {0.25, 0.75}));
    REQUIRE(t.ratios[0] == Catch::Approx(2.0).epsilon(1e-15));
    REQUIRE(t.ratios[1] == Catch::Approx(2.0 / 3.0).epsilon(1e-15));
    REQUIRE(t.C == Catch::Approx(2.0).epsilon(1e-15));
  }

  SECTION("parity example quantities") {
    auto t = cell_ratio_table(probs_on(partition, {0.34, 0.66}),
                              probs_on(partition, {4.0 / 9.0, 5.0 / 9.0}));
    REQUIRE(t.ratios[0] == Catch::Approx(0.765).margin(1e-12));
    REQUIRE(t.ratios[1] == Catch::Approx(1.188).margin(1e-12));
    REQUIRE(t.C == Catch::Approx(1.188).margin(1e-12));
  }

  SECTION("mass the prior cannot reach is tallied") {
    auto part3 = build_uniform_partition({{0.0, 1.0}}, {3});
    auto t = cell_ratio_table(probs_on(part3, {0.2, 0.3, 0.5}),
                              probs_on(part3, {0.5, 0.5, 0.0}));
    REQUIRE(t.ratios[0] == Catch::Approx(0.4).epsilon(1e-15));
    REQUIRE(t.ratios[1] == Catch::Approx(0.6).epsilon(1e-15));
    REQUIRE(t.ratios[2] == 0.0);
    REQUIRE(t.unreachable_mass == Catch::Approx(0.5).epsilon(1e-15));
    REQUIRE(t.C == Catch::Approx(0.6).epsilon(1e-15));
  }

  SECTION("degenerate data") {
    REQUIRE_THROWS_AS(cell_ratio_table(probs_on(partition, {0.0, 1.0}),
                                       probs_on(partition, {1.0, 0.0})),
                      data_error);
  }

  SECTION("partitions must match") {
    auto other = build_uniform_partition({{0.0, 2.0}}, {2});
    REQUIRE_THROWS_AS(cell_ratio_table(probs_on(partition, {0.5, 0.5}),
                                       probs_on(other, {0.5, 0.5})),
                      config_error);
  }

  SECTION("the envelope dominates every ratio") {
    auto data = synthetic_data_probs(20'000, 40, RandomStream(10u, 1u));
    auto samples = uniform_prior_samples(30'000, 10u, 2u);
    auto t = cell_ratio_table(data, sample_pushforward(samples, data.partition));
    for (double r : t.ratios) REQUIRE(r <= t.C);
  }
}

TEST_CASE("sample pushforward histograms outputs and sheds outside mass", "[accept-reject]") {
  auto partition = build_uniform_partition({{0.0, 1.0}}, {4});
  auto s = samples_at({{0.1, 2}, {0.3, 1}, {0.6, 4}, {0.9, 1}});
  auto push = sample_pushforward(s, partition);
  REQUIRE(push.probs == std::vector<double>{0.25, 0.125, 0.5, 0.125});

  auto t = samples_at({{0.1, 3}, {1.7, 1}});  // one output beyond the box
  auto push2 = sample_pushforward(t, partition);
  REQUIRE(push2.probs[0] == 0.75);
  REQUIRE(push2.probs[1] + push2.probs[2] + push2.probs[3] == 0.0);
}

TEST_CASE("unit ratios accept every proposal", "[accept-reject]") {
  auto samples = uniform_prior_samples(5'000, 321u, 1u);
  auto partition = build_uniform_partition({{0.0, 1.0}}, {20});
  auto data = sample_pushforward(samples, partition);
  auto res = run_accept_reject(samples, data, RandomStream(321u, 9u));
  REQUIRE(res.accept_count == samples.size());
  REQUIRE(res.acceptance_rate == 1.0);
  REQUIRE(res.table.C == 1.0);
  REQUIRE(std::all_of(res.mask.begin(), res.mask.end(), [](auto m) { return m == 1; }));
}

TEST_CASE("a sample's fate ignores its neighbors", "[accept-reject]") {
  auto samples = uniform_prior_samples(200, 654u, 2u);
  auto data = synthetic_data_probs(50'000, 10, RandomStream(654u, 3u));
  RandomStream ar(654u, 4u);
  auto res = run_accept_reject(samples, data, ar);

  // Swap two samples that sit in different data cells, leaving all other
  // indices untouched.
  const std::size_t i = 3, j = 117;
  REQUIRE(data.partition.cell_index(samples.qval(i)) !=
          data.partition.cell_index(samples.qval(j)));
  SampleSet swapped = samples;
  std::swap_ranges(swapped.points.begin() + static_cast<std::ptrdiff_t>(i * 2),
                   swapped.points.begin() + static_cast<std::ptrdiff_t>(i * 2 + 2),
                   swapped.points.begin() + static_cast<std::ptrdiff_t>(j * 2));
  std::swap(swapped.qvals[i], swapped.qvals[j]);

  auto res2 = run_accept_reject(swapped, data, ar);
  for (std::size_t k = 0; k < samples.size(); ++k) {
    if (k == i || k == j) continue;
    REQUIRE(res2.mask[k] == res.mask[k]);
  }
}

TEST_CASE("per-cell acceptance rates match ratio/C binomially", "[accept-reject]") {
  constexpr std::size_t kPerCell = 100'000;
  auto samples = samples_at({{0.5, kPerCell}, {1.5, kPerCell}, {2.5, kPerCell}});
  auto partition = build_uniform_partition({{0.0, 3.0}}, {3});
  auto data = probs_on(partition, {0.2, 0.3, 0.5});
  auto res = run_accept_reject(samples, data, RandomStream(13u, 5u));

  REQUIRE(res.table.C == Catch::Approx(1.5).epsilon(1e-14));
  const double want[3] = {0.4, 0.6, 1.0};
  std::size_t got[3] = {0, 0, 0};
  for (std::size_t k = 0; k < res.mask.size(); ++k)
    got[k / kPerCell] += res.mask[k];
  // The envelope cell is deterministic: xi < 1 always accepts.
  REQUIRE(got[2] == kPerCell);
  for (int c = 0; c < 2; ++c) {
    const double sigma = std::sqrt(want[c] * (1.0 - want[c]) / kPerCell);
    REQUIRE(static_cast<double>(got[c]) / kPerCell ==
            Catch::Approx(want[c]).margin(3.0 * sigma));
  }

  // Overall rate agrees with the expected-rate identity sum(push*ratio)/C.
  double expected = 0.0;
  auto push = sample_pushforward(samples, partition);
  for (std::size_t c = 0; c < 3; ++c)
    expected += push.probs[c] * res.table.ratios[c] / res.table.C;
  const double sigma_all = std::sqrt(expected * (1.0 - expected) / (3.0 * kPerCell));
  REQUIRE(res.acceptance_rate == Catch::Approx(expected).margin(3.0 * sigma_all));
}

TEST_CASE("rescaling both pmfs leaves every decision unchanged", "[accept-reject]") {
  auto samples = uniform_prior_samples(10'000, 777u, 7u);
  auto data = synthetic_data_probs(100'000, 25, RandomStream(777u, 8u));
  auto res = run_accept_reject(samples, data, RandomStream(777u, 9u));

  // run_accept_reject derives the pushforward internally from the prior, so
  // scale the data side only through the ratio-table path.
  CellProbabilities scaled = data;
  for (double& p : scaled.probs) p *= 3.7;
  auto res2 = run_accept_reject(samples, scaled, RandomStream(777u, 9u));
  REQUIRE(res.mask == res2.mask);
  REQUIRE(res.accept_count == res2.accept_count);

  auto push = sample_pushforward(samples, data.partition);
  auto t = cell_ratio_table(data, push);
  CellProbabilities push_scaled = push;
  for (double& p : push_scaled.probs) p *= 3.7;
  auto t2 = cell_ratio_table(scaled, push_scaled);
  for (std::size_t c = 0; c < t.ratios.size(); ++c)
    REQUIRE(t2.ratios[c] == Catch::Approx(t.ratios[c]).epsilon(1e-14));
}

TEST_CASE("same stream reruns identically, another stream differs", "[accept-reject]") {
  auto samples = uniform_prior_samples(20'000, 11u, 3u);
  auto data = synthetic_data_probs(100'000, 50, RandomStream(11u, 4u));
  auto a = run_accept_reject(samples, data, RandomStream(11u, 5u));
  auto b = run_accept_reject(samples, data, RandomStream(11u, 5u));
  REQUIRE(a.mask == b.mask);
  REQUIRE(a.accepted.points == b.accepted.points);
  auto c = run_accept_reject(samples, data, RandomStream(11u, 6u));
  REQUIRE(a.mask != c.mask);
}

TEST_CASE("reported configuration reproduces the acceptance rate", "[accept-reject]") {
  // 10^6 synthetic observations, 100 cells, 40,000 uniform proposals.
  auto data = synthetic_data_probs(1'000'000, 100, RandomStream(8675309u, 1u));
  auto samples = uniform_prior_samples(40'000, 8675309u, 2u);
  auto res = run_accept_reject(samples, data, RandomStream(8675309u, 3u));
  REQUIRE(res.acceptance_rate == Catch::Approx(0.267).margin(0.03));
}

TEST_CASE("accept-reject and reweighting estimate the same posterior", "[accept-reject]") {
  auto data = synthetic_data_probs(1'000'000, 100, RandomStream(8675309u, 1u));
  auto samples = uniform_prior_samples(1'000'000, 8675309u, 4u);
  auto res = run_accept_reject(samples, data, RandomStream(8675309u, 5u));
  REQUIRE(res.accept_count > 100'000);

  auto accepted_post = make_uniform_posterior(res.accepted, data);
  REQUIRE(event_probability(accepted_post, {{0.0, 1.0}, {0.0, 1.0}}) ==
          Catch::Approx(1.0).margin(1e-12));

  // Resampling error against the observed pmf stays within the multinomial
  // band at this sample size.
  REQUIRE(pushforward_check(accepted_post, data.partition).max_abs <= 0.02);

  auto hist = marginal_heatmap(accepted_post, 0, 1, 80, 80, {0.0, 1.0}, {0.0, 1.0});
  auto post = compute_weights(std::move(samples), data);
  auto weighted = marginal_heatmap(post, 0, 1, 80, 80, {0.0, 1.0}, {0.0, 1.0});
  REQUIRE(tv_distance(hist, weighted) <= 0.05);
}
