#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <string_view>
#include <vector>

#include "sip/errors.hpp"
#include "sip/model.hpp"

namespace sip {

namespace detail {

inline constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ull;

// SplitMix64 output mix; a bijection on 64-bit words.
inline std::uint64_t mix64(std::uint64_t z) {
  z ^= z >> 30;
  z *= 0xBF58476D1CE4E5B9ull;
  z ^= z >> 27;
  z *= 0x94D049BB133111EBull;
  z ^= z >> 31;
  return z;
}

inline std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xCBF29CE484222325ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001B3ull;
  }
  return h;
}

} // namespace detail

// Counter-based SplitMix64 stream. The i-th output depends only on
// (key, i), so streams can be split by name or index without any coupling
// between siblings, and a stream can be re-created cheaply anywhere.
class RandomStream {
public:
  RandomStream() : RandomStream(0, 0) {}
  RandomStream(std::uint64_t seed, std::uint64_t stream_id = 0)
      : seed_(seed),
        stream_id_(stream_id),
        key_(detail::mix64(detail::mix64(seed + detail::kGolden) ^
                           detail::mix64(stream_id * detail::kGolden + 1))),
        counter_(0) {}

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream_id() const { return stream_id_; }

  // Independent child stream derived from a label. Children with different
  // labels (or different parent keys) are unrelated streams.
  RandomStream substream(std::string_view name) const {
    RandomStream child = *this;
    child.key_ = detail::mix64(key_ ^ detail::fnv1a(name));
    child.counter_ = 0;
    return child;
  }

  RandomStream substream(std::uint64_t index) const {
    RandomStream child = *this;
    child.key_ = detail::mix64(key_ ^ detail::mix64((index + 1) * detail::kGolden));
    child.counter_ = 0;
    return child;
  }

  std::uint64_t next_u64() {
    ++counter_;
    return detail::mix64(key_ + counter_ * detail::kGolden);
  }

  // Uniform double in [0, 1) with 53 random bits.
  double next_unit() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // Uniform double in (0, 1].
  double next_unit_open() { return 1.0 - next_unit(); }

  // Standard normal via Box-Muller (cosine branch only, so each normal
  // consumes exactly two uniforms regardless of call pattern).
  double next_normal() {
    double u1 = next_unit_open();
    double u2 = next_unit();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925 * u2);
  }

  // Gamma(shape, 1) via Marsaglia-Tsang squeeze; shapes below one use the
  // boost Gamma(shape+1) * U^{1/shape}.
  double next_gamma(double shape) {
    if (!(shape > 0.0)) throw numeric_error("next_gamma: shape must be positive");
    if (shape < 1.0) {
      double u = next_unit_open();
      return next_gamma(shape + 1.0) * std::pow(u, 1.0 / shape);
    }
    double d = shape - 1.0 / 3.0;
    double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
      double x = next_normal();
      double t = 1.0 + c * x;
      if (t <= 0.0) continue;
      double v = t * t * t;
      double u = next_unit_open();
      double x2 = x * x;
      if (u < 1.0 - 0.0331 * x2 * x2) return d * v;
      if (std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) return d * v;
    }
  }

  // Beta(a, b) as a gamma ratio, clamped into the open interval.
  double next_beta(double a, double b) {
    double g1 = next_gamma(a);
    double g2 = next_gamma(b);
    double s = g1 + g2;
    if (s <= 0.0) return 0.5;
    double v = g1 / s;
    if (v <= 0.0) return std::numeric_limits<double>::min();
    if (v >= 1.0) return 1.0 - std::numeric_limits<double>::epsilon() / 2;
    return v;
  }

private:
  std::uint64_t seed_;
  std::uint64_t stream_id_;
  std::uint64_t key_;
  std::uint64_t counter_;
};

// N i.i.d. uniform draws from a box.
inline SampleSet sample_uniform_box(const ParameterSpace& space, std::size_t n,
                                    RandomStream& stream) {
  SampleSet out;
  out.n_dim = space.dim();
  out.points.resize(n * out.n_dim);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t d = 0; d < out.n_dim; ++d) {
      auto [lo, hi] = space.bounds[d];
      out.points[i * out.n_dim + d] = lo + (hi - lo) * stream.next_unit();
    }
  return out;
}

// N i.i.d. Beta(a, b) draws on (0, 1).
inline std::vector<double> sample_beta(double a, double b, std::size_t n,
                                       RandomStream& stream) {
  std::vector<double> out(n);
  for (auto& v : out) v = stream.next_beta(a, b);
  return out;
}

// N draws from a product of per-dimension Beta distributions mapped onto the
// box: dimension d is lo_d + (hi_d - lo_d) * Beta(a_d, b_d).
inline SampleSet sample_beta_product(const std::vector<std::pair<double, double>>& shapes,
                                     const ParameterSpace& space, std::size_t n,
                                     RandomStream& stream) {
  if (shapes.size() != space.dim())
    throw config_error("sample_beta_product: one (a, b) pair per dimension required");
  SampleSet out;
  out.n_dim = space.dim();
  out.points.resize(n * out.n_dim);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t d = 0; d < out.n_dim; ++d) {
      auto [lo, hi] = space.bounds[d];
      out.points[i * out.n_dim + d] =
          lo + (hi - lo) * stream.next_beta(shapes[d].first, shapes[d].second);
    }
  return out;
}

// N draws from a product of independent normals truncated to the box by
// rejection. A pilot run guards against effectively-zero acceptance.
inline SampleSet sample_normal_product(const std::vector<double>& means,
                                       const std::vector<double>& sds,
                                       const ParameterSpace& space, std::size_t n,
                                       RandomStream& stream) {
  std::size_t dim = space.dim();
  if (means.size() != dim || sds.size() != dim)
    throw config_error("sample_normal_product: means/sds must match box dimension");
  for (double s : sds)
    if (!(s > 0.0)) throw config_error("sample_normal_product: sds must be positive");

  auto draw_into = [&](double* p) -> bool {
    for (std::size_t d = 0; d < dim; ++d)
      p[d] = means[d] + sds[d] * stream.next_normal();
    return space.contains(p);
  };

  // Pilot: if 10^4 proposals all land outside the box, the acceptance rate
  // is below anything practical and the prior spec is degenerate.
  constexpr std::size_t kPilot = 10'000;
  std::vector<double> buf(dim);
  std::size_t pilot_hits = 0;
  std::vector<double> bank; // accepted pilot points, reused below
  bank.reserve(kPilot * dim / 4);
  for (std::size_t i = 0; i < kPilot; ++i)
    if (draw_into(buf.data())) {
      ++pilot_hits;
      bank.insert(bank.end(), buf.begin(), buf.end());
    }
  if (pilot_hits == 0)
    throw config_error(
        "sample_normal_product: degenerate prior, no pilot draw landed in the box");

  SampleSet out;
  out.n_dim = dim;
  out.points.reserve(n * dim);
  std::size_t reuse = std::min(n, pilot_hits);
  out.points.insert(out.points.end(), bank.begin(), bank.begin() + reuse * dim);
  std::size_t have = reuse;
  while (have < n) {
    if (draw_into(buf.data())) {
      out.points.insert(out.points.end(), buf.begin(), buf.end());
      ++have;
    }
  }
  return out;
}

// Affine map of values from (0, 1) onto (lo, hi).
inline std::vector<double> shift_scale(const std::vector<double>& values,
                                       double lo, double hi) {
  if (!(lo < hi)) throw config_error("shift_scale: need lo < hi");
  std::vector<double> out(values.size());
  for (std::size_t i = 0; i < values.size(); ++i)
    out[i] = lo + (hi - lo) * values[i];
  return out;
}

} // namespace sip
