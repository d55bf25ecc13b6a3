#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "sip/errors.hpp"
#include "sip/parallel.hpp"

namespace sip {

// Axis-aligned box of admissible parameter values.
struct ParameterSpace {
  std::vector<std::pair<double, double>> bounds;

  ParameterSpace() = default;
  explicit ParameterSpace(std::vector<std::pair<double, double>> b)
      : bounds(std::move(b)) {
    for (auto [lo, hi] : bounds)
      if (!(lo < hi))
        throw config_error("ParameterSpace: each bound must satisfy lo < hi");
  }

  std::size_t dim() const { return bounds.size(); }

  bool contains(const double* p) const {
    for (std::size_t d = 0; d < bounds.size(); ++d)
      if (p[d] < bounds[d].first || p[d] > bounds[d].second) return false;
    return true;
  }

  double volume() const {
    double v = 1.0;
    for (auto [lo, hi] : bounds) v *= hi - lo;
    return v;
  }
};

// A batch of parameter points, optionally with model outputs attached.
// points is row-major size() x n_dim; qvals row-major size() x m_dim
// (empty until a model has been evaluated on the batch).
struct SampleSet {
  std::size_t n_dim = 0;
  std::size_t m_dim = 0;
  std::vector<double> points;
  std::vector<double> qvals;

  std::size_t size() const { return n_dim ? points.size() / n_dim : 0; }
  const double* point(std::size_t i) const { return points.data() + i * n_dim; }
  double* point(std::size_t i) { return points.data() + i * n_dim; }
  const double* qval(std::size_t i) const { return qvals.data() + i * m_dim; }
  double* qval(std::size_t i) { return qvals.data() + i * m_dim; }
};

// Deterministic map from parameters to observable quantities, together with
// its admissible domain and the box the outputs are known to land in.
struct QoiModel {
  std::string name;
  std::size_t input_dim = 0;
  std::size_t output_dim = 0;
  ParameterSpace domain;
  std::vector<std::pair<double, double>> output_bounds;
  std::function<void(const double*, double*)> eval_fn;

  void eval(const double* lam, double* q) const { eval_fn(lam, q); }
};

// ---- built-in forward maps --------------------------------------------

// q = lam1 * exp(-lam2 * t_end): remaining fraction after exponential decay.
inline double eval_exp_decay(double lam1, double lam2, double t_end) {
  return lam1 * std::exp(-lam2 * t_end);
}

// Impact time for a ball released at height h0 (meters) with initial upward
// velocity v0 (m/s) under constant gravity g, ignoring drag: the positive
// root of -g t^2 / 2 + v0 t + h0 = 0.
inline double eval_free_fall(double h0, double v0, double g) {
  if (!(h0 > 0.0) || !(g > 0.0))
    throw config_error("eval_free_fall: height and gravity must be positive");
  return (v0 + std::sqrt(v0 * v0 + 2.0 * g * h0)) / g;
}

// Distance from the origin in the plane.
inline double eval_disk_radius(double x, double y) {
  return std::sqrt(x * x + y * y);
}

// Label-sum parity indicator: 0 when lam1 + lam2 is odd, 1 when even.
inline int eval_discrete_parity(int lam1, int lam2) {
  if (lam1 < 1 || lam1 > 3 || lam2 < 1 || lam2 > 3)
    throw config_error("eval_discrete_parity: labels must lie in {1,2,3}");
  return (lam1 + lam2) % 2 == 0 ? 1 : 0;
}

// ---- model registry ----------------------------------------------------

// Built-in models by name. `constants` carries model-specific scalars
// (exp-decay needs "t_end"); unknown names or missing constants are
// configuration errors.
inline QoiModel make_model(const std::string& name,
                           const std::map<std::string, double>& constants = {}) {
  auto need = [&](const char* key) {
    auto it = constants.find(key);
    if (it == constants.end())
      throw config_error("model '" + name + "': missing constant '" + key + "'");
    return it->second;
  };

  QoiModel m;
  m.name = name;
  if (name == "exp-decay") {
    double t_end = need("t_end");
    if (!(t_end > 0.0)) throw config_error("exp-decay: t_end must be positive");
    m.input_dim = 2;
    m.output_dim = 1;
    m.domain = ParameterSpace({{0.0, 1.0}, {0.0, 1.0}});
    m.output_bounds = {{0.0, 1.0}};
    m.eval_fn = [t_end](const double* lam, double* q) {
      q[0] = eval_exp_decay(lam[0], lam[1], t_end);
    };
  } else if (name == "free-fall") {
    m.input_dim = 3;
    m.output_dim = 1;
    m.domain = ParameterSpace({{27.0, 43.0}, {-1.0, 1.0}, {8.8, 10.8}});
    m.output_bounds = {{0.0, 6.0}};
    m.eval_fn = [](const double* lam, double* q) {
      q[0] = eval_free_fall(lam[0], lam[1], lam[2]);
    };
  } else if (name == "disk-radius") {
    m.input_dim = 2;
    m.output_dim = 1;
    m.domain = ParameterSpace({{-1.0, 1.0}, {-1.0, 1.0}});
    m.output_bounds = {{0.0, std::sqrt(2.0)}};
    m.eval_fn = [](const double* lam, double* q) {
      q[0] = eval_disk_radius(lam[0], lam[1]);
    };
  } else if (name == "discrete-parity") {
    m.input_dim = 2;
    m.output_dim = 1;
    m.domain = ParameterSpace({{1.0, 3.0}, {1.0, 3.0}});
    m.output_bounds = {{0.0, 2.0}};
    m.eval_fn = [](const double* lam, double* q) {
      q[0] = static_cast<double>(eval_discrete_parity(
          static_cast<int>(std::lround(lam[0])), static_cast<int>(std::lround(lam[1]))));
    };
  } else {
    throw config_error("unknown model '" + name + "'");
  }
  return m;
}

// Evaluate the model on every point of a batch (deterministic under any
// thread count) and attach the outputs.
inline void eval_model(SampleSet& samples, const QoiModel& model,
                       unsigned threads = 0) {
  if (samples.n_dim != model.input_dim)
    throw config_error("eval_model: sample dimension does not match model input");
  samples.m_dim = model.output_dim;
  samples.qvals.assign(samples.size() * samples.m_dim, 0.0);
  parallel_for(
      samples.size(),
      [&](std::size_t b, std::size_t e, std::size_t) {
        for (std::size_t i = b; i < e; ++i)
          model.eval(samples.point(i), samples.qval(i));
      },
      threads);
}

// Central finite-difference Jacobian, row-major output_dim x input_dim.
// The stencil must stay inside the model domain.
inline std::vector<double> jacobian_fd(const QoiModel& model, const double* lam,
                                       double h = 1e-6) {
  if (!(h > 0.0)) throw config_error("jacobian_fd: step must be positive");
  for (std::size_t d = 0; d < model.input_dim; ++d) {
    auto [lo, hi] = model.domain.bounds[d];
    if (lam[d] - h < lo || lam[d] + h > hi)
      throw config_error("jacobian_fd: stencil leaves the model domain");
  }
  std::vector<double> jac(model.output_dim * model.input_dim);
  std::vector<double> x(lam, lam + model.input_dim);
  std::vector<double> qp(model.output_dim), qm(model.output_dim);
  for (std::size_t d = 0; d < model.input_dim; ++d) {
    double keep = x[d];
    x[d] = keep + h;
    model.eval(x.data(), qp.data());
    x[d] = keep - h;
    model.eval(x.data(), qm.data());
    x[d] = keep;
    for (std::size_t r = 0; r < model.output_dim; ++r)
      jac[r * model.input_dim + d] = (qp[r] - qm[r]) / (2.0 * h);
  }
  return jac;
}

} // namespace sip
