#pragma once

// Run-configuration schema (version 1) for the command-line driver, plus the
// run manifest every subcommand writes before its first result file.
//
// Parsing is strict: an unknown key anywhere in the document is a hard error,
// so a typo can never silently fall back to a default. Every value is
// type-checked and reported with its full key path ("$.prior.shapes[1]").
//
// This header depends on the bundled json.hpp; the estimator headers do not.

#include <array>
#include <chrono>
#include <cstdint>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"

#include "sip/csv.hpp"
#include "sip/errors.hpp"
#include "sip/experiments.hpp"
#include "sip/version.hpp"

namespace sip {

inline constexpr int kConfigSchemaVersion = 1;

namespace cfgdetail {

using nlohmann::json;

inline const json* find(const json& j, std::string_view key) {
  auto it = j.find(key);
  return it == j.end() ? nullptr : &*it;
}

inline const json& require(const json& j, std::string_view key, const std::string& where) {
  const json* v = find(j, key);
  if (!v)
    throw config_error("config: missing required key '" + where + "." + std::string(key) + "'");
  return *v;
}

inline void require_object(const json& j, const std::string& where) {
  if (!j.is_object())
    throw config_error("config: '" + where + "' must be an object, got " + j.type_name());
}

inline void reject_unknown(const json& j, const std::string& where,
                           std::initializer_list<std::string_view> allowed) {
  for (const auto& [key, value] : j.items()) {
    bool known = false;
    for (std::string_view a : allowed) known = known || key == a;
    if (!known) throw config_error("config: unknown key '" + where + "." + key + "'");
  }
}

inline double get_number(const json& j, const std::string& where) {
  if (!j.is_number())
    throw config_error("config: '" + where + "' must be a number, got " + j.type_name());
  return j.get<double>();
}

inline std::uint64_t get_u64(const json& j, const std::string& where) {
  if (!j.is_number_unsigned())
    throw config_error("config: '" + where + "' must be a non-negative integer, got " +
                       std::string(j.type_name()));
  return j.get<std::uint64_t>();
}

inline std::size_t get_count(const json& j, const std::string& where) {
  std::uint64_t v = get_u64(j, where);
  if (v == 0) throw config_error("config: '" + where + "' must be positive");
  return static_cast<std::size_t>(v);
}

inline std::string get_string(const json& j, const std::string& where) {
  if (!j.is_string())
    throw config_error("config: '" + where + "' must be a string, got " + j.type_name());
  return j.get<std::string>();
}

inline std::vector<double> get_number_array(const json& j, const std::string& where) {
  if (!j.is_array())
    throw config_error("config: '" + where + "' must be an array, got " + j.type_name());
  std::vector<double> out;
  for (std::size_t i = 0; i < j.size(); ++i)
    out.push_back(get_number(j[i], where + "[" + std::to_string(i) + "]"));
  return out;
}

inline std::vector<std::size_t> get_count_array(const json& j, const std::string& where) {
  if (!j.is_array())
    throw config_error("config: '" + where + "' must be an array, got " + j.type_name());
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < j.size(); ++i)
    out.push_back(get_count(j[i], where + "[" + std::to_string(i) + "]"));
  return out;
}

// Array of [lo, hi] pairs, e.g. an event box or per-dimension Beta shapes.
inline std::vector<std::pair<double, double>> get_pair_array(const json& j,
                                                             const std::string& where) {
  if (!j.is_array())
    throw config_error("config: '" + where + "' must be an array, got " + j.type_name());
  std::vector<std::pair<double, double>> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const std::string at = where + "[" + std::to_string(i) + "]";
    if (!j[i].is_array() || j[i].size() != 2)
      throw config_error("config: '" + at + "' must be a pair [a, b]");
    out.emplace_back(get_number(j[i][0], at + "[0]"), get_number(j[i][1], at + "[1]"));
  }
  return out;
}

}  // namespace cfgdetail

// ---------------------------------------------------------------------------
// Schema blocks shared across subcommands.

struct ModelSpec {
  std::string name;
  std::map<std::string, double> constants;
};

inline ModelSpec parse_model_spec(const nlohmann::json& j, const std::string& where) {
  using namespace cfgdetail;
  require_object(j, where);
  reject_unknown(j, where, {"name", "constants"});
  ModelSpec m;
  m.name = get_string(require(j, "name", where), where + ".name");
  if (const auto* c = find(j, "constants")) {
    require_object(*c, where + ".constants");
    for (const auto& [key, value] : c->items())
      m.constants[key] = get_number(value, where + ".constants." + key);
  }
  return m;
}

// Where the observed-output estimate comes from:
//   "file"       load rows from a CSV of observed outputs
//   "synthetic"  draw parameters from a Beta(alpha, beta) product over the
//                model domain and push them through the model
//   "pmf"        explicit cell probabilities over the configured partition
struct DataSpec {
  std::string source;
  std::string path;                     // file
  double alpha = 12.0;                  // synthetic
  double beta = 12.0;                   // synthetic
  std::size_t count = 200'000;          // synthetic
  std::string estimator = "histogram";  // "histogram" | "kde" | "parametric"
  double bandwidth = 0.0;               // kde only; 0 = Silverman's rule
  std::vector<double> probs;            // pmf
};

inline DataSpec parse_data_spec(const nlohmann::json& j, const std::string& where) {
  using namespace cfgdetail;
  require_object(j, where);
  DataSpec d;
  d.source = get_string(require(j, "source", where), where + ".source");
  if (d.source == "file") {
    reject_unknown(j, where, {"source", "path", "estimator", "bandwidth"});
    d.path = get_string(require(j, "path", where), where + ".path");
  } else if (d.source == "synthetic") {
    reject_unknown(j, where, {"source", "alpha", "beta", "count", "estimator", "bandwidth"});
    if (const auto* v = find(j, "alpha")) d.alpha = get_number(*v, where + ".alpha");
    if (const auto* v = find(j, "beta")) d.beta = get_number(*v, where + ".beta");
    if (const auto* v = find(j, "count")) d.count = get_count(*v, where + ".count");
    if (!(d.alpha > 0.0) || !(d.beta > 0.0))
      throw config_error("config: '" + where + "' Beta shapes must be positive");
  } else if (d.source == "pmf") {
    reject_unknown(j, where, {"source", "probs"});
    d.probs = get_number_array(require(j, "probs", where), where + ".probs");
    if (d.probs.empty()) throw config_error("config: '" + where + ".probs' must be non-empty");
    for (double p : d.probs)
      if (!(p >= 0.0))
        throw config_error("config: '" + where + ".probs' entries must be non-negative");
  } else {
    throw config_error("config: '" + where + ".source' must be one of file|synthetic|pmf, got '" +
                       d.source + "'");
  }
  if (const auto* v = find(j, "estimator")) d.estimator = get_string(*v, where + ".estimator");
  if (d.estimator != "histogram" && d.estimator != "kde" && d.estimator != "parametric")
    throw config_error("config: '" + where +
                       ".estimator' must be one of histogram|kde|parametric, got '" + d.estimator +
                       "'");
  if (const auto* v = find(j, "bandwidth")) {
    d.bandwidth = get_number(*v, where + ".bandwidth");
    if (!(d.bandwidth > 0.0))
      throw config_error("config: '" + where + ".bandwidth' must be positive");
    if (d.estimator != "kde")
      throw config_error("config: '" + where + ".bandwidth' only applies to the kde estimator");
  }
  return d;
}

// Prior sample over the model's parameter box:
//   "uniform"  count i.i.d. uniform draws
//   "beta"     count draws from a per-dimension Beta product, affinely mapped
//   "normal"   count draws from a truncated per-dimension normal product
//   "lattice"  the inclusive points_per_dim^n grid, equal mass, no randomness
struct PriorSpec {
  std::string kind = "uniform";
  std::size_t count = 100'000;
  std::vector<std::pair<double, double>> shapes;  // beta: (alpha, beta) per dim
  std::vector<double> means;                      // normal
  std::vector<double> sds;                        // normal
  std::size_t points_per_dim = 0;                 // lattice
};

inline PriorSpec parse_prior_spec(const nlohmann::json& j, const std::string& where) {
  using namespace cfgdetail;
  require_object(j, where);
  PriorSpec p;
  p.kind = get_string(require(j, "kind", where), where + ".kind");
  if (p.kind == "uniform") {
    reject_unknown(j, where, {"kind", "count"});
  } else if (p.kind == "beta") {
    reject_unknown(j, where, {"kind", "count", "shapes"});
    p.shapes = get_pair_array(require(j, "shapes", where), where + ".shapes");
    for (const auto& [a, b] : p.shapes)
      if (!(a > 0.0) || !(b > 0.0))
        throw config_error("config: '" + where + ".shapes' entries must be positive");
  } else if (p.kind == "normal") {
    reject_unknown(j, where, {"kind", "count", "means", "sds"});
    p.means = get_number_array(require(j, "means", where), where + ".means");
    p.sds = get_number_array(require(j, "sds", where), where + ".sds");
    if (p.means.size() != p.sds.size())
      throw config_error("config: '" + where + "' means and sds must have equal length");
    for (double s : p.sds)
      if (!(s > 0.0)) throw config_error("config: '" + where + ".sds' entries must be positive");
  } else if (p.kind == "lattice") {
    reject_unknown(j, where, {"kind", "points_per_dim"});
    p.points_per_dim =
        get_count(require(j, "points_per_dim", where), where + ".points_per_dim");
  } else {
    throw config_error("config: '" + where +
                       ".kind' must be one of uniform|beta|normal|lattice, got '" + p.kind + "'");
  }
  if (const auto* v = find(j, "count")) p.count = get_count(*v, where + ".count");
  return p;
}

// Output-space partition: cells per output dimension (a bare integer is
// shorthand for a one-dimensional output).
inline std::vector<std::size_t> parse_partition_spec(const nlohmann::json& j,
                                                     const std::string& where) {
  using namespace cfgdetail;
  require_object(j, where);
  reject_unknown(j, where, {"cells"});
  const auto& c = require(j, "cells", where);
  if (c.is_array()) return get_count_array(c, where + ".cells");
  return {get_count(c, where + ".cells")};
}

// Marginal heatmap request: a parameter-dimension pair plus grid resolution.
struct GridSpec {
  std::size_t dim_a = 0;
  std::size_t dim_b = 1;
  std::size_t cells_a = 80;
  std::size_t cells_b = 80;
};

inline GridSpec parse_grid_spec(const nlohmann::json& j, const std::string& where) {
  using namespace cfgdetail;
  require_object(j, where);
  reject_unknown(j, where, {"dims", "cells"});
  GridSpec g;
  if (const auto* v = find(j, "dims")) {
    if (!v->is_array() || v->size() != 2)
      throw config_error("config: '" + where + ".dims' must be a pair of dimension indices");
    g.dim_a = get_u64((*v)[0], where + ".dims[0]");
    g.dim_b = get_u64((*v)[1], where + ".dims[1]");
    if (g.dim_a == g.dim_b)
      throw config_error("config: '" + where + ".dims' must name two distinct dimensions");
  }
  if (const auto* v = find(j, "cells")) {
    auto cells = get_count_array(*v, where + ".cells");
    if (cells.size() != 2)
      throw config_error("config: '" + where + ".cells' must be a pair of cell counts");
    g.cells_a = cells[0];
    g.cells_b = cells[1];
  }
  return g;
}

// ---------------------------------------------------------------------------
// Per-subcommand configurations.

// Shared by `calibrate` and `accept-reject`: both assemble the same
// data-estimate + prior-sample pipeline before diverging.
struct CalibrateConfig {
  std::uint64_t seed = 20260815;
  unsigned threads = 0;
  std::string out;
  ModelSpec model;
  std::vector<std::size_t> cells;
  DataSpec data;
  PriorSpec prior;
  GridSpec grid;
  bool has_grid = false;  // whether the config named a grid explicitly
  double empty_threshold = kEmptyCellThreshold;
};

struct ForecastConfig {
  std::uint64_t seed = 20260815;
  unsigned threads = 0;
  std::string out;
  std::string posterior;  // path to a posterior CSV written by `calibrate`
  ModelSpec model;        // the new quantity to push the posterior through
  std::vector<std::size_t> cells;
};

// One of three studies; the irrelevant fields of the other studies stay at
// their defaults and are rejected as unknown keys when present.
struct ExperimentConfig {
  std::string study;  // "convergence-sweep" | "variance-slope" | "falling-ball"
  StudyConfig base;
  std::vector<std::size_t> sample_counts;            // sweep: N values
  std::vector<std::size_t> cell_counts;              // sweep: M values
  std::vector<std::size_t> data_counts;              // variance: K values
  std::size_t repeats = 50;                          // variance
  std::vector<std::pair<double, double>> event;      // variance: parameter box
  std::string variant = "fit-all";                   // falling-ball
  BallStudyConfig ball;
};

namespace cfgdetail {

inline void check_version(const json& j) {
  const json& v = require(j, "version", "$");
  if (!v.is_number_unsigned() || v.get<std::uint64_t>() != kConfigSchemaVersion)
    throw config_error("config: '$.version' must equal " +
                       std::to_string(kConfigSchemaVersion));
}

template <typename Cfg>
inline void parse_common(const json& j, Cfg& cfg) {
  if (const auto* v = find(j, "seed")) cfg.seed = get_u64(*v, "$.seed");
  if (const auto* v = find(j, "threads"))
    cfg.threads = static_cast<unsigned>(get_u64(*v, "$.threads"));
  if (const auto* v = find(j, "out")) cfg.out = get_string(*v, "$.out");
}

}  // namespace cfgdetail

inline CalibrateConfig parse_calibrate_config(const nlohmann::json& j) {
  using namespace cfgdetail;
  require_object(j, "$");
  check_version(j);
  reject_unknown(j, "$", {"version", "seed", "threads", "out", "model", "partition", "data",
                          "prior", "grid", "empty_threshold"});
  CalibrateConfig cfg;
  parse_common(j, cfg);
  cfg.model = parse_model_spec(require(j, "model", "$"), "$.model");
  cfg.cells = parse_partition_spec(require(j, "partition", "$"), "$.partition");
  cfg.data = parse_data_spec(require(j, "data", "$"), "$.data");
  cfg.prior = parse_prior_spec(require(j, "prior", "$"), "$.prior");
  if (const auto* v = find(j, "grid")) {
    cfg.grid = parse_grid_spec(*v, "$.grid");
    cfg.has_grid = true;
  }
  if (const auto* v = find(j, "empty_threshold")) {
    cfg.empty_threshold = get_number(*v, "$.empty_threshold");
    if (!(cfg.empty_threshold >= 0.0) || !(cfg.empty_threshold < 1.0))
      throw config_error("config: '$.empty_threshold' must lie in [0, 1)");
  }
  return cfg;
}

inline ForecastConfig parse_forecast_config(const nlohmann::json& j) {
  using namespace cfgdetail;
  require_object(j, "$");
  check_version(j);
  reject_unknown(j, "$", {"version", "seed", "threads", "out", "posterior", "model",
                          "partition"});
  ForecastConfig cfg;
  parse_common(j, cfg);
  cfg.posterior = get_string(require(j, "posterior", "$"), "$.posterior");
  cfg.model = parse_model_spec(require(j, "model", "$"), "$.model");
  cfg.cells = parse_partition_spec(require(j, "partition", "$"), "$.partition");
  return cfg;
}

inline ExperimentConfig parse_experiment_config(const nlohmann::json& j) {
  using namespace cfgdetail;
  require_object(j, "$");
  check_version(j);
  ExperimentConfig cfg;
  cfg.study = get_string(require(j, "study", "$"), "$.study");

  // Applies a model/data block onto the shared StudyConfig.
  auto apply_model = [&](const json& mj) {
    ModelSpec m = parse_model_spec(mj, "$.model");
    cfg.base.model_name = m.name;
    cfg.base.constants = m.constants;
  };
  auto apply_data = [&](const json& dj) {
    DataSpec d = parse_data_spec(dj, "$.data");
    if (d.source == "pmf")
      throw config_error("config: experiment studies estimate from draws; '$.data.source' "
                         "cannot be 'pmf'");
    if (d.estimator != "histogram")
      throw config_error("config: experiment studies use histogram estimates; remove "
                         "'$.data.estimator'");
    if (d.source == "file") {
      cfg.base.data_file = d.path;
    } else {
      cfg.base.data_alpha = d.alpha;
      cfg.base.data_beta = d.beta;
      cfg.base.data_count = d.count;
    }
  };

  if (cfg.study == "convergence-sweep") {
    reject_unknown(j, "$", {"version", "seed", "threads", "out", "study", "model", "data",
                            "sample_counts", "cell_counts", "grid_cells", "reference",
                            "empty_threshold"});
    if (const auto* v = find(j, "model")) apply_model(*v);
    if (const auto* v = find(j, "data")) apply_data(*v);
    cfg.sample_counts =
        get_count_array(require(j, "sample_counts", "$"), "$.sample_counts");
    cfg.cell_counts = get_count_array(require(j, "cell_counts", "$"), "$.cell_counts");
    if (const auto* v = find(j, "grid_cells"))
      cfg.base.grid_cells = get_count(*v, "$.grid_cells");
    if (const auto* v = find(j, "reference"))
      cfg.base.reference = get_string(*v, "$.reference");
    if (const auto* v = find(j, "empty_threshold"))
      cfg.base.empty_threshold = get_number(*v, "$.empty_threshold");
  } else if (cfg.study == "variance-slope") {
    reject_unknown(j, "$", {"version", "seed", "threads", "out", "study", "model", "data",
                            "cells", "sample_count", "data_counts", "repeats", "event",
                            "empty_threshold"});
    if (const auto* v = find(j, "model")) apply_model(*v);
    if (const auto* v = find(j, "data")) apply_data(*v);
    if (const auto* v = find(j, "cells")) cfg.base.cells = get_count(*v, "$.cells");
    if (const auto* v = find(j, "sample_count"))
      cfg.base.sample_count = get_count(*v, "$.sample_count");
    cfg.data_counts = get_count_array(require(j, "data_counts", "$"), "$.data_counts");
    if (const auto* v = find(j, "repeats")) cfg.repeats = get_count(*v, "$.repeats");
    cfg.event = get_pair_array(require(j, "event", "$"), "$.event");
    if (const auto* v = find(j, "empty_threshold"))
      cfg.base.empty_threshold = get_number(*v, "$.empty_threshold");
  } else if (cfg.study == "falling-ball") {
    reject_unknown(j, "$", {"version", "seed", "threads", "out", "study", "variant",
                            "sample_count", "resample_count", "jitter_repeats", "cells",
                            "grid_cells", "empty_threshold"});
    if (const auto* v = find(j, "variant")) cfg.variant = get_string(*v, "$.variant");
    if (const auto* v = find(j, "sample_count"))
      cfg.ball.sample_count = get_count(*v, "$.sample_count");
    if (const auto* v = find(j, "resample_count"))
      cfg.ball.resample_count = get_count(*v, "$.resample_count");
    if (const auto* v = find(j, "jitter_repeats"))
      cfg.ball.jitter_repeats = get_count(*v, "$.jitter_repeats");
    if (const auto* v = find(j, "cells")) cfg.ball.cells = get_count(*v, "$.cells");
    if (const auto* v = find(j, "grid_cells"))
      cfg.ball.grid_cells = get_count(*v, "$.grid_cells");
    if (const auto* v = find(j, "empty_threshold"))
      cfg.ball.empty_threshold = get_number(*v, "$.empty_threshold");
  } else {
    throw config_error("config: '$.study' must be one of "
                       "convergence-sweep|variance-slope|falling-ball, got '" +
                       cfg.study + "'");
  }

  // seed/threads/out live on the study structs themselves.
  if (const auto* v = find(j, "seed")) {
    cfg.base.seed = get_u64(*v, "$.seed");
    cfg.ball.seed = cfg.base.seed;
  }
  if (const auto* v = find(j, "threads")) {
    cfg.base.threads = static_cast<unsigned>(get_u64(*v, "$.threads"));
    cfg.ball.threads = cfg.base.threads;
  }
  if (const auto* v = find(j, "out")) {
    cfg.base.out_dir = get_string(*v, "$.out");
    cfg.ball.out_dir = cfg.base.out_dir;
  }
  return cfg;
}

// The config file itself is part of the configuration surface: an unreadable
// or unparseable file is a schema violation, not a data error.
inline nlohmann::json load_config_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw config_error("cannot open config file '" + path + "'");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw config_error("config '" + path + "': " + e.what());
  }
  if (!j.is_object())
    throw config_error("config '" + path + "': top level must be an object");
  return j;
}

// ---------------------------------------------------------------------------
// Run manifest.

// 64-bit FNV-1a over the raw bytes of an input file, recorded in the manifest
// so a run can be traced back to the exact inputs it consumed.
inline std::uint64_t fnv1a_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw data_error("cannot open input file '" + path + "'");
  std::uint64_t h = 14695981039346656037ULL;
  char buf[1 << 15];
  while (in) {
    in.read(buf, sizeof buf);
    for (std::streamsize i = 0; i < in.gcount(); ++i) {
      h ^= static_cast<unsigned char>(buf[i]);
      h *= 1099511628211ULL;
    }
  }
  return h;
}

inline std::string digest_hex(std::uint64_t h) {
  static const char* hex = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i, h >>= 4) out[static_cast<std::size_t>(i)] = hex[h & 0xf];
  return out;
}

struct RunManifest {
  std::string command;
  nlohmann::json config_echo;  // the parsed config file, before CLI overrides
  std::uint64_t seed = 0;      // effective values, after CLI overrides
  unsigned threads = 0;
  std::vector<std::pair<std::string, std::string>> inputs;  // (path, digest)
};

// Written atomically as <out>/manifest.json before any result file, so every
// output directory carries a complete record of what produced it even when a
// later pipeline stage fails. The timestamps block is the only content that
// varies between reruns of the same configuration.
inline void write_manifest(const std::string& out_dir, const RunManifest& m) {
  nlohmann::json j;
  j["schema_version"] = kConfigSchemaVersion;
  j["artifact_version"] = kVersion;
  j["command"] = m.command;
  j["seed"] = m.seed;
  j["threads"] = m.threads;
  j["config"] = m.config_echo;
  nlohmann::json inputs = nlohmann::json::array();
  for (const auto& [path, digest] : m.inputs)
    inputs.push_back({{"path", path}, {"digest", digest}});
  j["inputs"] = inputs;

  const auto now = std::chrono::system_clock::now();
  const auto epoch_ms =
      std::chrono::duration_cast<std::chrono::milliseconds>(now.time_since_epoch()).count();
  std::time_t tt = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&tt, &tm);
  char stamp[32];
  std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", &tm);
  j["timestamps"] = {{"created_epoch_ms", epoch_ms}, {"created_utc", stamp}};

  std::filesystem::create_directories(out_dir);
  csv::Writer::write_atomic(out_dir + "/manifest.json", j.dump(2) + "\n");
}

}  // namespace sip
