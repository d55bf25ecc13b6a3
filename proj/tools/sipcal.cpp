// sipcal: command-line driver for the stochastic-inverse calibration library.
//
// Subcommands:
//   calibrate      observed-output estimate + prior sample -> posterior files
//   accept-reject  thin the prior sample into an unweighted posterior subset
//   forecast       push a stored posterior through a new quantity of interest
//   oracle         closed-form reference curves and tables
//   experiment     the repo's canned studies (sweeps, variance, ball drop)
//
// Config-driven subcommands read a strict, versioned JSON file (see
// include/sip/config.hpp); --seed, --out and --threads override the matching
// config values. Every run that writes files records <out>/manifest.json
// before its first result file. On failure a one-line JSON error record goes
// to stderr and the exit code classifies the cause: 2 configuration, 3 input
// data, 4 under-resolved prior, 5 numeric.

#include <cstdint>
#include <iostream>
#include <numbers>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "CLI11.hpp"

#include "sip/accept_reject.hpp"
#include "sip/config.hpp"
#include "sip/csv.hpp"
#include "sip/data_io.hpp"
#include "sip/errors.hpp"
#include "sip/experiments.hpp"
#include "sip/model.hpp"
#include "sip/oracles.hpp"
#include "sip/parallel.hpp"
#include "sip/partition.hpp"
#include "sip/posterior.hpp"
#include "sip/rng.hpp"

namespace {

using nlohmann::json;

std::string_view kind_of(int code) {
  switch (code) {
    case 2: return "config";
    case 3: return "data";
    case 4: return "under-resolved";
    case 5: return "numeric";
    default: return "internal";
  }
}

std::string error_record(std::string_view kind, int code, const std::string& message) {
  json j;
  j["error"] = {{"kind", std::string(kind)}, {"code", code}, {"message", message}};
  return j.dump();
}

// A single cell count in the config is shorthand for every output dimension.
std::vector<std::size_t> resolve_cells(std::vector<std::size_t> cells, std::size_t m) {
  if (cells.size() == 1 && m > 1) cells.assign(m, cells[0]);
  if (cells.size() != m)
    throw sip::config_error("partition.cells must give one count per model output dimension");
  return cells;
}

// ---------------------------------------------------------------------------
// Pipeline assembly shared by `calibrate` and `accept-reject`.

// Inclusive points^n grid over the parameter box with equal mass; used for
// models whose parameters live on a small lattice (e.g. discrete-parity).
sip::SampleSet lattice_sample(const sip::QoiModel& model, std::size_t points) {
  sip::SampleSet s;
  s.n_dim = model.input_dim;
  s.m_dim = model.output_dim;
  std::size_t total = 1;
  for (std::size_t d = 0; d < model.input_dim; ++d) {
    if (total > 10'000'000 / points)
      throw sip::config_error("prior.points_per_dim yields an oversized lattice");
    total *= points;
  }
  std::vector<std::size_t> idx(model.input_dim, 0);
  for (std::size_t k = 0; k < total; ++k) {
    for (std::size_t d = 0; d < model.input_dim; ++d) {
      auto [lo, hi] = model.domain.bounds[d];
      double x = points == 1 ? 0.5 * (lo + hi)
                             : lo + (hi - lo) * static_cast<double>(idx[d]) /
                                        static_cast<double>(points - 1);
      s.points.push_back(x);
    }
    for (std::size_t d = model.input_dim; d-- > 0;) {
      if (++idx[d] < points) break;
      idx[d] = 0;
    }
  }
  return s;
}

sip::SampleSet draw_prior(const sip::QoiModel& model, const sip::PriorSpec& p,
                          sip::RandomStream stream) {
  if (p.kind == "uniform") return sip::sample_uniform_box(model.domain, p.count, stream);
  if (p.kind == "beta") {
    if (p.shapes.size() != model.input_dim)
      throw sip::config_error("prior.shapes must give one (alpha, beta) pair per parameter");
    return sip::sample_beta_product(p.shapes, model.domain, p.count, stream);
  }
  if (p.kind == "normal") {
    if (p.means.size() != model.input_dim)
      throw sip::config_error("prior.means/sds must give one entry per parameter");
    return sip::sample_normal_product(p.means, p.sds, model.domain, p.count, stream);
  }
  return lattice_sample(model, p.points_per_dim);
}

// Synthetic observations: parameters from a Beta(alpha, beta) product over
// the model domain, pushed through the model.
sip::ObservedData synthetic_observations(const sip::QoiModel& model, const sip::DataSpec& d,
                                         sip::RandomStream stream, unsigned threads) {
  std::vector<std::pair<double, double>> shapes(model.input_dim, {d.alpha, d.beta});
  sip::SampleSet s = sip::sample_beta_product(shapes, model.domain, d.count, stream);
  sip::eval_model(s, model, threads);
  sip::ObservedData obs;
  obs.m = model.output_dim;
  obs.d_bounds = model.output_bounds;
  obs.values = std::move(s.qvals);
  return obs;
}

sip::CellProbabilities data_estimate(const sip::CalibrateConfig& cfg, const sip::QoiModel& model,
                                     const sip::PartitionD& partition,
                                     const sip::RandomStream& root) {
  const sip::DataSpec& d = cfg.data;
  if (d.source == "pmf") {
    if (d.probs.size() != partition.cells())
      throw sip::config_error("data.probs must give one entry per partition cell");
    sip::NeumaierSum sum;
    for (double p : d.probs) sum.add(p);
    if (std::abs(sum.value() - 1.0) > 1e-9)
      throw sip::config_error("data.probs must sum to 1");
    sip::CellProbabilities cp;
    cp.partition = partition;
    cp.probs = d.probs;
    cp.source = "pmf";
    cp.interior_mass = 1.0;
    return cp;
  }
  sip::ObservedData obs = d.source == "file"
                              ? sip::load_observations(d.path, model.output_bounds)
                              : synthetic_observations(model, d, root.substream("data-gen"),
                                                       cfg.threads);
  if (d.estimator == "histogram") return sip::histogram_probs(obs, partition);
  if (d.estimator == "kde") {
    double h = d.bandwidth > 0.0
                   ? d.bandwidth
                   : sip::default_bandwidth(obs.size(), obs.m, sip::silverman_factor(obs));
    return sip::kde_cell_probs(obs, partition, h);
  }
  return sip::parametric_cell_probs(sip::fit_beta_mle(obs), partition);
}

struct CalibrationRun {
  sip::QoiModel model;
  sip::PartitionD partition;
  sip::CellProbabilities data_probs;
  sip::SampleSet prior;  // evaluated through the model
};

// Everything up to (but not including) the reweighting/thinning step; writes
// the manifest as soon as the inputs are known good.
CalibrationRun assemble(const sip::CalibrateConfig& cfg, const json& echo,
                        const std::string& command) {
  if (cfg.out.empty())
    throw sip::config_error(command + ": an output directory is required (--out or $.out)");
  CalibrationRun run;
  run.model = sip::make_model(cfg.model.name, cfg.model.constants);
  run.partition = sip::build_uniform_partition(run.model.output_bounds,
                                               resolve_cells(cfg.cells, run.model.output_dim));
  if (cfg.has_grid &&
      (cfg.grid.dim_a >= run.model.input_dim || cfg.grid.dim_b >= run.model.input_dim))
    throw sip::config_error("grid.dims exceed the model parameter dimension");

  // Every config-vs-model consistency rule is checked before the manifest is
  // written, so a configuration error never leaves an output directory behind.
  if (cfg.data.source == "pmf") {
    if (cfg.data.probs.size() != run.partition.cells())
      throw sip::config_error("data.probs must give one entry per partition cell");
    sip::NeumaierSum sum;
    for (double p : cfg.data.probs) sum.add(p);
    if (std::abs(sum.value() - 1.0) > 1e-9)
      throw sip::config_error("data.probs must sum to 1");
  }
  if (cfg.data.estimator == "parametric" && run.model.output_dim != 1)
    throw sip::config_error("the parametric estimator applies to scalar outputs only");
  if (cfg.prior.kind == "beta" && cfg.prior.shapes.size() != run.model.input_dim)
    throw sip::config_error("prior.shapes must give one (alpha, beta) pair per parameter");
  if (cfg.prior.kind == "normal" && cfg.prior.means.size() != run.model.input_dim)
    throw sip::config_error("prior.means/sds must give one entry per parameter");

  sip::RunManifest man;
  man.command = command;
  man.config_echo = echo;
  man.seed = cfg.seed;
  man.threads = cfg.threads;
  if (cfg.data.source == "file")
    man.inputs.emplace_back(cfg.data.path, sip::digest_hex(sip::fnv1a_file(cfg.data.path)));
  sip::write_manifest(cfg.out, man);

  sip::RandomStream root(cfg.seed, 0u);
  run.data_probs = data_estimate(cfg, run.model, run.partition, root);
  run.prior = draw_prior(run.model, cfg.prior, root.substream("prior"));
  sip::eval_model(run.prior, run.model, cfg.threads);
  return run;
}

// ---------------------------------------------------------------------------
// Subcommands.

int cmd_calibrate(const sip::CalibrateConfig& cfg, const json& echo) {
  CalibrationRun run = assemble(cfg, echo, "calibrate");
  sip::WeightedPosterior post = sip::compute_weights(std::move(run.prior), run.data_probs,
                                                     cfg.empty_threshold, cfg.threads);

  sip::write_posterior_csv(cfg.out + "/posterior.csv", post);
  if (run.model.input_dim >= 2) {
    const sip::GridSpec& g = cfg.grid;
    sip::GridHeatmap hm =
        sip::marginal_heatmap(post, g.dim_a, g.dim_b, g.cells_a, g.cells_b,
                              run.model.domain.bounds[g.dim_a], run.model.domain.bounds[g.dim_b]);
    sip::write_heatmap_csv(cfg.out + "/heatmap.csv", hm);
    sip::write_heatmap_pgm(cfg.out + "/heatmap.pgm", hm, /*binary=*/true);
  }

  sip::PushforwardCheck check = sip::pushforward_check(post, run.partition);
  std::vector<std::size_t> egrid(run.model.input_dim, 20);
  double entropy = sip::entropy_estimate(post, egrid, run.model.domain.bounds);

  sip::csv::Writer w(cfg.out + "/diagnostics.csv", {"metric", "value"});
  w.row("pushforward_max_discrepancy", check.max_abs);
  w.row("empty_cell_mass", post.empty_cell_mass);
  w.row("out_of_range", post.out_of_range);
  w.row("entropy", entropy);
  w.row("prior_count", post.samples.size());
  w.close();

  std::cout << "calibrate: " << post.samples.size() << " samples, empty_cell_mass "
            << post.empty_cell_mass << ", pushforward_max_discrepancy " << check.max_abs
            << "\n";
  return 0;
}

int cmd_accept_reject(const sip::CalibrateConfig& cfg, const json& echo) {
  CalibrationRun run = assemble(cfg, echo, "accept-reject");
  sip::RandomStream root(cfg.seed, 0u);
  sip::AcceptRejectResult res =
      sip::run_accept_reject(run.prior, run.data_probs, root.substream("ar"));

  std::vector<std::string> header;
  for (std::size_t d = 0; d < res.accepted.n_dim; ++d)
    header.push_back("lam_" + std::to_string(d + 1));
  for (std::size_t d = 0; d < res.accepted.m_dim; ++d)
    header.push_back("q_" + std::to_string(d + 1));
  sip::csv::Writer w(cfg.out + "/accepted.csv", header);
  std::vector<double> row(header.size());
  for (std::size_t i = 0; i < res.accepted.size(); ++i) {
    std::size_t k = 0;
    for (std::size_t d = 0; d < res.accepted.n_dim; ++d) row[k++] = res.accepted.point(i)[d];
    for (std::size_t d = 0; d < res.accepted.m_dim; ++d) row[k++] = res.accepted.qval(i)[d];
    w.row_vec(row);
  }
  w.close();

  sip::csv::Writer rep(cfg.out + "/report.csv", {"metric", "value"});
  rep.row("proposal_count", run.prior.size());
  rep.row("accept_count", res.accept_count);
  rep.row("acceptance_rate", res.acceptance_rate);
  rep.row("bound_constant", res.table.C);
  rep.row("unreachable_mass", res.table.unreachable_mass);
  rep.close();

  std::cout << "accept-reject: kept " << res.accept_count << " of " << run.prior.size()
            << " (rate " << res.acceptance_rate << ")\n";
  return 0;
}

int cmd_forecast(const sip::ForecastConfig& cfg, const json& echo) {
  if (cfg.out.empty())
    throw sip::config_error("forecast: an output directory is required (--out or $.out)");
  sip::QoiModel model = sip::make_model(cfg.model.name, cfg.model.constants);
  sip::PartitionD partition = sip::build_uniform_partition(
      model.output_bounds, resolve_cells(cfg.cells, model.output_dim));

  sip::RunManifest man;
  man.command = "forecast";
  man.config_echo = echo;
  man.seed = cfg.seed;
  man.threads = cfg.threads;
  man.inputs.emplace_back(cfg.posterior, sip::digest_hex(sip::fnv1a_file(cfg.posterior)));
  sip::write_manifest(cfg.out, man);

  sip::WeightedPosterior post = sip::read_posterior_csv(cfg.posterior);
  sip::CellProbabilities fc = sip::forecast_pushforward(post, model, partition);
  sip::write_cell_probs_csv(cfg.out + "/forecast.csv", fc);

  sip::csv::Writer rep(cfg.out + "/report.csv", {"metric", "value"});
  rep.row("sample_count", post.samples.size());
  rep.row("overflow_mass", fc.overflow);
  rep.close();

  std::cout << "forecast: " << fc.probs.size() << " cells, overflow_mass " << fc.overflow
            << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// Oracle curve/table dumps.

void emit_table(const std::string& out_dir, const std::string& name,
                const std::vector<std::string>& header,
                const std::vector<std::vector<double>>& rows) {
  if (out_dir.empty()) {
    std::ostringstream os;
    for (std::size_t i = 0; i < header.size(); ++i)
      os << (i ? "," : "") << header[i];
    os << "\n";
    for (const auto& r : rows) {
      for (std::size_t i = 0; i < r.size(); ++i)
        os << (i ? "," : "") << sip::csv::format(r[i]);
      os << "\n";
    }
    std::cout << os.str();
    return;
  }
  sip::csv::Writer w(out_dir + "/" + name, header);
  for (const auto& r : rows) w.row_vec(r);
  w.close();
}

void oracle_manifest(const std::string& out_dir, json flags) {
  if (out_dir.empty()) return;
  sip::RunManifest man;
  man.command = "oracle";
  man.config_echo = std::move(flags);
  sip::write_manifest(out_dir, man);
}

int cmd_oracle_discrete(const std::string& out, const std::string& prior,
                        const std::string& data) {
  using sip::oracle::Rational;
  std::vector<std::vector<Rational>> p9;
  if (prior == "uniform") p9 = sip::oracle::uniform_prior9();
  else if (prior == "informed") p9 = sip::oracle::informed_prior9();
  else if (prior == "generating") p9 = sip::oracle::generating_prior9();
  else throw sip::config_error("oracle discrete: --prior must be uniform|informed|generating");
  std::vector<Rational> pd;
  if (data == "estimate") pd = sip::oracle::parity_data_estimate();
  else if (data == "exact") pd = sip::oracle::parity_data_exact();
  else throw sip::config_error("oracle discrete: --data must be estimate|exact");

  oracle_manifest(out, {{"subcommand", "discrete"}, {"prior", prior}, {"data", data}});
  sip::oracle::DiscreteSip s = sip::oracle::make_parity_sip(p9, pd);
  sip::oracle::DiscretePosterior post = sip::oracle::discrete_posterior(s);
  std::vector<Rational> induced = sip::oracle::induced_symbol_pmf(s);

  std::vector<std::vector<double>> rows;
  for (std::size_t k = 0; k < s.points.size(); ++k)
    rows.push_back({static_cast<double>(s.points[k][0]), static_cast<double>(s.points[k][1]),
                    static_cast<double>(s.symbols[k]), s.prior[k].value(),
                    post.conditional[k].value(), post.pmf[k].value()});
  emit_table(out, "discrete.csv", {"lam_1", "lam_2", "symbol", "prior", "conditional",
                                   "posterior"},
             rows);

  std::vector<std::vector<double>> irows;
  for (std::size_t v = 0; v < induced.size(); ++v)
    irows.push_back({static_cast<double>(v), induced[v].value()});
  if (!out.empty()) emit_table(out, "induced.csv", {"symbol", "mass"}, irows);
  return 0;
}

int cmd_oracle_pushforward(const std::string& out, double t_end, std::size_t points) {
  if (points == 0) throw sip::config_error("oracle expdecay-pushforward: --points must be positive");
  oracle_manifest(out, {{"subcommand", "expdecay-pushforward"}, {"T", t_end},
                        {"points", points}});
  std::vector<std::vector<double>> rows;
  for (std::size_t i = 0; i < points; ++i) {
    double q = (static_cast<double>(i) + 0.5) / static_cast<double>(points);
    rows.push_back({q, sip::oracle::expdecay_pushforward_density(q, t_end)});
  }
  emit_table(out, "pushforward.csv", {"q", "density"}, rows);
  return 0;
}

int cmd_oracle_arclength(const std::string& out, double t_end, std::size_t points, double q_min,
                         double q_max) {
  if (points < 2) throw sip::config_error("oracle arclength: --points must be at least 2");
  if (!(q_min > 0.0) || !(q_min <= q_max) || !(q_max < 1.0))
    throw sip::config_error("oracle arclength: need 0 < q-min <= q-max < 1");
  oracle_manifest(out, {{"subcommand", "arclength"}, {"T", t_end}, {"points", points},
                        {"q_min", q_min}, {"q_max", q_max}});
  // Both contour functionals, side by side: the bare arc length and the
  // gradient-weighted measure that matches the pushforward density.
  std::vector<std::vector<double>> rows;
  for (std::size_t i = 0; i < points; ++i) {
    double q = q_min + (q_max - q_min) * static_cast<double>(i) /
                           static_cast<double>(points - 1);
    rows.push_back({q, sip::oracle::expdecay_contour_arclength(q, t_end),
                    sip::oracle::expdecay_contour_weighted_measure(q, t_end)});
  }
  emit_table(out, "arclength.csv", {"q", "arclength", "weighted_measure"}, rows);
  return 0;
}

int cmd_oracle_disk(const std::string& out, double radius, std::size_t points) {
  if (points == 0) throw sip::config_error("oracle disk: --points must be positive");
  oracle_manifest(out, {{"subcommand", "disk"}, {"prior", "uniform"}, {"radius", radius},
                        {"points", points}});
  auto uniform = [](double, double) { return 1.0; };
  std::vector<std::vector<double>> rows;
  for (std::size_t i = 0; i < points; ++i) {
    double theta = 2.0 * std::numbers::pi * (static_cast<double>(i) + 0.5) /
                   static_cast<double>(points);
    rows.push_back({theta, sip::oracle::disk_conditional_density(uniform, radius, theta)});
  }
  emit_table(out, "disk.csv", {"theta", "density"}, rows);
  return 0;
}

// ---------------------------------------------------------------------------
// Experiment studies.

int cmd_experiment(const sip::ExperimentConfig& cfg, const json& echo) {
  const std::string& out = cfg.base.out_dir;
  if (out.empty())
    throw sip::config_error("experiment: an output directory is required (--out or $.out)");

  sip::RunManifest man;
  man.command = "experiment";
  man.config_echo = echo;
  man.seed = cfg.base.seed;
  man.threads = cfg.base.threads;
  if (!cfg.base.data_file.empty())
    man.inputs.emplace_back(cfg.base.data_file,
                            sip::digest_hex(sip::fnv1a_file(cfg.base.data_file)));
  sip::write_manifest(out, man);

  if (cfg.study == "convergence-sweep") {
    std::vector<sip::SweepRow> rows =
        sip::convergence_sweep(cfg.base, cfg.sample_counts, cfg.cell_counts);
    std::cout << "experiment convergence-sweep: " << rows.size() << " points, final tv "
              << rows.back().tv << "\n";
  } else if (cfg.study == "variance-slope") {
    sip::VarianceStudyResult res =
        sip::variance_slope_study(cfg.base, cfg.event, cfg.data_counts, cfg.repeats);
    std::cout << "experiment variance-slope: slope "
              << (res.slope_valid ? sip::csv::format(res.slope) : std::string("n/a")) << "\n";
  } else {
    sip::BallStudyResult res = sip::falling_ball_study(cfg.variant, cfg.ball);
    std::cout << "experiment falling-ball " << cfg.variant << ": event probability "
              << res.event_g_realistic << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Nonparametric calibration of computer models from observed outputs"};
  app.require_subcommand(1);

  std::string config_path, out_dir;
  std::uint64_t seed = 0;
  std::uint64_t threads = 0;
  auto* opt_config =
      app.add_option("--config", config_path, "JSON run configuration (schema version 1)");
  auto* opt_seed = app.add_option("--seed", seed, "Override the config's top-level seed");
  auto* opt_out = app.add_option("--out", out_dir, "Output directory (overrides config)");
  auto* opt_threads =
      app.add_option("--threads", threads, "Worker thread cap, 0 = core count (overrides config)");

  CLI::App* cal = app.add_subcommand("calibrate", "Estimate the reweighted posterior");
  CLI::App* arj = app.add_subcommand("accept-reject", "Thin the prior into posterior draws");
  CLI::App* fct = app.add_subcommand("forecast", "Push a stored posterior through a new model");
  CLI::App* exp = app.add_subcommand("experiment", "Run a canned study from a config");
  CLI::App* orc = app.add_subcommand("oracle", "Dump closed-form reference tables");
  orc->require_subcommand(1);

  std::string oracle_prior = "uniform", oracle_data = "estimate";
  double oracle_t = 2.0, q_min = 0.2, q_max = 0.99, radius = 0.5;
  std::uint64_t oracle_points = 0;
  CLI::App* od = orc->add_subcommand("discrete", "Exact lattice posterior table");
  od->add_option("--prior", oracle_prior, "uniform|informed|generating");
  od->add_option("--data", oracle_data, "estimate|exact symbol frequencies");
  CLI::App* op = orc->add_subcommand("expdecay-pushforward",
                                     "Uniform-prior output density of the exponential model");
  op->add_option("--T", oracle_t, "model horizon");
  op->add_option("--points", oracle_points, "grid size (default 512)");
  CLI::App* oa = orc->add_subcommand("arclength", "Contour measures of the exponential model");
  oa->add_option("--T", oracle_t, "model horizon");
  oa->add_option("--points", oracle_points, "grid size (default 80)");
  oa->add_option("--q-min", q_min, "lowest contour level");
  oa->add_option("--q-max", q_max, "highest contour level");
  CLI::App* ok = orc->add_subcommand("disk", "Angular density on a disk-radius contour");
  ok->add_flag("--uniform", "uniform prior on the disk (the default and only choice)");
  ok->add_option("--radius", radius, "contour radius");
  ok->add_option("--points", oracle_points, "grid size (default 64)");

  for (CLI::App* sub : {cal, arj, fct, exp, orc, od, op, oa, ok}) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help and friends
    std::cerr << error_record("config", 2, e.what()) << "\n";
    return 2;
  }

  try {
    auto need_config = [&]() -> json {
      if (config_path.empty())
        throw sip::config_error("this subcommand requires --config <path>");
      return sip::load_config_file(config_path);
    };
    auto apply_overrides = [&](auto& cfg) {
      if (opt_seed->count()) cfg.seed = seed;
      if (opt_out->count()) cfg.out = out_dir;
      if (opt_threads->count()) cfg.threads = static_cast<unsigned>(threads);
    };

    if (*cal || *arj) {
      json j = need_config();
      sip::CalibrateConfig cfg = sip::parse_calibrate_config(j);
      apply_overrides(cfg);
      return *cal ? cmd_calibrate(cfg, j) : cmd_accept_reject(cfg, j);
    }
    if (*fct) {
      json j = need_config();
      sip::ForecastConfig cfg = sip::parse_forecast_config(j);
      apply_overrides(cfg);
      return cmd_forecast(cfg, j);
    }
    if (*exp) {
      json j = need_config();
      sip::ExperimentConfig cfg = sip::parse_experiment_config(j);
      if (opt_seed->count()) cfg.base.seed = cfg.ball.seed = seed;
      if (opt_out->count()) cfg.base.out_dir = cfg.ball.out_dir = out_dir;
      if (opt_threads->count())
        cfg.base.threads = cfg.ball.threads = static_cast<unsigned>(threads);
      return cmd_experiment(cfg, j);
    }
    // oracle
    std::size_t pts = static_cast<std::size_t>(oracle_points);
    if (*od) return cmd_oracle_discrete(out_dir, oracle_prior, oracle_data);
    if (*op) return cmd_oracle_pushforward(out_dir, oracle_t, pts ? pts : 512);
    if (*oa) return cmd_oracle_arclength(out_dir, oracle_t, pts ? pts : 80, q_min, q_max);
    return cmd_oracle_disk(out_dir, radius, pts ? pts : 64);
  } catch (const sip::error& e) {
    std::cerr << error_record(kind_of(e.code()), e.code(), e.what()) << "\n";
    return e.code();
  } catch (const std::exception& e) {
    std::cerr << error_record("internal", 1, e.what()) << "\n";
    return 1;
  }
}
