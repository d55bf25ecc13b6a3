// End-to-end tests of the sipcal binary: exit codes, artifact layout,
// determinism guarantees, and the worked examples each subcommand must
// reproduce. The binary path and repo root arrive via compile definitions.

#include <catch2/catch_amalgamated.hpp>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "sip/csv.hpp"
#include "sip/data_io.hpp"
#include "sip/experiments.hpp"
#include "sip/oracles.hpp"
#include "sip/posterior.hpp"

namespace fs = std::filesystem;

namespace {

const std::string kBin = SIPCAL_PATH;
const fs::path kRepo = SIP_SOURCE_DIR;

fs::path fresh_dir(const std::string& name) {
  fs::path dir = fs::temp_directory_path() / "sip_cli_tests" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << text;
}

struct RunResult {
  int code = -1;
  std::string out;
  std::string err;
};

// Runs the binary through the shell, capturing both streams.
RunResult run_cli(const std::string& args) {
  static int counter = 0;
  fs::path cap = fs::temp_directory_path() / "sip_cli_tests" / "cap";
  fs::create_directories(cap);
  fs::path outp = cap / ("out" + std::to_string(counter) + ".txt");
  fs::path errp = cap / ("err" + std::to_string(counter) + ".txt");
  ++counter;
  std::string cmd =
      kBin + " " + args + " > '" + outp.string() + "' 2> '" + errp.string() + "'";
  int status = std::system(cmd.c_str());
  RunResult r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = slurp(outp);
  r.err = slurp(errp);
  return r;
}

// metric,value files: first column is a label, second a number.
std::map<std::string, double> read_kv(const fs::path& path) {
  std::ifstream in(path);
  REQUIRE(in.good());
  std::map<std::string, double> kv;
  std::string line;
  std::getline(in, line);  // header
  while (std::getline(in, line)) {
    auto comma = line.find(',');
    if (comma == std::string::npos) continue;
    kv[line.substr(0, comma)] = std::stod(line.substr(comma + 1));
  }
  return kv;
}

// Manifest contents minus the lines that legitimately vary between reruns.
std::string manifest_normalized(const fs::path& path) {
  std::istringstream in(slurp(path));
  std::ostringstream out;
  std::string line;
  while (std::getline(in, line))
    if (line.find("created_") == std::string::npos) out << line << '\n';
  return out.str();
}

std::string config_arg(const std::string& name) {
  return "--config '" + (kRepo / "configs" / name).string() + "'";
}

}  // namespace

TEST_CASE("calibrate reproduces the exact lattice weights", "[cli]") {
  fs::path dir = fresh_dir("discrete_parity");
  RunResult r = run_cli("calibrate " + config_arg("discrete_parity.json") + " --out '" +
                        dir.string() + "'");
  CAPTURE(r.err);
  REQUIRE(r.code == 0);

  sip::csv::Table t = sip::csv::read_table((dir / "posterior.csv").string());
  REQUIRE(t.header == std::vector<std::string>{"lam_1", "lam_2", "q_1", "cell", "weight"});
  REQUIRE(t.rows.size() == 9);
  std::size_t odd = 0, even = 0;
  for (const auto& row : t.rows) {
    const double parity_symbol =
        (static_cast<int>(row[0]) + static_cast<int>(row[1])) % 2 == 0 ? 1.0 : 0.0;
    REQUIRE(row[2] == parity_symbol);
    REQUIRE(row[3] == parity_symbol);  // cell index equals the symbol
    if (parity_symbol == 0.0) {
      REQUIRE(row[4] == Catch::Approx(0.085).margin(1e-15));
      ++odd;
    } else {
      REQUIRE(row[4] == Catch::Approx(0.132).margin(1e-15));
      ++even;
    }
  }
  REQUIRE(odd == 4);
  REQUIRE(even == 5);

  auto diag = read_kv(dir / "diagnostics.csv");
  REQUIRE(diag.at("pushforward_max_discrepancy") == 0.0);
  REQUIRE(diag.at("empty_cell_mass") == 0.0);
  REQUIRE(diag.at("out_of_range") == 0.0);
  REQUIRE(diag.at("prior_count") == 9.0);

  std::string man = slurp(dir / "manifest.json");
  REQUIRE(man.find("\"command\": \"calibrate\"") != std::string::npos);
  REQUIRE(man.find("\"artifact_version\"") != std::string::npos);
  REQUIRE(man.find("created_utc") != std::string::npos);
}

TEST_CASE("exp-decay calibrate passes its own pushforward diagnostics", "[cli]") {
  fs::path dir = fresh_dir("calibrate_expdecay");
  RunResult r = run_cli("calibrate " + config_arg("calibrate_expdecay.json") + " --out '" +
                        dir.string() + "'");
  CAPTURE(r.err);
  REQUIRE(r.code == 0);

  auto diag = read_kv(dir / "diagnostics.csv");
  REQUIRE(diag.at("pushforward_max_discrepancy") <= 1e-12);
  REQUIRE(diag.at("empty_cell_mass") <= 0.05);
  REQUIRE(diag.at("prior_count") == 500000.0);
  REQUIRE(std::isfinite(diag.at("entropy")));

  sip::csv::Table hm = sip::csv::read_table((dir / "heatmap.csv").string());
  REQUIRE(hm.rows.size() == 80 * 80);
  REQUIRE(slurp(dir / "heatmap.pgm").substr(0, 2) == "P5");
}

TEST_CASE("file-backed calibrate records the input digest", "[cli]") {
  fs::path dir = fresh_dir("calibrate_freefall");
  // The shipped config names the data file relative to the repo root, so
  // rewrite it to an absolute path before running from the build tree.
  fs::path cfg = fresh_dir("calibrate_freefall_cfg") / "freefall.json";
  std::string text = slurp(kRepo / "configs" / "calibrate_freefall.json");
  const std::string rel = "data/ball_drop_times.csv";
  REQUIRE(text.find(rel) != std::string::npos);
  text.replace(text.find(rel), rel.size(), (kRepo / "data" / "ball_drop_times.csv").string());
  write_file(cfg, text);
  RunResult r =
      run_cli("calibrate --config '" + cfg.string() + "' --out '" + dir.string() + "'");
  CAPTURE(r.err);
  REQUIRE(r.code == 0);

  std::string man = slurp(dir / "manifest.json");
  REQUIRE(man.find("ball_drop_times.csv") != std::string::npos);
  REQUIRE(man.find("\"digest\"") != std::string::npos);
  auto diag = read_kv(dir / "diagnostics.csv");
  REQUIRE(diag.at("pushforward_max_discrepancy") <= 1e-12);
}

TEST_CASE("accept-reject example lands in the published rate window", "[cli]") {
  fs::path a = fresh_dir("ar_a");
  fs::path b = fresh_dir("ar_b");
  RunResult ra = run_cli("accept-reject " + config_arg("accept_reject_expdecay.json") +
                         " --out '" + a.string() + "'");
  CAPTURE(ra.err);
  REQUIRE(ra.code == 0);

  auto rep = read_kv(a / "report.csv");
  REQUIRE(rep.at("proposal_count") == 40000.0);
  REQUIRE(rep.at("acceptance_rate") == Catch::Approx(0.267).margin(0.03));
  REQUIRE(rep.at("bound_constant") > 1.0);

  sip::csv::Table acc = sip::csv::read_table((a / "accepted.csv").string());
  REQUIRE(acc.header == std::vector<std::string>{"lam_1", "lam_2", "q_1"});
  REQUIRE(static_cast<double>(acc.rows.size()) == rep.at("accept_count"));

  // Same config, same seed: byte-identical results; the manifest may differ
  // only in its timestamps block.
  RunResult rb = run_cli("accept-reject " + config_arg("accept_reject_expdecay.json") +
                         " --out '" + b.string() + "'");
  REQUIRE(rb.code == 0);
  REQUIRE(slurp(a / "accepted.csv") == slurp(b / "accepted.csv"));
  REQUIRE(slurp(a / "report.csv") == slurp(b / "report.csv"));
  REQUIRE(manifest_normalized(a / "manifest.json") ==
          manifest_normalized(b / "manifest.json"));
  REQUIRE(slurp(a / "manifest.json").find("created_utc") != std::string::npos);
}

TEST_CASE("thread cap and flag order do not change results", "[cli]") {
  fs::path cfg_dir = fresh_dir("threads_cfg");
  fs::path cfg = cfg_dir / "small.json";
  write_file(cfg, R"({
  "version": 1,
  "seed": 3111,
  "model": {"name": "exp-decay", "constants": {"t_end": 2.0}},
  "partition": {"cells": 50},
  "data": {"source": "synthetic", "count": 20000},
  "prior": {"kind": "uniform", "count": 50000}
})");
  fs::path t1 = fresh_dir("threads_1");
  fs::path t3 = fresh_dir("threads_3");
  REQUIRE(run_cli("calibrate --config '" + cfg.string() + "' --out '" + t1.string() +
                  "' --threads 1")
              .code == 0);
  // Global flags may also precede the subcommand.
  REQUIRE(run_cli("--config '" + cfg.string() + "' --out '" + t3.string() +
                  "' --threads 3 calibrate")
              .code == 0);
  REQUIRE(slurp(t1 / "posterior.csv") == slurp(t3 / "posterior.csv"));
  REQUIRE(slurp(t1 / "diagnostics.csv") == slurp(t3 / "diagnostics.csv"));

  // A different seed must actually change the draw.
  fs::path seeded = fresh_dir("threads_seeded");
  REQUIRE(run_cli("calibrate --config '" + cfg.string() + "' --out '" + seeded.string() +
                  "' --seed 3112")
              .code == 0);
  REQUIRE(slurp(t1 / "posterior.csv") != slurp(seeded / "posterior.csv"));
}

TEST_CASE("missing data file exits 3 with no partial outputs", "[cli]") {
  fs::path cfg_dir = fresh_dir("missing_cfg");
  fs::path cfg = cfg_dir / "missing.json";
  write_file(cfg, R"({
  "version": 1,
  "model": {"name": "free-fall"},
  "partition": {"cells": 40},
  "data": {"source": "file", "path": "/nonexistent/times.csv"},
  "prior": {"kind": "uniform", "count": 1000}
})");
  fs::path out = fs::temp_directory_path() / "sip_cli_tests" / "missing_out";
  fs::remove_all(out);
  RunResult r = run_cli("calibrate --config '" + cfg.string() + "' --out '" + out.string() +
                        "'");
  REQUIRE(r.code == 3);
  REQUIRE(r.err.find("\"code\":3") != std::string::npos);
  REQUIRE(r.err.find("\"kind\":\"data\"") != std::string::npos);
  REQUIRE_FALSE(fs::exists(out));
}

TEST_CASE("configuration mistakes exit 2 before anything is written", "[cli]") {
  fs::path dir = fresh_dir("bad_cfgs");
  fs::path out = fs::temp_directory_path() / "sip_cli_tests" / "bad_out";
  auto expect_config_error = [&](const std::string& name, const std::string& body) {
    fs::path cfg = dir / name;
    write_file(cfg, body);
    fs::remove_all(out);
    RunResult r = run_cli("calibrate --config '" + cfg.string() + "' --out '" + out.string() +
                          "'");
    CAPTURE(name, r.err);
    REQUIRE(r.code == 2);
    REQUIRE(r.err.find("\"code\":2") != std::string::npos);
    REQUIRE_FALSE(fs::exists(out));
  };

  const std::string valid_tail = R"(
  "model": {"name": "discrete-parity"},
  "partition": {"cells": 2},
  "data": {"source": "pmf", "probs": [0.34, 0.66]},
  "prior": {"kind": "lattice", "points_per_dim": 3}
})";
  expect_config_error("unknown_key.json", R"({"version": 1, "typo_key": true,)" + valid_tail);
  expect_config_error("bad_version.json", R"({"version": 2,)" + valid_tail);
  expect_config_error("unknown_nested.json",
                      R"({"version": 1, "prior_extra": 0,)" + valid_tail);
  expect_config_error("bad_estimator.json", R"({
  "version": 1,
  "model": {"name": "exp-decay", "constants": {"t_end": 2.0}},
  "partition": {"cells": 10},
  "data": {"source": "synthetic", "count": 100, "estimator": "spline"},
  "prior": {"kind": "uniform", "count": 100}
})");
  expect_config_error("pmf_not_normalized.json", R"({
  "version": 1,
  "model": {"name": "discrete-parity"},
  "partition": {"cells": 2},
  "data": {"source": "pmf", "probs": [0.3, 0.6]},
  "prior": {"kind": "lattice", "points_per_dim": 3}
})");
  expect_config_error("not_json.json", "this is not json");
  expect_config_error("unknown_prior_key.json", R"({
  "version": 1,
  "model": {"name": "exp-decay", "constants": {"t_end": 2.0}},
  "partition": {"cells": 10},
  "data": {"source": "synthetic", "count": 100},
  "prior": {"kind": "uniform", "count": 100, "shapes": [[2, 5]]}
})");

  // No --config at all, and an unknown command-line flag.
  REQUIRE(run_cli("calibrate").code == 2);
  REQUIRE(run_cli("calibrate --bogus 3").code == 2);
  REQUIRE(run_cli("").code == 2);
  REQUIRE(run_cli("oracle").code == 2);
  // Missing output directory is a configuration error too.
  fs::path no_out = dir / "no_out.json";
  write_file(no_out, R"({"version": 1,)" + valid_tail);
  REQUIRE(run_cli("calibrate --config '" + no_out.string() + "'").code == 2);
  // --help succeeds.
  REQUIRE(run_cli("--help").code == 0);
}

TEST_CASE("forecast identity, point mass, and error paths", "[cli]") {
  fs::path cal = fresh_dir("fc_cal");
  fs::path cfg_dir = fresh_dir("fc_cfg");
  fs::path cal_cfg = cfg_dir / "cal.json";
  write_file(cal_cfg, R"({
  "version": 1,
  "seed": 5150,
  "model": {"name": "exp-decay", "constants": {"t_end": 2.0}},
  "partition": {"cells": 50},
  "data": {"source": "synthetic", "count": 20000},
  "prior": {"kind": "uniform", "count": 50000}
})");
  REQUIRE(run_cli("calibrate --config '" + cal_cfg.string() + "' --out '" + cal.string() +
                  "'")
              .code == 0);

  SECTION("identity forecast reproduces the calibration pushforward") {
    fs::path out = fresh_dir("fc_identity");
    fs::path fc_cfg = cfg_dir / "fc.json";
    write_file(fc_cfg, R"({
  "version": 1,
  "posterior": ")" + (cal / "posterior.csv").string() + R"(",
  "model": {"name": "exp-decay", "constants": {"t_end": 2.0}},
  "partition": {"cells": 50}
})");
    RunResult r = run_cli("forecast --config '" + fc_cfg.string() + "' --out '" +
                          out.string() + "'");
    CAPTURE(r.err);
    REQUIRE(r.code == 0);

    sip::WeightedPosterior post =
        sip::read_posterior_csv((cal / "posterior.csv").string());
    std::vector<double> by_cell(50, 0.0);
    for (std::size_t i = 0; i < post.weights.size(); ++i)
      by_cell[static_cast<std::size_t>(post.cell_of[i])] += post.weights[i];

    sip::csv::Table fc = sip::csv::read_table((out / "forecast.csv").string());
    REQUIRE(fc.rows.size() == 50);
    for (const auto& row : fc.rows)
      REQUIRE(row.back() == Catch::Approx(by_cell[static_cast<std::size_t>(row[0])])
                                .margin(1e-12));
    REQUIRE(read_kv(out / "report.csv").at("overflow_mass") == 0.0);
  }

  SECTION("a point-mass posterior forecasts to a single image cell") {
    fs::path out = fresh_dir("fc_point");
    fs::path post_csv = cfg_dir / "point.csv";
    write_file(post_csv, "lam_1,lam_2,q_1,cell,weight\n0.3,0.4,0,0,1\n");
    fs::path fc_cfg = cfg_dir / "fc_point.json";
    write_file(fc_cfg, R"({
  "version": 1,
  "posterior": ")" + post_csv.string() + R"(",
  "model": {"name": "exp-decay", "constants": {"t_end": 2.0}},
  "partition": {"cells": 10}
})");
    RunResult r = run_cli("forecast --config '" + fc_cfg.string() + "' --out '" +
                          out.string() + "'");
    CAPTURE(r.err);
    REQUIRE(r.code == 0);
    sip::csv::Table fc = sip::csv::read_table((out / "forecast.csv").string());
    // Q(0.3, 0.4) = 0.3 exp(-0.8) ~ 0.1348 -> second of ten cells on [0, 1].
    for (const auto& row : fc.rows)
      REQUIRE(row.back() == (row[0] == 1.0 ? 1.0 : 0.0));
  }

  SECTION("missing posterior file exits 3 with no partial outputs") {
    fs::path out = fs::temp_directory_path() / "sip_cli_tests" / "fc_missing";
    fs::remove_all(out);
    fs::path fc_cfg = cfg_dir / "fc_missing.json";
    write_file(fc_cfg, R"({
  "version": 1,
  "posterior": "/nonexistent/posterior.csv",
  "model": {"name": "exp-decay", "constants": {"t_end": 2.0}},
  "partition": {"cells": 10}
})");
    RunResult r = run_cli("forecast --config '" + fc_cfg.string() + "' --out '" +
                          out.string() + "'");
    REQUIRE(r.code == 3);
    REQUIRE_FALSE(fs::exists(out));
  }
}

TEST_CASE("oracle discrete emits exact tables", "[cli]") {
  using sip::oracle::Rational;
  fs::path dir = fresh_dir("oracle_discrete");
  RunResult r = run_cli("oracle discrete --prior uniform --out '" + dir.string() + "'");
  CAPTURE(r.err);
  REQUIRE(r.code == 0);

  sip::csv::Table t = sip::csv::read_table((dir / "discrete.csv").string());
  REQUIRE(t.rows.size() == 9);
  for (const auto& row : t.rows) {
    const bool even = row[2] == 1.0;
    REQUIRE(row[3] == Catch::Approx(1.0 / 9.0).margin(1e-15));
    REQUIRE(row[4] == (even ? 0.2 : 0.25));
    REQUIRE(row[5] == Catch::Approx(even ? 0.132 : 0.085).margin(1e-15));
  }

  // Informed prior: the four distinct conditional weights, exactly.
  fs::path dir2 = fresh_dir("oracle_discrete_informed");
  REQUIRE(run_cli("oracle discrete --prior informed --out '" + dir2.string() + "'").code ==
          0);
  sip::csv::Table ti = sip::csv::read_table((dir2 / "discrete.csv").string());
  std::vector<double> conds;
  for (const auto& row : ti.rows) conds.push_back(row[4]);
  std::sort(conds.begin(), conds.end());
  conds.erase(std::unique(conds.begin(), conds.end()), conds.end());
  const std::vector<double> expected = {Rational(2, 21).value(), Rational(2, 19).value(),
                                        Rational(5, 14).value(), Rational(15, 38).value()};
  REQUIRE(conds == expected);

  // Generating prior with exact data: induced symbol masses 29/90 and 61/90.
  fs::path dir3 = fresh_dir("oracle_discrete_generating");
  REQUIRE(run_cli("oracle discrete --prior generating --data exact --out '" + dir3.string() +
                  "'")
              .code == 0);
  sip::csv::Table ind = sip::csv::read_table((dir3 / "induced.csv").string());
  REQUIRE(ind.rows.size() == 2);
  REQUIRE(ind.rows[0][1] == Rational(29, 90).value());
  REQUIRE(ind.rows[1][1] == Rational(61, 90).value());

  // Without --out the table goes to stdout.
  RunResult rs = run_cli("oracle discrete --prior uniform");
  REQUIRE(rs.code == 0);
  REQUIRE(rs.out.rfind("lam_1,lam_2,symbol,prior,conditional,posterior\n", 0) == 0);

  // Unknown prior name is a configuration error.
  REQUIRE(run_cli("oracle discrete --prior bogus").code == 2);
}

TEST_CASE("oracle curves: arclength monotone, disk constant, pushforward exact", "[cli]") {
  fs::path dir = fresh_dir("oracle_curves");
  REQUIRE(run_cli("oracle arclength --T 2 --points 60 --out '" + dir.string() + "'").code ==
          0);
  sip::csv::Table arc = sip::csv::read_table((dir / "arclength.csv").string());
  REQUIRE(arc.header ==
          std::vector<std::string>{"q", "arclength", "weighted_measure"});
  REQUIRE(arc.rows.size() == 60);
  REQUIRE(arc.rows.front()[0] == Catch::Approx(0.2).margin(1e-15));
  REQUIRE(arc.rows.back()[0] == Catch::Approx(0.99).margin(1e-15));
  for (std::size_t i = 1; i < arc.rows.size(); ++i)
    REQUIRE(arc.rows[i][1] <= arc.rows[i - 1][1] + 1e-12);
  // The weighted measure matches the uniform-prior output density; the bare
  // arc length does not.
  for (const auto& row : arc.rows)
    REQUIRE(row[2] ==
            Catch::Approx(sip::oracle::expdecay_pushforward_density(row[0], 2.0))
                .margin(1e-9));

  fs::path disk_dir = fresh_dir("oracle_disk");
  REQUIRE(run_cli("oracle disk --uniform --points 16 --out '" + disk_dir.string() + "'")
              .code == 0);
  sip::csv::Table disk = sip::csv::read_table((disk_dir / "disk.csv").string());
  REQUIRE(disk.rows.size() == 16);
  for (const auto& row : disk.rows)
    REQUIRE(row[1] == Catch::Approx(1.0 / (2.0 * std::numbers::pi)).margin(1e-12));

  fs::path pf_dir = fresh_dir("oracle_pf");
  REQUIRE(run_cli("oracle expdecay-pushforward --T 2 --points 8 --out '" + pf_dir.string() +
                  "'")
              .code == 0);
  sip::csv::Table pf = sip::csv::read_table((pf_dir / "pushforward.csv").string());
  REQUIRE(pf.rows.size() == 8);
  for (const auto& row : pf.rows)
    REQUIRE(row[1] == sip::oracle::expdecay_pushforward_density(row[0], 2.0));

  // Degenerate ranges are rejected up front.
  REQUIRE(run_cli("oracle arclength --T 2 --q-min 0.9 --q-max 0.2").code == 2);
}

TEST_CASE("experiment subcommand drives the canned studies", "[cli]") {
  SECTION("convergence sweep writes deterministic tables") {
    fs::path cfg_dir = fresh_dir("exp_cfg");
    fs::path cfg = cfg_dir / "sweep.json";
    write_file(cfg, R"({
  "version": 1,
  "seed": 902,
  "study": "convergence-sweep",
  "sample_counts": [2000, 8000],
  "cell_counts": [10, 20],
  "reference": "oracle",
  "data": {"source": "synthetic", "count": 20000}
})");
    fs::path a = fresh_dir("exp_sweep_a");
    fs::path b = fresh_dir("exp_sweep_b");
    RunResult ra = run_cli("experiment --config '" + cfg.string() + "' --out '" + a.string() +
                           "'");
    CAPTURE(ra.err);
    REQUIRE(ra.code == 0);
    REQUIRE(run_cli("experiment --config '" + cfg.string() + "' --out '" + b.string() + "'")
                .code == 0);
    sip::csv::Table sweep = sip::csv::read_table((a / "sweep.csv").string());
    REQUIRE(sweep.rows.size() == 4);
    for (const auto& row : sweep.rows) {
      REQUIRE(row[2] >= 0.0);
      REQUIRE(row[2] <= 1.0);
    }
    REQUIRE(slurp(a / "sweep.csv") == slurp(b / "sweep.csv"));
    REQUIRE(slurp(a / "manifest.csv") == slurp(b / "manifest.csv"));
    REQUIRE(slurp(a / "manifest.json").find("\"command\": \"experiment\"") !=
            std::string::npos);
  }

  SECTION("falling-ball study writes its artifact set") {
    fs::path cfg_dir = fresh_dir("exp_ball_cfg");
    fs::path cfg = cfg_dir / "ball.json";
    write_file(cfg, R"({
  "version": 1,
  "seed": 615,
  "study": "falling-ball",
  "variant": "bowling-informed",
  "sample_count": 50000,
  "jitter_repeats": 500
})");
    fs::path out = fresh_dir("exp_ball");
    RunResult r = run_cli("experiment --config '" + cfg.string() + "' --out '" + out.string() +
                          "'");
    CAPTURE(r.err);
    REQUIRE(r.code == 0);
    REQUIRE(fs::exists(out / "bowling-informed_summary.csv"));
    REQUIRE(fs::exists(out / "bowling-informed_h0_g.csv"));
    REQUIRE(fs::exists(out / "bowling-informed_h0_g.pgm"));
    auto summary = read_kv(out / "bowling-informed_summary.csv");
    REQUIRE(summary.at("event_g_realistic") >= 0.0);
    REQUIRE(summary.at("event_g_realistic") <= 1.0);
    REQUIRE(r.out.find("falling-ball") != std::string::npos);
  }

  SECTION("unknown study name exits 2") {
    fs::path cfg_dir = fresh_dir("exp_bad_cfg");
    fs::path cfg = cfg_dir / "bad.json";
    write_file(cfg, R"({"version": 1, "study": "tea-leaves"})");
    REQUIRE(run_cli("experiment --config '" + cfg.string() + "' --out /tmp/never").code == 2);
  }
}

// The shipped measurement files must stay in lockstep with the values the
// library bundles; the calibrate_freefall example config reads the CSV while
// the ball study reads the bundled table, and they have to agree.
TEST_CASE("shipped drop-time CSVs match the bundled measurements", "[cli][data]") {
  const std::vector<std::pair<double, double>> wide{{0.0, 10.0}};

  auto full = sip::load_observations((kRepo / "data/ball_drop_times.csv").string(), wide);
  REQUIRE(full.values == sip::ball_drop_times());

  auto reduced =
      sip::load_observations((kRepo / "data/ball_drop_times_reduced.csv").string(), wide);
  REQUIRE(reduced.values == sip::ball_drop_times_reduced());
}
