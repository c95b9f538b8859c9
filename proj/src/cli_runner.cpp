#include "ergolab/cli_runner.hpp"

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

#include <CLI11.hpp>

#include "ergolab/envelopes.hpp"
#include "ergolab/errors.hpp"
#include "ergolab/parallel.hpp"

namespace ergolab {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string num(double x, int precision = 17) {
  std::ostringstream o;
  o << std::setprecision(precision) << x;
  return o.str();
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream o;
  o << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return o.str();
}

ExperimentReport rate_table_report(const ExperimentConfig& cfg) {
  const auto& v = cfg.values;
  RateTableParams p;
  p.table = v["table"];
  if (v.contains("K")) p.K = v["K"];
  if (v.contains("d")) p.d = v["d"];
  if (v.contains("l")) p.l = v["l"];
  if (v.contains("p")) p.p = v["p"];
  const auto ts = v["t_list"].get<std::vector<double>>();
  const auto vals = rate_table(p, ts);
  ExperimentReport rep;
  rep.kind = "rate-table";
  rep.config = v;
  rep.config.erase("output");
  rep.target_label = "envelope " + p.table;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    SeriesRow row;
    row.series = p.table;
    row.t = ts[i];
    row.raw_mean = vals[i];
    row.estimate = vals[i];
    row.target = kNaN;
    row.ratio = kNaN;
    row.note = "envelope value";
    rep.rows.push_back(row);
  }
  rep.flags.push_back("no-target");
  rep.verdict = Verdict::Inconclusive;
  return rep;
}

}  // namespace

std::vector<double> rate_table(const RateTableParams& params, const std::vector<double>& t) {
  std::vector<double> out;
  for (double x : t) {
    if (params.table == "xi_k") out.push_back(xi_k(params.K, x));
    else if (params.table == "gamma_d") out.push_back(gamma_d(params.d, x));
    else if (params.table == "t5") out.push_back(rate_t5(params.d, x));
    else if (params.table == "cv51") out.push_back(example51_envelope(params.l, params.p, x));
    else throw DomainError("unknown rate table '" + params.table + "'");
  }
  return out;
}

std::string rate_table_csv(const RateTableParams& params, const std::vector<double>& t) {
  const auto vals = rate_table(params, t);
  std::ostringstream o;
  o << "t,value\n";
  for (std::size_t i = 0; i < t.size(); ++i) o << num(t[i]) << ',' << num(vals[i]) << '\n';
  return o.str();
}

ExperimentReport run_experiment(const ExperimentConfig& cfg) {
  if (cfg.kind == "moment") return mc_moment_experiment(cfg.moment());
  if (cfg.kind == "qsd") return qsd_experiment(cfg.qsd());
  if (cfg.kind == "limit-law") return ks_limit_law_test(cfg.limit_law());
  if (cfg.kind == "clt") return clt_check(cfg.clt());
  if (cfg.kind == "lb-consistency") return lb_consistency_experiment(cfg.lb());
  if (cfg.kind == "bounds-audit") return bounds_audit(cfg.bounds_audit());
  if (cfg.kind == "rate-table") return rate_table_report(cfg);
  throw SchemaError("experiment: unknown kind '" + cfg.kind + "'");
}

void write_artifacts(const ExperimentConfig& cfg, const ExperimentReport& report) {
  std::filesystem::create_directories(cfg.output_dir);
  write_file(cfg.output_dir / "report.json", report.to_json().dump(2) + "\n");
  write_file(cfg.output_dir / "series.csv", report.csv());
  write_file(cfg.output_dir / "series.dat", report.dat());
  const nlohmann::json manifest{{"tool", "ergolab"},
                                {"version", ERGOLAB_VERSION},
                                {"experiment", cfg.kind},
                                {"config_hash", fnv1a_hex(cfg.values.dump())},
                                {"seed", cfg.seed()},
                                {"timestamp", utc_timestamp()},
                                {"runtime_seconds", report.runtime_seconds},
                                {"threads", worker_count()},
                                {"verdict", to_string(report.verdict)},
                                {"artifacts", {"report.json", "series.csv", "series.dat"}},
                                {"config", cfg.values}};
  write_file(cfg.output_dir / "manifest.json", manifest.dump(2) + "\n");
}

std::string verdict_table(const ExperimentReport& report) {
  std::ostringstream o;
  o << report.kind << ": " << report.target_label << "\n";
  o << std::left << std::setw(14) << "series" << std::right << std::setw(9) << "t" << std::setw(9) << "reps"
    << std::setw(14) << "estimate" << std::setw(12) << "ci_half" << std::setw(14) << "target" << std::setw(9)
    << "ratio" << "  verdict\n";
  for (const auto& r : report.rows) {
    o << std::left << std::setw(14) << (r.series.empty() ? "-" : r.series) << std::right << std::setw(9)
      << num(r.t, 6) << std::setw(9) << r.replicas << std::setw(14) << num(r.estimate, 6) << std::setw(12)
      << (r.ci_defined ? num(r.ci_half, 4) : "n/a") << std::setw(14) << num(r.target, 6) << std::setw(9)
      << num(r.ratio, 4) << "  " << to_string(r.verdict) << "\n";
  }
  if (report.fit)
    o << "rate fit: exponent " << num(report.fit->exponent, 4) << " (se " << num(report.fit->exponent_se, 2)
      << "), R^2 " << num(report.fit->r_squared, 4) << "\n";
  if (!report.flags.empty()) {
    o << "flags:";
    for (const auto& f : report.flags) o << ' ' << f;
    o << "\n";
  }
  o << "verdict: " << to_string(report.verdict) << "  (" << report.aborted << "/" << report.attempted
    << " aborted, " << num(report.runtime_seconds, 3) << " s)\n";
  return o.str();
}

int exit_code_for(Verdict v) { return v == Verdict::Fail ? kExitFail : kExitOk; }

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"ergolab: Monte Carlo checks of Wasserstein limits for empirical measures of diffusions"};
  app.require_subcommand(1);

  std::string config_path, output;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> threads;
  bool quiet = false;
  auto* run = app.add_subcommand("run", "run an experiment from a TOML/JSON config or a manifest");
  run->add_option("config", config_path, "config file (.toml or .json)")->required();
  run->add_option("-o,--output", output, "output directory (overrides the config)");
  run->add_option("-s,--seed", seed, "seed (overrides the config)");
  run->add_option("-j,--threads", threads, "worker cap (sets ERGOLAB_THREADS)")->check(CLI::PositiveNumber);
  run->add_flag("-q,--quiet", quiet, "do not print the verdict table");

  std::string validate_path;
  auto* validate = app.add_subcommand("validate", "check a config against the schema");
  validate->add_option("config", validate_path, "config file")->required();

  app.add_subcommand("list-experiments", "list experiment kinds");

  RateTableParams rp;
  std::vector<double> ts;
  auto* rt = app.add_subcommand("rate-table", "tabulate an envelope as CSV");
  rt->add_option("--table", rp.table, "xi_k | gamma_d | t5 | cv51")
      ->required()
      ->check(CLI::IsMember({"xi_k", "gamma_d", "t5", "cv51"}));
  rt->add_option("--K", rp.K, "K for xi_k");
  rt->add_option("--d", rp.d, "dimension for gamma_d and t5");
  rt->add_option("--l", rp.l, "l for cv51");
  rt->add_option("--p", rp.p, "p for cv51");
  rt->add_option("--t", ts, "comma-separated t grid")->required()->delimiter(',');

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n" << app.help();
    return kExitSchema;
  }

  try {
    if (app.got_subcommand("list-experiments")) {
      for (const auto& k : experiment_kinds()) out << k << "\n";
      return kExitOk;
    }
    if (app.got_subcommand("rate-table")) {
      out << rate_table_csv(rp, ts);
      return kExitOk;
    }
    if (app.got_subcommand("validate")) {
      const auto cfg = load_config(validate_path);
      out << "ok: " << cfg.kind << " " << fnv1a_hex(cfg.values.dump()) << "\n" << cfg.values.dump(2) << "\n";
      return kExitOk;
    }
  } catch (const SchemaError& e) {
    err << "schema error: " << e.what() << "\n";
    return kExitSchema;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitCompute;
  }

  ExperimentConfig cfg;
  try {
    cfg = load_config(config_path);
    if (seed || !output.empty()) {
      auto doc = cfg.values;
      if (seed) doc["seed"] = *seed;
      if (!output.empty()) doc["output"] = output;
      cfg = parse_config(doc);
    }
  } catch (const SchemaError& e) {
    err << "schema error: " << e.what() << "\n";
    return kExitSchema;
  }
  if (threads) setenv("ERGOLAB_THREADS", std::to_string(*threads).c_str(), 1);

  ExperimentReport report;
  try {
    report = run_experiment(cfg);
  } catch (const SchemaError& e) {
    err << "schema error: " << e.what() << "\n";
    return kExitSchema;
  } catch (const std::exception& e) {
    err << "compute error: " << e.what() << "\n";
    return kExitCompute;
  }
  try {
    write_artifacts(cfg, report);
  } catch (const std::exception& e) {
    err << "cannot write artifacts: " << e.what() << "\n";
    return kExitCompute;
  }
  if (!quiet) out << verdict_table(report) << "artifacts in " << cfg.output_dir.string() << "\n";
  return exit_code_for(report.verdict);
}

}  // namespace ergolab
