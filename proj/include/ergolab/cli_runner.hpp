#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "ergolab/config.hpp"
#include "ergolab/experiment_harness.hpp"

namespace ergolab {

/// Process exit codes of `ergolab run`.
enum ExitCode : int { kExitOk = 0, kExitFail = 1, kExitSchema = 2, kExitCompute = 3 };

struct RateTableParams {
  std::string table;  // xi_k | gamma_d | t5 | cv51
  double K = 0.0;
  int d = 0;
  double l = 0.0;
  double p = 0.0;
};

/// Envelope values on a t grid. Throws DomainError for invalid parameters.
std::vector<double> rate_table(const RateTableParams& params, const std::vector<double>& t);
/// Two-column CSV `t,value` with 17 significant digits.
std::string rate_table_csv(const RateTableParams& params, const std::vector<double>& t);

/// Runs a validated configuration (rate-table included) and returns its report.
ExperimentReport run_experiment(const ExperimentConfig& cfg);

/// Writes report.json, series.csv, series.dat and manifest.json into
/// cfg.output_dir. report.json carries no timestamps.
void write_artifacts(const ExperimentConfig& cfg, const ExperimentReport& report);

/// One-screen verdict table.
std::string verdict_table(const ExperimentReport& report);

int exit_code_for(Verdict v);

/// Entry point shared by the `ergolab` binary and the tests.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace ergolab
