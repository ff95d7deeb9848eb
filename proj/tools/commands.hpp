#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "config.hpp"

namespace poisfock::cli {

enum ExitCode : int { kOk = 0, kInternalError = 1, kConfigError = 2, kVerificationFailure = 3 };

struct SuiteEntry {
  std::string identity;
  /// "exact" (enumeration, deterministic) or "mc" (sampled, compared by z-score).
  std::string method;
  double discrepancy = 0.0;
  double tolerance = 0.0;
  bool pass = false;
  nlohmann::ordered_json detail = nlohmann::ordered_json::object();
};

struct VerifyReport {
  std::vector<SuiteEntry> entries;

  bool all_pass() const;
  /// The report as written to verify.json. The "generated_at" member is the
  /// only run-dependent line.
  nlohmann::ordered_json to_json(const ExperimentConfig& config, const std::string& generated_at) const;
};

/// Runs every identity of the verification suite on the configured intensity and functionals.
VerifyReport run_verify_suite(const ExperimentConfig& config);

/// The commands write into `out_dir` (created if needed) and log a short summary to `log`
/// unless `quiet`. They return an ExitCode.
int cmd_coeffs(const ExperimentConfig& config, const std::filesystem::path& out_dir, bool quiet, std::ostream& log);
int cmd_variance(const ExperimentConfig& config, const std::filesystem::path& out_dir, bool quiet, std::ostream& log);
int cmd_verify(const ExperimentConfig& config, const std::filesystem::path& out_dir, bool quiet, std::ostream& log);
int cmd_sample(const ExperimentConfig& config, const std::filesystem::path& out_dir, bool quiet, std::ostream& log);

/// Full command-line entry point: parses flags, dispatches, maps errors to exit codes.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace poisfock::cli
