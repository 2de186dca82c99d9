#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "sblab/errors.hpp"

namespace sblab {

// Exit codes shared by every subcommand: 0 pass, 1 checks failed,
// 2 input error, 3 numeric error.
inline constexpr int kExitPass = 0;
inline constexpr int kExitChecksFailed = 1;
inline constexpr int kExitInputError = 2;
inline constexpr int kExitNumericError = 3;

struct RunConfig {
  int sample_count = 200;
  std::uint64_t seed = 42;
  double tol_regularity = 1e-10;
  double tol_ll = 1e-8;
  double tol_defining = 1e-8;
  double tol_path = 1e-7;
  void validate() const;  // sample_count >= 1, tolerances > 0
};

struct CommandResult {
  int exit_code = 0;
  nlohmann::ordered_json report;
};

// Classify the defining system of a model file.
CommandResult run_analyze(const std::string& model_file, const RunConfig& cfg);

// Check a supplementary-law candidate file against a model file.
CommandResult run_verify(const std::string& model_file,
                         const std::string& sbl_file, const RunConfig& cfg);

struct DeriveOutputs {
  std::string model_path = "derived.model";
  std::string sbl_path = "derived.sbl";
};

// Build the energy-compatible model and family member from constitutive
// data, write both files, and report the entropy verdict.
CommandResult run_cattaneo_derive(const std::string& spec_file,
                                  const std::string& params_file,
                                  const DeriveOutputs& out,
                                  const RunConfig& cfg,
                                  std::optional<double> theta_base = {});

// Plain-text rendering of a report produced by the runners above.
std::string report_text(const nlohmann::ordered_json& report);

// argv-level entry point: parses flags, dispatches, prints the report to
// `out` and diagnostics to `err`, returns the process exit code.
int run_main(const std::vector<std::string>& args, std::ostream& out,
             std::ostream& err);

}  // namespace sblab
