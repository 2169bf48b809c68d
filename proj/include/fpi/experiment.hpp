#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "fpi/config.hpp"
#include "fpi/error.hpp"
#include "fpi/iterate.hpp"

namespace fpi {

struct RunSummary {
  std::string name;
  Method method = Method::Picard;
  StopReason stop_reason = StopReason::MaxIter;
  std::size_t iterations_used = 0;
  double final_residual = 0.0;
  std::map<std::string, bool> checks_passed;  // keys match the requested checks
  std::optional<double> limit_error;
  std::vector<std::string> notes;  // reasons for failed checks
  bool expect_pass = true;
  std::filesystem::path trace_path;
  std::filesystem::path summary_path;

  bool all_passed() const;
};

/// Runs the configured iteration and checks, writing
///   <output_dir>/<name>/trace.csv         main trace
///   <output_dir>/<name>/coupled_trace.csv second Halpern run (coupling only)
///   <output_dir>/<name>/summary.txt
RunSummary run_experiment(const ExperimentConfig& cfg);

/// Header n,alpha,residual,step_norm,x_0,...,x_{d-1}; one row per iterate,
/// reals printed with 17 significant digits; row 0 leaves alpha and
/// step_norm empty. Throws WriteError when the file cannot be written.
void emit_trace_csv(const IterationTrace& trace, const std::filesystem::path& path);

struct CsvTrace {
  std::vector<std::optional<double>> alphas;
  std::vector<double> residuals;
  std::vector<std::optional<double>> step_norms;
  std::vector<Vec> iterates;
};

CsvTrace read_trace_csv(const std::filesystem::path& path);

std::string render_summary(const RunSummary& s);

/// Built-in experiment names: km-rotation, km-feasibility,
/// halpern-projection, picard-failure.
const std::vector<std::string>& demo_names();
std::string demo_config_text(const std::string& name);

/// Process exit classes.
enum ExitCode : int {
  kExitOk = 0,
  kExitParse = 2,
  kExitValidation = 3,
  kExitCheckFailed = 4,
  kExitIo = 5,
};

int exit_code_for(ErrorCode code);

}  // namespace fpi
