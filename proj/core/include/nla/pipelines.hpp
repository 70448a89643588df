#pragma once

#include <cstdint>
#include <exception>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace nla {

enum class Pipeline { curves, simulate, reconstruct, wigner_demo };

std::string_view to_string(Pipeline p);
std::optional<Pipeline> parse_pipeline(std::string_view name);

/// Everything a run depends on. Defaults follow the experiment: g = 2,
/// eta = 0.6, 11 LO phases, 1e5 samples per state. The parametric gain is
/// not quoted for the experiment; lambda = 0.05 is an assumption.
struct ExperimentConfig {
  Pipeline pipeline = Pipeline::curves;
  std::vector<double> alphas;
  double g = 2.0;
  double lambda = 0.05;
  double reflectivity = 0.05;
  double eta = 0.6;
  int phases = 11;
  /// Samples per tagged state, spread evenly over the phases.
  int samples = 100000;
  std::optional<std::uint64_t> seed;
  std::filesystem::path output_dir = "out";
  std::optional<int> n_max;
  int max_iters = 2000;
  double ll_tol = 1e-10;
  double diag_tol = 1e-8;
  /// reconstruct: dataset CSV to read.
  std::filesystem::path dataset;
  /// reconstruct: fold the dataset's efficiency into the POVM.
  bool correct_efficiency = true;
  /// Spacing of emitted Wigner grids.
  double wigner_step = 0.08;
};

/// Parses a JSON config. Unknown fields, wrong types and out-of-range values
/// throw ConfigError naming the field; malformed JSON reports line and column.
/// Fields left out take the pipeline's defaults.
ExperimentConfig parse_config(const std::string& text, Pipeline pipeline);
ExperimentConfig load_config(const std::filesystem::path& path, Pipeline pipeline);

/// Re-checks every invariant, e.g. after command-line overrides.
void validate_config(const ExperimentConfig& cfg);

/// Canonical JSON echo of the config with all defaults filled in.
nlohmann::ordered_json config_to_json(const ExperimentConfig& cfg);

/// 64-bit FNV-1a of the canonical JSON, as 16 hex digits.
std::string config_hash(const ExperimentConfig& cfg);

struct RunSummary {
  std::vector<std::filesystem::path> files;
  nlohmann::ordered_json report;
};

/// Analytic and Fock-space figure-of-merit curves over the alpha grid.
RunSummary run_curves(const ExperimentConfig& cfg);

/// Physical amplifier -> homodyne sampling (amplified, input, vacuum) ->
/// shot-noise self-check -> gain from samples -> MaxLik -> report.
RunSummary run_full_pipeline(const ExperimentConfig& cfg);

/// MaxLik reconstruction of a dataset written by `simulate`.
RunSummary run_reconstruct(const ExperimentConfig& cfg);

/// Equal mixture of |alpha> and |i alpha> before and after ideal a a^dagger.
RunSummary run_wigner_demo(const ExperimentConfig& cfg);

RunSummary run(const ExperimentConfig& cfg);

/// 0 success, 2 config or parameter error, 3 numerical failure, 4 I/O error,
/// 1 anything else.
int exit_code_for(const std::exception& e);

} // namespace nla
