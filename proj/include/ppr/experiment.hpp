#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "ppr/init_eval.hpp"
#include "ppr/objectives.hpp"

namespace ppr {

inline constexpr const char* kVersion = "0.1.0";
inline constexpr const char* kPsnrConvention =
    "psnr = 10 log10(peak^2 N / ||phase_corrected(x_hat) - x_true||^2), peak = max|x_true| unless "
    "psnr_peak is set, capped at 300 dB";

/// Invalid configuration, unknown keys, missing input files.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using Json = nlohmann::json;

/// Every recognised key with its default value.
Json default_config();

/// Merges `user` over the defaults; unknown keys and type mismatches throw
/// ConfigError naming the dotted key.
Json resolve_config(const Json& user);

/// Applies "a.b.c=value" (value parsed as JSON, else taken as a string).
void apply_override(Json& config, const std::string& assignment);

/// A simulated (or file-backed) problem instance.
struct Instance {
  SignalVector x_true;
  std::shared_ptr<const Objective> data;
  Problem problem;
  MeasurementSet measurements;
  double scale = 1.0;
};

Instance build_instance(const Json& resolved);

/// Builtin true signals. Piecewise-constant 1-D blocks in [0, 1].
RVec blocks_signal(Index n);
/// Two nested disks on an h x w grid (outer 1, inner 0.5).
RMat disk_image(Index height, Index width);

struct ExperimentResult {
  Json config;
  CVec x0;
  RunState run;
  IterationTrace trace;  // includes the k = 0 initialization row
  double wall_seconds = 0.0;
  std::optional<SignalVector> x_true;
};

/// Runs one configuration in memory.
ExperimentResult execute(const Json& resolved);

/// Writes <prefix>trace.csv, <prefix>summary.json, <prefix>reconstruction.csv
/// (and .pgm for images) into `out_dir`.
void write_artifacts(const ExperimentResult& result, const std::filesystem::path& out_dir,
                     const std::string& prefix = "");

void write_trace_csv(std::ostream& out, const IterationTrace& trace);
Json summary_json(const ExperimentResult& result);

/// Resolve, execute and write; returns the result for exit-code decisions.
ExperimentResult run_experiment(const Json& user_config, const std::filesystem::path& out_dir);

/// Per-iteration median of traces (truncated to the shortest).
IterationTrace median_trace(const std::vector<IterationTrace>& traces);

struct SuiteEntry {
  std::string model;  // model label used in file names
  std::string label;  // algorithm label
  Json patch;         // merged over the preset base config
};

std::vector<std::string> suite_presets();
/// Base config and entries of a named preset.
std::pair<Json, std::vector<SuiteEntry>> suite_preset(const std::string& name);

struct SuiteResult {
  std::vector<SuiteEntry> entries;
  std::vector<IterationTrace> medians;  // one per entry
  int failed_runs = 0;
};

/// Runs every entry for every seed, writes <out>/<model>_<label>.csv with the
/// median traces and <out>/combined.csv.
SuiteResult run_suite(const std::string& preset, const std::vector<std::uint64_t>& seeds,
                      const Json& user_overrides, const std::filesystem::path& out_dir);

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

/// Fast invariant self-tests behind the `check` verb.
std::vector<CheckResult> self_check();

}  // namespace ppr
