#ifndef TOP_CLI_HPP
#define TOP_CLI_HPP

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "top/core_model.hpp"
#include "top/evaluation.hpp"
#include "top/mos_labeling.hpp"
#include "top/objectives.hpp"
#include "top/overlap_extraction.hpp"
#include "top/recon_sampling.hpp"

namespace top::cli {

namespace fs = std::filesystem;

/// Fully resolved settings shared by every command.
struct RunConfig {
  SensorConfig sensor;
  ExtractionConfig extraction;
  ReconSamplingConfig recon;
  ThresholdTable thresholds;
  ClassWeights weights;
  double label_margin_m = 0.0;
  std::uint64_t seed = 0;
  unsigned threads = 0;  ///< 0 = one per hardware thread

  void validate() const;
  /// Canonical JSON of everything that influences output bytes (the thread
  /// count is left out on purpose: it never changes outputs).
  std::string to_json() const;
};

/// Values given on the command line; unset members fall through to the file.
struct Overrides {
  std::optional<unsigned> threads;
  std::optional<std::uint64_t> seed;
  std::optional<Bounds> bounds;
  std::optional<int> n_adjacent;
  std::optional<double> divergence;
  std::optional<double> lambda_occ;
};

/// Defaults, then the YAML file (if any), then flags.
RunConfig resolve_config(const std::optional<fs::path>& config_file, const Overrides& flags);
RunConfig parse_config_text(const std::string& yaml, RunConfig base = {});

/// "x0,x1,y0,y1,z0,z1"
Bounds parse_bounds(const std::string& text);

std::string scan_file_name(std::size_t index, const char* extension);
/// Sorted *.bin files of a directory.
std::vector<fs::path> list_scans(const fs::path& dir);

struct SequenceInput {
  fs::path scan_dir;
  fs::path pose_file;
  std::optional<fs::path> times_file;  ///< scan k at k * scan_period when absent
};

struct ExtractResult {
  std::vector<std::size_t> processed;  ///< current scan indices
  std::vector<fs::path> outputs;
  std::size_t overlap_points = 0;
  std::size_t recon_samples = 0;
};

/// Current scans with n neighbors on both sides: [n, N - 1 - n].
std::vector<std::size_t> eligible_current_scans(std::size_t scan_count, int n);

/// Writes overlap_NNNNNN.tovp and recon_NNNNNN.trec per eligible scan; on
/// failure every file written by this call is removed.
ExtractResult cmd_extract(const RunConfig& cfg, const SequenceInput& in, const fs::path& out_dir,
                          bool balance = false);

struct SimulateInput {
  fs::path scene_file;
  std::optional<fs::path> lidar_file;       ///< overrides the scene's lidar section
  std::optional<fs::path> trajectory_file;  ///< overrides the scene's trajectory section
};

/// scans/NNNNNN.bin, labels/NNNNNN.label, poses.txt, times.txt and
/// boxes.jsonl (moving objects, one keyframe per scan). Returns the scan count.
std::size_t cmd_simulate(const RunConfig& cfg, const SimulateInput& in, const fs::path& out_dir);

/// labels/NNNNNN.label for every scan from box annotations.
std::size_t cmd_label(const RunConfig& cfg, const SequenceInput& in, const fs::path& boxes_file,
                      const fs::path& out_dir);

struct EvalFiles {
  SequenceInput sequence;
  fs::path boxes_file;
  fs::path label_dir;
  fs::path prediction_dir;
  std::optional<fs::path> ego_dir;
};

EvalInput load_eval_input(const RunConfig& cfg, const EvalFiles& files, bool with_predictions);
EvalReport cmd_eval(const RunConfig& cfg, const EvalFiles& files);

/// Table of the object-size CDF plus quantile lines such as
/// "75% objects → 3% points".
std::string format_size_cdf(const SizeCdf& cdf, const std::vector<double>& fractions = {0.25, 0.5, 0.75, 0.9});
std::string format_size_csv(const SizeCdf& cdf);
/// One non-negative integer per line.
std::vector<std::uint64_t> read_counts(const fs::path& path);

struct LossCheckInput {
  fs::path overlap_file;
  fs::path overlap_predictions;
  std::optional<fs::path> recon_file;
  std::optional<fs::path> recon_predictions;
};

struct LossCheckResult {
  double overlap = 0.0;
  std::optional<double> recon;
};

LossCheckResult cmd_loss_check(const RunConfig& cfg, const LossCheckInput& in);
std::string format_loss(const LossCheckResult& r);

/// Exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;
inline constexpr int kExitInternal = 3;

int exit_code_for(ErrorCode code);

}  // namespace top::cli

#endif  // TOP_CLI_HPP
