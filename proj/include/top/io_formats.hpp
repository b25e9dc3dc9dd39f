#ifndef TOP_IO_FORMATS_HPP
#define TOP_IO_FORMATS_HPP

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "top/core_model.hpp"
#include "top/evaluation.hpp"
#include "top/mos_labeling.hpp"
#include "top/objectives.hpp"
#include "top/overlap_extraction.hpp"
#include "top/recon_sampling.hpp"

// On-disk formats. Every binary layout is little-endian and documented in
// README.md; the constants below are the source of truth.

namespace top::io {

namespace fs = std::filesystem;

inline constexpr char kOverlapMagic[4] = {'T', 'O', 'V', 'P'};
inline constexpr char kReconMagic[4] = {'T', 'R', 'E', 'C'};
inline constexpr char kProbMagic[4] = {'T', 'P', 'R', 'B'};
inline constexpr std::uint16_t kFormatVersion = 1;
inline constexpr std::size_t kOverlapRecordSize = 33;
inline constexpr std::size_t kReconRecordSize = 21;

/// 64-bit FNV-1a.
std::uint64_t fnv1a64(std::string_view bytes);

// --- scans and poses -------------------------------------------------------

/// KITTI-style float32 (x, y, z, intensity) records; the scan is left in its
/// sensor frame with an identity pose.
Scan read_scan_bin(const fs::path& path);
void write_scan_bin(const fs::path& path, const Scan& scan);
Scan parse_scan_bin(std::string_view bytes);

/// One row-major 3x4 [R | t] per line.
std::vector<RigidTransform> read_poses(const fs::path& path);
std::vector<RigidTransform> parse_poses(const std::string& text);
void write_poses(const fs::path& path, const std::vector<RigidTransform>& poses);

/// One timestamp (seconds) per line.
std::vector<double> read_times(const fs::path& path);
void write_times(const fs::path& path, const std::vector<double>& times);

// --- overlap sets ----------------------------------------------------------

struct OverlapFileHeader {
  std::uint16_t version = kFormatVersion;
  std::uint64_t record_count = 0;
  SensorConfig sensor;
  std::uint64_t config_hash = 0;
  std::string config_json;  ///< resolved run configuration echoed by the writer
};

struct OverlapFile {
  OverlapFileHeader header;
  OverlapSet set;
};

std::string encode_overlap_set(const OverlapSet& set, const SensorConfig& sensor,
                               const std::string& config_json);
/// Throws MagicMismatch, VersionUnsupported, CountMismatch, TruncatedFile or
/// SchemaViolation. When `expected_hash` is given a different header hash is
/// rejected as InvalidConfig.
OverlapFile decode_overlap_set(std::string_view bytes,
                               std::optional<std::uint64_t> expected_hash = std::nullopt);
void write_overlap_set(const fs::path& path, const OverlapSet& set, const SensorConfig& sensor,
                       const std::string& config_json);
OverlapFile read_overlap_set(const fs::path& path,
                             std::optional<std::uint64_t> expected_hash = std::nullopt);

// --- reconstruction samples ------------------------------------------------

struct ReconFile {
  std::uint32_t n_points = 0;
  ReconSamplingConfig sampling;
  std::uint64_t config_hash = 0;
  std::string config_json;
  std::vector<ReconSample> samples;
};

std::string encode_recon_samples(const ReconFile& file);
ReconFile decode_recon_samples(std::string_view bytes);
void write_recon_samples(const fs::path& path, const ReconFile& file);
ReconFile read_recon_samples(const fs::path& path);

// --- predictions and labels ------------------------------------------------

/// Float32 probability triples, one per overlap point or recon sample.
std::string encode_probabilities(const std::vector<StatePrediction>& preds);
std::vector<StatePrediction> decode_probabilities(std::string_view bytes);
void write_probabilities(const fs::path& path, const std::vector<StatePrediction>& preds);
std::vector<StatePrediction> read_probabilities(const fs::path& path);

/// One byte per point in scan order. `max_value` bounds the accepted codes.
std::vector<std::uint8_t> read_u8_per_point(const fs::path& path, std::size_t expected_count,
                                            std::uint8_t max_value);
void write_u8_per_point(const fs::path& path, const std::vector<std::uint8_t>& values);

std::vector<MotionClass> read_labels(const fs::path& path, std::size_t expected_count);
void write_labels(const fs::path& path, const std::vector<MotionClass>& labels);

// --- boxes -----------------------------------------------------------------

/// JSON lines, one keyframe per line:
/// {"instance_id", "category", "timestamp", "center", "size", "yaw", "scan"?}
std::vector<TrackedBox> parse_boxes_jsonl(const std::string& text);
std::vector<TrackedBox> read_boxes_jsonl(const fs::path& path);
std::string format_boxes_jsonl(const std::vector<TrackedBox>& tracks);
void write_boxes_jsonl(const fs::path& path, const std::vector<TrackedBox>& tracks);

// --- reports ---------------------------------------------------------------

std::string report_to_json(const EvalReport& report);
EvalReport report_from_json(const std::string& text);

// --- plumbing --------------------------------------------------------------

std::string read_file(const fs::path& path);
/// Writes through a temporary sibling and renames, so readers never observe
/// a partial file.
void write_file(const fs::path& path, std::string_view bytes);

}  // namespace top::io

#endif  // TOP_IO_FORMATS_HPP
