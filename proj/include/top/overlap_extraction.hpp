#ifndef TOP_OVERLAP_EXTRACTION_HPP
#define TOP_OVERLAP_EXTRACTION_HPP

#include <array>
#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "top/beam_geometry.hpp"
#include "top/core_model.hpp"
#include "top/direction_index.hpp"

namespace top {

struct ExtractionConfig {
  int n_adjacent = 6;
  double scan_period_s = 0.5;
  Bounds bounds;
  /// Defaults to the occupied-band length of the sensor when unset.
  std::optional<double> max_tail_beyond_hit_m;
  /// Unlimited when unset; otherwise the first K points per current beam in
  /// canonical order are kept.
  std::optional<std::uint32_t> max_overlaps_per_beam;
  std::uint64_t rng_seed = 0;
  /// Direction grid cell size; 0 picks max(divergence, 0.01 rad).
  double index_cell_size_rad = 0.0;

  void validate(const SensorConfig& sensor) const;
  double tail(const SensorConfig& sensor) const;
  double cell_size(const SensorConfig& sensor) const;
};

struct OverlapPoint {
  Vec3 position = Vec3::Zero();
  double time = 0.0;
  OccupancyState state = OccupancyState::Free;
  double confidence = 1.0;
  std::uint32_t current_point_index = 0;
  std::int8_t adjacent_scan_offset = 0;
  std::uint32_t adjacent_point_index = 0;
  std::uint8_t sample_rank = 0;  ///< 0 for a point intersection, 0..4 for segment samples
};

/// (i, offset, j, rank) ordering used everywhere overlap points are stored.
bool canonical_less(const OverlapPoint& a, const OverlapPoint& b);

struct OverlapSet {
  std::vector<OverlapPoint> points;

  std::array<std::size_t, 3> counts() const;
  std::size_t count(OccupancyState s) const { return counts()[static_cast<std::size_t>(s)]; }
  std::size_t size() const { return points.size(); }
};

struct AdjacentScan {
  int offset = 0;  ///< position relative to the current scan, in [-n, n] \ {0}
  Scan scan;
};

/// Indexed search for the coplanar (i, j) pairs of a scan pair, sorted.
std::vector<std::pair<std::uint32_t, std::uint32_t>> coplanar_pairs(
    const Scan& current, const Scan& adjacent, const ExtractionConfig& cfg,
    const SensorConfig& sensor, unsigned threads = 1);

/// Overlap points produced by one (current, adjacent) scan pair, in canonical
/// order. Both scans must already be expressed in the current frame.
std::vector<OverlapPoint> extract_scan_pair(const Scan& current, const Scan& adjacent,
                                            int adjacent_offset, const ExtractionConfig& cfg,
                                            const SensorConfig& sensor, unsigned threads = 1);

/// Union over all 2n adjacent scans, canonically sorted and capped per beam.
OverlapSet extract_sequence(const Scan& current, const std::vector<AdjacentScan>& adjacents,
                            const ExtractionConfig& cfg, const SensorConfig& sensor,
                            unsigned threads = 1);

/// Keeps every occupied point, up to 5x as many free points and as many
/// unknown points, drawn without replacement.
OverlapSet balance_classes(const OverlapSet& set, std::uint64_t seed);

}  // namespace top

#endif  // TOP_OVERLAP_EXTRACTION_HPP
