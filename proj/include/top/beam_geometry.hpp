#ifndef TOP_BEAM_GEOMETRY_HPP
#define TOP_BEAM_GEOMETRY_HPP

#include <array>
#include <cstdint>
#include <optional>

#include "top/core_model.hpp"

namespace top {

// All functions here work in the current-scan sensor frame: the current beam
// starts at the origin, the adjacent beam starts at `adjacent_origin`.

enum class Scenario : std::uint8_t {
  One,  ///< spatial angle above divergence; the overlap is a single point
  Two,  ///< nearly parallel beams; the overlap is a segment
};

struct CenterlineIntersection {
  Vec3 point = Vec3::Zero();
  double param_current = 0.0;   ///< range of the point along the current beam
  double param_adjacent = 0.0;  ///< range of the point along the adjacent beam
};

struct BeamPairGeometry {
  std::uint32_t current_beam_index = 0;
  std::uint32_t adjacent_beam_index = 0;
  double coplanarity_angle = 0.0;
  double spatial_angle = 0.0;
  Scenario scenario = Scenario::One;
  CenterlineIntersection intersection;
};

struct IntersectionSegment {
  double start_range_current = 0.0;
  double end_range_current = 0.0;
  std::array<Vec3, 5> sampled_points;
};

inline constexpr double kMinBaseline = 1e-3;      ///< meters
inline constexpr double kMinCrossNorm = 1e-9;

/// Unit normal of the plane through both sensor origins and the current beam.
/// Throws DegeneratePlane when the baseline is shorter than `min_baseline` or
/// the current beam runs along it.
Vec3 plane_normal(const Vec3& d_current, const Vec3& adjacent_origin,
                  double min_baseline = kMinBaseline);

/// Signed angle between the adjacent beam and the reference plane; the pair is
/// coplanar when |angle| <= divergence / 2.
double coplanarity_angle(const Vec3& normal, const Vec3& d_adjacent);

bool is_coplanar(double coplanarity_angle_rad, const SensorConfig& cfg);

double spatial_angle(const Vec3& d_current, const Vec3& d_adjacent);

/// Point on the current centerline closest to the adjacent centerline. Throws
/// NearParallel for (anti)parallel directions and BehindSensor when the point
/// lies at non-positive range on either beam.
CenterlineIntersection centerline_intersection(const Vec3& d_current, const Vec3& adjacent_origin,
                                               const Vec3& d_adjacent);

/// Non-throwing form used on hot paths; sets `reason` (if given) on failure.
std::optional<CenterlineIntersection> try_centerline_intersection(const Vec3& d_current,
                                                                  const Vec3& adjacent_origin,
                                                                  const Vec3& d_adjacent,
                                                                  ErrorCode* reason = nullptr);

Scenario classify_scenario(double spatial_angle_rad, const SensorConfig& cfg);

/**
 * Range along the current beam where the two footprints start to overlap.
 *
 * Derived from two small-angle approximations: both intersection segments
 * have equal length, and the gap between their start points equals the sum
 * of the beam radii there. Throws NonPositiveStart when the segment
 * degenerates.
 */
double segment_start_range(double q_range_current, double q_to_adjacent_origin,
                           double spatial_angle_rad, const SensorConfig& cfg);

/// Same closed form without the positivity check.
double segment_start_unchecked(double q_range_current, double q_to_adjacent_origin,
                               double spatial_angle_rad, const SensorConfig& cfg);

/// Five overlap samples along the current beam: the current hit, the
/// projection of the adjacent hit, and the three midpoints between those and
/// the centerline intersection. Ranks 0..4 follow that order.
std::array<Vec3, 5> sample_scenario2_points(const Vec3& current_hit, const Vec3& adjacent_hit,
                                            const Vec3& q, const Vec3& d_current);

}  // namespace top

#endif  // TOP_BEAM_GEOMETRY_HPP
