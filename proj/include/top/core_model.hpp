#ifndef TOP_CORE_MODEL_HPP
#define TOP_CORE_MODEL_HPP

#include <array>
#include <cstdint>
#include <vector>

#include "top/types.hpp"

namespace top {

/**
 * Physical sensor parameters shared by labeling and geometry.
 *
 * The occupied band behind a reported return has length
 * -ln(occupied_confidence_threshold) / decay_rate_per_meter, about 0.105 m
 * with the defaults.
 */
struct SensorConfig {
  double divergence_angle_rad = 0.003;
  double occupied_confidence_threshold = 0.9;
  double decay_rate_per_meter = 1.0;

  /// Throws InvalidConfig when any field is out of range.
  void validate() const;

  double occupied_band_length() const;
};

struct Beam {
  Vec3 origin = Vec3::Zero();
  Vec3 direction = Vec3::UnitX();
  double range = 1.0;
  double time = 0.0;

  Vec3 hit_point() const { return origin + range * direction; }
};

/**
 * One LiDAR sweep.
 *
 * `points` are expressed in whatever frame `frame` names. A freshly loaded or
 * simulated scan is in its own sensor frame; express_in() moves it into the
 * frame of a reference (current) scan, after which `pose` maps the original
 * sensor frame into that frame and `sensor_origin` equals pose.translation.
 */
struct Scan {
  enum class Frame : std::uint8_t { Sensor, Current };

  std::vector<Vec3> points;
  std::vector<float> intensity;
  Vec3 sensor_origin = Vec3::Zero();
  double time = 0.0;
  RigidTransform pose;
  Frame frame = Frame::Sensor;

  std::size_t size() const { return points.size(); }
};

/// Re-express `scan` (holding world←sensor `scan.pose`) in the sensor frame of
/// a current scan whose world←sensor pose is `current_pose`; `time` becomes
/// relative to `current_time`.
Scan express_in(const Scan& scan, const RigidTransform& current_pose, double current_time);

enum class OccupancyState : std::uint8_t { Free = 0, Occupied = 1, Unknown = 2 };

/// One-hot [free, occupied, unknown].
std::array<double, 3> one_hot(OccupancyState state);
const char* state_name(OccupancyState state);

Beam beam_from_point(const Scan& scan, std::size_t point_index);

/// All beams of a scan, in point order. Throws ZeroRange on any degenerate point.
std::vector<Beam> beams_of(const Scan& scan);

/// Footprint radius of a diverging beam after travelling `range` meters.
double beam_radius_at(const SensorConfig& cfg, double range);

/// Signed distance of the projection of `point` along the beam.
double range_along_beam(const Beam& beam, const Vec3& point);

/// Exponential confidence decay behind the reported return.
double confidence(const SensorConfig& cfg, double range_at_point, double reported_range);

/// Three-state label of a location at `range_at_point` along a beam that
/// reported `reported_range`.
OccupancyState occupancy_state(const SensorConfig& cfg, double range_at_point,
                               double reported_range);

}  // namespace top

#endif  // TOP_CORE_MODEL_HPP
