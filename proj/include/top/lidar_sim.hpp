#ifndef TOP_LIDAR_SIM_HPP
#define TOP_LIDAR_SIM_HPP

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "top/core_model.hpp"
#include "top/evaluation.hpp"
#include "top/mos_labeling.hpp"
#include "top/overlap_extraction.hpp"

namespace top {

/// A box in the world. Static boxes have zero velocity; the center at time t
/// is center + velocity * t.
struct SceneObject {
  std::string id;
  ObjectCategory category = ObjectCategory::Vehicle;
  OrientedBox box;
  Vec3 velocity = Vec3::Zero();

  bool moving() const { return velocity.squaredNorm() > 0.0; }
  OrientedBox at(double time) const;
};

struct SceneSpec {
  std::vector<SceneObject> static_boxes;
  std::vector<SceneObject> moving_boxes;
  bool ground_plane = false;
  double ground_z = 0.0;
  Bounds world_bounds{Vec3::Constant(-1e3), Vec3::Constant(1e3)};

  void validate() const;
  std::size_t object_count() const { return static_boxes.size() + moving_boxes.size(); }
  /// Objects indexed static-first, then moving.
  const SceneObject& object(std::size_t k) const;
};

struct SpinningLidarSpec {
  std::vector<double> elevations_rad;
  double azimuth_step_rad = 2.0 * 3.14159265358979323846 / 1024.0;
  double max_range = 100.0;
  double min_range = 0.3;
  double divergence_rad = 0.003;
  double range_noise_sigma = 0.0;  ///< meters; 0 disables noise
  std::uint64_t noise_seed = 0;

  void validate() const;
  std::size_t azimuth_count() const;
  /// Evenly spaced channels between two elevations (inclusive).
  static SpinningLidarSpec uniform(std::size_t channels, double min_elevation_rad,
                                   double max_elevation_rad, std::size_t azimuth_count);
};

struct RayHit {
  double distance = 0.0;
  int object = -1;  ///< index into SceneSpec::object(), -1 for the ground
};

/// Nearest positive hit of the ray origin + s * direction (s > 0) at `time`.
std::optional<RayHit> cast_ray(const SceneSpec& scene, const Vec3& origin, const Vec3& direction,
                               double time);

struct SimulatedScan {
  Scan scan;                     ///< sensor frame; pose maps sensor -> world
  std::vector<int> hit_object;   ///< per point, as RayHit::object
  std::vector<MotionClass> labels;
};

/// Ray-casts every (channel, azimuth) centerline; misses are omitted and the
/// rest are ordered by channel, then azimuth index.
SimulatedScan simulate_scan(const SceneSpec& scene, const SpinningLidarSpec& lidar,
                            const RigidTransform& sensor_pose, double time, unsigned threads = 1);

enum class GroundTruthState : std::uint8_t { Free = 0, Occupied = 1, Unknown = 2 };

/// Observable state of a world point from a sensor at `sensor_origin`: free
/// before the first surface along the ray, occupied within `band` behind it,
/// unknown deeper.
GroundTruthState ground_truth_state(const Vec3& point, double time, const Vec3& sensor_origin,
                                    const SceneSpec& scene, double band);

struct OracleStats {
  /// confusion[label][ground truth]
  std::array<std::array<std::uint64_t, 3>, 3> confusion{};
  std::uint64_t compared = 0;
  std::uint64_t skipped_near_boundary = 0;
  Metric agreement;  ///< percent
};

/**
 * Compares extracted labels against geometric ground truth.
 *
 * `adjacents` are the scans the overlaps were extracted from, in the current
 * frame; `current_pose` maps that frame to the world and `current_time` is
 * the world time of the current scan. Points whose adjacent-beam range lies
 * within `boundary_margin` of a state boundary are skipped.
 */
OracleStats oracle_compare(const OverlapSet& overlaps, const SceneSpec& scene,
                           const RigidTransform& current_pose, double current_time,
                           const std::vector<AdjacentScan>& adjacents, const SensorConfig& sensor,
                           double boundary_margin);

struct TrajectoryPose {
  double time = 0.0;
  RigidTransform pose;
};

/// Scene file contents: the world plus optional lidar and trajectory sections.
struct SceneFile {
  SceneSpec scene;
  std::optional<SpinningLidarSpec> lidar;
  std::vector<TrajectoryPose> trajectory;
};

/// Parses the YAML scene format documented in README.md.
SceneFile load_scene_file(const std::string& path);
SceneFile parse_scene_text(const std::string& text);

}  // namespace top

#endif  // TOP_LIDAR_SIM_HPP
