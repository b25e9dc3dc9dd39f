#include "top/lidar_sim.hpp"

#include <bit>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "top/parallel.hpp"
#include "top/rng.hpp"

namespace top {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Slab test in the box frame. Returns the first positive crossing, which is
// the exit face when the origin sits inside the box.
std::optional<double> intersect_box(const OrientedBox& box, const Vec3& origin,
                                    const Vec3& direction) {
  const double c = std::cos(box.yaw);
  const double s = std::sin(box.yaw);
  const Vec3 d0 = origin - box.center;
  const Vec3 o(c * d0.x() + s * d0.y(), -s * d0.x() + c * d0.y(), d0.z());
  const Vec3 d(c * direction.x() + s * direction.y(), -s * direction.x() + c * direction.y(),
               direction.z());
  const Vec3 half = 0.5 * box.size;
  double t_near = -kInf;
  double t_far = kInf;
  for (int a = 0; a < 3; ++a) {
    if (std::abs(d[a]) < 1e-15) {
      if (std::abs(o[a]) > half[a]) return std::nullopt;
      continue;
    }
    double t0 = (-half[a] - o[a]) / d[a];
    double t1 = (half[a] - o[a]) / d[a];
    if (t0 > t1) std::swap(t0, t1);
    t_near = std::max(t_near, t0);
    t_far = std::min(t_far, t1);
    if (t_near > t_far) return std::nullopt;
  }
  if (t_near > 0.0) return t_near;
  if (t_far > 0.0) return t_far;
  return std::nullopt;
}

double gaussian(std::mt19937_64& gen) {
  double u1 = uniform01(gen);
  while (u1 == 0.0) u1 = uniform01(gen);
  const double u2 = uniform01(gen);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace

OrientedBox SceneObject::at(double time) const {
  OrientedBox b = box;
  b.center += velocity * time;
  return b;
}

void SceneSpec::validate() const {
  for (const auto* list : {&static_boxes, &moving_boxes}) {
    for (const auto& obj : *list) {
      if (!(obj.box.size.array() > 0.0).all() || !obj.box.size.allFinite()) {
        throw Error(ErrorCode::SchemaViolation, "box '" + obj.id + "' has a non-positive size");
      }
      if (!obj.velocity.allFinite() || !obj.box.center.allFinite()) {
        throw Error(ErrorCode::SchemaViolation, "box '" + obj.id + "' is not finite");
      }
    }
  }
  if (world_bounds.empty()) throw Error(ErrorCode::SchemaViolation, "world bounds are empty");
}

const SceneObject& SceneSpec::object(std::size_t k) const {
  return k < static_boxes.size() ? static_boxes[k] : moving_boxes.at(k - static_boxes.size());
}

void SpinningLidarSpec::validate() const {
  if (elevations_rad.empty()) throw Error(ErrorCode::SchemaViolation, "lidar has no channels");
  if (!(azimuth_step_rad > 0.0)) throw Error(ErrorCode::SchemaViolation, "azimuth step must be positive");
  if (!(max_range > min_range) || min_range < 0.0) {
    throw Error(ErrorCode::SchemaViolation, "lidar range limits are inconsistent");
  }
  if (range_noise_sigma < 0.0) throw Error(ErrorCode::SchemaViolation, "noise sigma is negative");
}

std::size_t SpinningLidarSpec::azimuth_count() const {
  return static_cast<std::size_t>(std::llround(2.0 * std::numbers::pi / azimuth_step_rad));
}

SpinningLidarSpec SpinningLidarSpec::uniform(std::size_t channels, double min_elevation_rad,
                                             double max_elevation_rad, std::size_t azimuth_count) {
  SpinningLidarSpec spec;
  spec.elevations_rad.resize(channels);
  for (std::size_t c = 0; c < channels; ++c) {
    const double f = channels == 1 ? 0.0 : static_cast<double>(c) / static_cast<double>(channels - 1);
    spec.elevations_rad[c] = min_elevation_rad + f * (max_elevation_rad - min_elevation_rad);
  }
  spec.azimuth_step_rad = 2.0 * std::numbers::pi / static_cast<double>(azimuth_count);
  return spec;
}

std::optional<RayHit> cast_ray(const SceneSpec& scene, const Vec3& origin, const Vec3& direction,
                               double time) {
  std::optional<RayHit> best;
  auto consider = [&](double t, int object) {
    if (t > 0.0 && (!best || t < best->distance)) best = RayHit{t, object};
  };
  for (std::size_t k = 0; k < scene.object_count(); ++k) {
    if (auto t = intersect_box(scene.object(k).at(time), origin, direction)) {
      consider(*t, static_cast<int>(k));
    }
  }
  if (scene.ground_plane && direction.z() < 0.0 && origin.z() > scene.ground_z) {
    consider((scene.ground_z - origin.z()) / direction.z(), -1);
  }
  return best;
}

SimulatedScan simulate_scan(const SceneSpec& scene, const SpinningLidarSpec& lidar,
                            const RigidTransform& sensor_pose, double time, unsigned threads) {
  lidar.validate();
  const std::size_t n_az = lidar.azimuth_count();
  const std::size_t n_ch = lidar.elevations_rad.size();
  const std::uint64_t scan_seed = derive_seed(lidar.noise_seed, std::bit_cast<std::uint64_t>(time));

  struct Row {
    std::vector<Vec3> points;
    std::vector<int> objects;
  };
  std::vector<Row> rows(n_ch);
  parallel_for(n_ch, threads, [&](std::size_t ch) {
    const double el = lidar.elevations_rad[ch];
    for (std::size_t a = 0; a < n_az; ++a) {
      const double az = static_cast<double>(a) * lidar.azimuth_step_rad;
      const Vec3 d_sensor(std::cos(el) * std::cos(az), std::cos(el) * std::sin(az), std::sin(el));
      const Vec3 d_world = sensor_pose.rotate(d_sensor);
      const auto hit = cast_ray(scene, sensor_pose.translation, d_world, time);
      if (!hit) continue;
      double range = hit->distance;
      if (lidar.range_noise_sigma > 0.0) {
        std::mt19937_64 gen(derive_seed(scan_seed, ch * n_az + a));
        range += lidar.range_noise_sigma * gaussian(gen);
      }
      if (range < lidar.min_range || range > lidar.max_range) continue;
      rows[ch].points.push_back(range * d_sensor);
      rows[ch].objects.push_back(hit->object);
    }
  });

  SimulatedScan out;
  out.scan.pose = sensor_pose;
  out.scan.time = time;
  out.scan.frame = Scan::Frame::Sensor;
  for (auto& row : rows) {
    out.scan.points.insert(out.scan.points.end(), row.points.begin(), row.points.end());
    out.hit_object.insert(out.hit_object.end(), row.objects.begin(), row.objects.end());
  }
  out.scan.intensity.assign(out.scan.points.size(), 0.0f);
  out.labels.reserve(out.hit_object.size());
  for (const int k : out.hit_object) {
    const bool moving = k >= 0 && scene.object(static_cast<std::size_t>(k)).moving();
    out.labels.push_back(moving ? MotionClass::Moving : MotionClass::Static);
  }
  return out;
}

GroundTruthState ground_truth_state(const Vec3& point, double time, const Vec3& sensor_origin,
                                    const SceneSpec& scene, double band) {
  const Vec3 delta = point - sensor_origin;
  const double dist = delta.norm();
  if (dist == 0.0) return GroundTruthState::Free;
  const auto hit = cast_ray(scene, sensor_origin, delta / dist, time);
  if (!hit || dist < hit->distance) return GroundTruthState::Free;
  if (dist <= hit->distance + band) return GroundTruthState::Occupied;
  return GroundTruthState::Unknown;
}

OracleStats oracle_compare(const OverlapSet& overlaps, const SceneSpec& scene,
                           const RigidTransform& current_pose, double current_time,
                           const std::vector<AdjacentScan>& adjacents, const SensorConfig& sensor,
                           double boundary_margin) {
  const double band = sensor.occupied_band_length();
  OracleStats stats;
  for (const auto& p : overlaps.points) {
    const AdjacentScan* adj = nullptr;
    for (const auto& a : adjacents) {
      if (a.offset == p.adjacent_scan_offset) adj = &a;
    }
    if (!adj || p.adjacent_point_index >= adj->scan.points.size()) {
      throw Error(ErrorCode::SceneMismatch, "overlap refers to a scan that was not supplied");
    }
    const Beam beam = beam_from_point(adj->scan, p.adjacent_point_index);
    const double r = range_along_beam(beam, p.position);
    if (!(std::abs(r - beam.range) >= boundary_margin) ||
        !(std::abs(r - (beam.range + band)) >= boundary_margin)) {
      ++stats.skipped_near_boundary;
      continue;
    }
    const Vec3 world = current_pose.apply(p.position);
    const Vec3 origin = current_pose.apply(adj->scan.sensor_origin);
    const auto truth = ground_truth_state(world, current_time + p.time, origin, scene, band);
    ++stats.confusion[static_cast<std::size_t>(p.state)][static_cast<std::size_t>(truth)];
    ++stats.compared;
  }
  if (stats.compared > 0) {
    const std::uint64_t agree = stats.confusion[0][0] + stats.confusion[1][1] + stats.confusion[2][2];
    stats.agreement = {100.0 * static_cast<double>(agree) / static_cast<double>(stats.compared), true};
  }
  return stats;
}

}  // namespace top
