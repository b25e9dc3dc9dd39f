#include "top/core_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace top {

std::string_view error_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::ZeroRange: return "ZeroRange";
    case ErrorCode::NonPositiveReportedRange: return "NonPositiveReportedRange";
    case ErrorCode::DegeneratePlane: return "DegeneratePlane";
    case ErrorCode::NearParallel: return "NearParallel";
    case ErrorCode::BehindSensor: return "BehindSensor";
    case ErrorCode::NonPositiveStart: return "NonPositiveStart";
    case ErrorCode::EmptyScan: return "EmptyScan";
    case ErrorCode::FrameMismatch: return "FrameMismatch";
    case ErrorCode::MissingPose: return "MissingPose";
    case ErrorCode::BadDimension: return "BadDimension";
    case ErrorCode::EmptyBatch: return "EmptyBatch";
    case ErrorCode::NonFiniteLoss: return "NonFiniteLoss";
    case ErrorCode::CountMismatch: return "CountMismatch";
    case ErrorCode::SingleKeyframe: return "SingleKeyframe";
    case ErrorCode::TruncatedFile: return "TruncatedFile";
    case ErrorCode::BadLength: return "BadLength";
    case ErrorCode::MalformedLine: return "MalformedLine";
    case ErrorCode::NonRigid: return "NonRigid";
    case ErrorCode::MagicMismatch: return "MagicMismatch";
    case ErrorCode::VersionUnsupported: return "VersionUnsupported";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::SchemaViolation: return "SchemaViolation";
    case ErrorCode::SceneMismatch: return "SceneMismatch";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& detail)
    : std::runtime_error(std::string(error_name(code)) + ": " + detail), code_(code) {}

void SensorConfig::validate() const {
  if (!(divergence_angle_rad > 0.0 && divergence_angle_rad < 0.1)) {
    throw Error(ErrorCode::InvalidConfig, "divergence angle must lie in (0, 0.1) rad");
  }
  if (!(occupied_confidence_threshold > 0.0 && occupied_confidence_threshold < 1.0)) {
    throw Error(ErrorCode::InvalidConfig, "occupied confidence threshold must lie in (0, 1)");
  }
  if (!(decay_rate_per_meter > 0.0) || !std::isfinite(decay_rate_per_meter)) {
    throw Error(ErrorCode::InvalidConfig, "decay rate must be positive");
  }
}

double SensorConfig::occupied_band_length() const {
  return -std::log(occupied_confidence_threshold) / decay_rate_per_meter;
}

Scan express_in(const Scan& scan, const RigidTransform& current_pose, double current_time) {
  const RigidTransform rel = current_pose.inverse().compose(scan.pose);
  Scan out;
  out.points.reserve(scan.points.size());
  for (const auto& p : scan.points) out.points.push_back(rel.apply(p));
  out.intensity = scan.intensity;
  out.pose = rel;
  out.sensor_origin = rel.translation;
  out.time = scan.time - current_time;
  out.frame = Scan::Frame::Current;
  return out;
}

std::array<double, 3> one_hot(OccupancyState state) {
  std::array<double, 3> v{0.0, 0.0, 0.0};
  v[static_cast<std::size_t>(state)] = 1.0;
  return v;
}

const char* state_name(OccupancyState state) {
  switch (state) {
    case OccupancyState::Free: return "FREE";
    case OccupancyState::Occupied: return "OCCUPIED";
    case OccupancyState::Unknown: return "UNKNOWN";
  }
  return "?";
}

Beam beam_from_point(const Scan& scan, std::size_t point_index) {
  const Vec3 delta = scan.points.at(point_index) - scan.sensor_origin;
  const double range = delta.norm();
  if (!(range >= 1e-6)) {
    throw Error(ErrorCode::ZeroRange, "point " + std::to_string(point_index) + " coincides with the sensor origin");
  }
  return Beam{scan.sensor_origin, delta / range, range, scan.time};
}

std::vector<Beam> beams_of(const Scan& scan) {
  std::vector<Beam> beams;
  beams.reserve(scan.points.size());
  for (std::size_t i = 0; i < scan.points.size(); ++i) beams.push_back(beam_from_point(scan, i));
  return beams;
}

double beam_radius_at(const SensorConfig& cfg, double range) {
  return range * std::tan(0.5 * cfg.divergence_angle_rad);
}

double range_along_beam(const Beam& beam, const Vec3& point) {
  return (point - beam.origin).dot(beam.direction);
}

double confidence(const SensorConfig& cfg, double range_at_point, double reported_range) {
  if (!(reported_range > 0.0)) {
    throw Error(ErrorCode::NonPositiveReportedRange, "reported range must be positive");
  }
  if (range_at_point <= reported_range) return 1.0;
  // Stays strictly positive even where exp() would underflow.
  return std::max(std::exp(-cfg.decay_rate_per_meter * (range_at_point - reported_range)),
                  std::numeric_limits<double>::denorm_min());
}

OccupancyState occupancy_state(const SensorConfig& cfg, double range_at_point,
                               double reported_range) {
  const double w = confidence(cfg, range_at_point, reported_range);
  if (range_at_point < reported_range) return OccupancyState::Free;
  // Closed at the reported range, where w == 1.
  if (w >= cfg.occupied_confidence_threshold) return OccupancyState::Occupied;
  return OccupancyState::Unknown;
}

}  // namespace top
