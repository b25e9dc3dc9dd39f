#include "top/beam_geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace top {

namespace {
double clamped_acos(double x) { return std::acos(std::clamp(x, -1.0, 1.0)); }
}  // namespace

Vec3 plane_normal(const Vec3& d_current, const Vec3& adjacent_origin, double min_baseline) {
  const double baseline = adjacent_origin.norm();
  if (!(baseline > min_baseline)) {
    throw Error(ErrorCode::DegeneratePlane, "sensor origins coincide");
  }
  const Vec3 m = d_current.cross(adjacent_origin / baseline);
  const double norm = m.norm();
  if (!(norm >= kMinCrossNorm)) {
    throw Error(ErrorCode::DegeneratePlane, "current beam is collinear with the baseline");
  }
  return m / norm;
}

double coplanarity_angle(const Vec3& normal, const Vec3& d_adjacent) {
  return clamped_acos(normal.dot(d_adjacent)) - 0.5 * std::numbers::pi;
}

bool is_coplanar(double coplanarity_angle_rad, const SensorConfig& cfg) {
  return std::abs(coplanarity_angle_rad) <= 0.5 * cfg.divergence_angle_rad;
}

double spatial_angle(const Vec3& d_current, const Vec3& d_adjacent) {
  return clamped_acos(d_current.dot(d_adjacent));
}

std::optional<CenterlineIntersection> try_centerline_intersection(const Vec3& d_current,
                                                                  const Vec3& adjacent_origin,
                                                                  const Vec3& d_adjacent,
                                                                  ErrorCode* reason) {
  const Vec3 m = d_current.cross(d_adjacent);
  const double mm = m.squaredNorm();
  if (!(std::sqrt(mm) >= kMinCrossNorm)) {
    if (reason) *reason = ErrorCode::NearParallel;
    return std::nullopt;
  }
  const double s = adjacent_origin.cross(d_adjacent).dot(m) / mm;
  CenterlineIntersection out;
  out.point = s * d_current;
  out.param_current = out.point.dot(d_current);
  out.param_adjacent = (out.point - adjacent_origin).dot(d_adjacent);
  if (!(out.param_current > 0.0) || !(out.param_adjacent > 0.0)) {
    if (reason) *reason = ErrorCode::BehindSensor;
    return std::nullopt;
  }
  return out;
}

CenterlineIntersection centerline_intersection(const Vec3& d_current, const Vec3& adjacent_origin,
                                               const Vec3& d_adjacent) {
  ErrorCode reason = ErrorCode::NearParallel;
  auto q = try_centerline_intersection(d_current, adjacent_origin, d_adjacent, &reason);
  if (!q) {
    throw Error(reason, reason == ErrorCode::NearParallel ? "beam directions are parallel"
                                                          : "centerlines meet behind a sensor");
  }
  return *q;
}

Scenario classify_scenario(double spatial_angle_rad, const SensorConfig& cfg) {
  return spatial_angle_rad > cfg.divergence_angle_rad ? Scenario::One : Scenario::Two;
}

double segment_start_unchecked(double q_range_current, double q_to_adjacent_origin,
                               double spatial_angle_rad, const SensorConfig& cfg) {
  const double s = std::sin(0.5 * spatial_angle_rad);
  const double t = std::tan(0.5 * cfg.divergence_angle_rad);
  return (q_range_current * (s + t) - q_to_adjacent_origin * t) / (s + 2.0 * t);
}

double segment_start_range(double q_range_current, double q_to_adjacent_origin,
                           double spatial_angle_rad, const SensorConfig& cfg) {
  const double start =
      segment_start_unchecked(q_range_current, q_to_adjacent_origin, spatial_angle_rad, cfg);
  if (!(start > 0.0)) {
    throw Error(ErrorCode::NonPositiveStart, "intersection segment starts behind the sensor");
  }
  return start;
}

std::array<Vec3, 5> sample_scenario2_points(const Vec3& current_hit, const Vec3& adjacent_hit,
                                            const Vec3& q, const Vec3& d_current) {
  const Vec3& o1 = current_hit;
  const Vec3 o2 = adjacent_hit.dot(d_current) * d_current;
  return {o1, o2, 0.5 * (o1 + o2), 0.5 * (o1 + q), 0.5 * (o2 + q)};
}

}  // namespace top
