#include "top/mos_labeling.hpp"

#include <cmath>

namespace top {

const char* category_name(ObjectCategory c) {
  switch (c) {
    case ObjectCategory::Human: return "HUMAN";
    case ObjectCategory::Cycle: return "CYCLE";
    case ObjectCategory::Vehicle: return "VEHICLE";
  }
  return "?";
}

std::optional<ObjectCategory> parse_category(const std::string& name) {
  if (name == "HUMAN") return ObjectCategory::Human;
  if (name == "CYCLE") return ObjectCategory::Cycle;
  if (name == "VEHICLE") return ObjectCategory::Vehicle;
  return std::nullopt;
}

const char* motion_name(MotionClass m) {
  switch (m) {
    case MotionClass::Static: return "STATIC";
    case MotionClass::Moving: return "MOVING";
    case MotionClass::UnknownMotion: return "UNKNOWN_MOTION";
  }
  return "?";
}

bool OrientedBox::contains(const Vec3& p, double margin) const {
  const Vec3 d = p - center;
  const double c = std::cos(yaw);
  const double s = std::sin(yaw);
  const Vec3 local(c * d.x() + s * d.y(), -s * d.x() + c * d.y(), d.z());
  const Vec3 half = 0.5 * size + Vec3::Constant(margin);
  return (local.cwiseAbs().array() <= half.array()).all();
}

OrientedBox OrientedBox::transformed(const RigidTransform& tf) const {
  OrientedBox out = *this;
  out.center = tf.apply(center);
  const Vec3 heading = tf.rotate(Vec3(std::cos(yaw), std::sin(yaw), 0.0));
  out.yaw = std::atan2(heading.y(), heading.x());
  return out;
}

void TrackedBox::validate() const {
  for (std::size_t k = 0; k < keyframes.size(); ++k) {
    if (!(keyframes[k].box.size.array() > 0.0).all()) {
      throw Error(ErrorCode::SchemaViolation, "track " + instance_id + ": size must be positive");
    }
    if (k > 0 && !(keyframes[k].timestamp > keyframes[k - 1].timestamp)) {
      throw Error(ErrorCode::SchemaViolation,
                  "track " + instance_id + ": timestamps must increase strictly");
    }
  }
}

void ThresholdTable::validate() const {
  for (const auto& t : by_category) {
    if (!(t.static_max > 0.0 && t.static_max < t.moving_min)) {
      throw Error(ErrorCode::InvalidConfig, "thresholds must satisfy 0 < static_max < moving_min");
    }
  }
}

double object_speed(const TrackedBox& box, std::size_t keyframe) {
  const auto& kf = box.keyframes;
  if (kf.size() < 2) {
    throw Error(ErrorCode::SingleKeyframe, "track " + box.instance_id + " has one keyframe");
  }
  if (keyframe >= kf.size()) throw std::out_of_range("keyframe index");
  const std::size_t lo = keyframe == 0 ? 0 : keyframe - 1;
  const std::size_t hi = keyframe + 1 == kf.size() ? keyframe : keyframe + 1;
  return (kf[hi].box.center - kf[lo].box.center).norm() / (kf[hi].timestamp - kf[lo].timestamp);
}

MotionClass classify_motion(double speed, ObjectCategory category, const ThresholdTable& table) {
  const auto& t = table[category];
  if (speed < t.static_max) return MotionClass::Static;
  if (speed > t.moving_min) return MotionClass::Moving;
  return MotionClass::UnknownMotion;
}

MotionClass track_motion(const TrackedBox& box, std::size_t keyframe, const ThresholdTable& table) {
  if (box.keyframes.size() < 2) return MotionClass::UnknownMotion;
  return classify_motion(object_speed(box, keyframe), box.category, table);
}

namespace {
int priority(MotionClass m) {
  switch (m) {
    case MotionClass::Moving: return 2;
    case MotionClass::UnknownMotion: return 1;
    case MotionClass::Static: return 0;
  }
  return 0;
}
}  // namespace

std::vector<MotionClass> label_points(const std::vector<Vec3>& points,
                                      const std::vector<LabeledBox>& boxes, double margin) {
  std::vector<MotionClass> labels(points.size(), MotionClass::Static);
  for (const auto& lb : boxes) {
    if (priority(lb.motion) == 0) continue;
    for (std::size_t k = 0; k < points.size(); ++k) {
      if (priority(lb.motion) > priority(labels[k]) && lb.box.contains(points[k], margin)) {
        labels[k] = lb.motion;
      }
    }
  }
  return labels;
}

std::vector<LabeledBox> boxes_at(const std::vector<TrackedBox>& tracks, int scan_index,
                                 double scan_time, const ThresholdTable& table) {
  std::vector<LabeledBox> out;
  for (const auto& track : tracks) {
    for (std::size_t k = 0; k < track.keyframes.size(); ++k) {
      const auto& kf = track.keyframes[k];
      const bool match = kf.scan ? *kf.scan == scan_index
                                 : std::abs(kf.timestamp - scan_time) <= 1e-6;
      if (match) out.push_back({kf.box, track_motion(track, k, table), track.instance_id});
    }
  }
  return out;
}

}  // namespace top
