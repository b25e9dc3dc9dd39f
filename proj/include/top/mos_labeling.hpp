#ifndef TOP_MOS_LABELING_HPP
#define TOP_MOS_LABELING_HPP

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "top/core_model.hpp"

namespace top {

enum class ObjectCategory : std::uint8_t { Human, Cycle, Vehicle };

/// Per-point MOS label; the numeric values are the on-disk encoding.
enum class MotionClass : std::uint8_t { Static = 0, Moving = 1, UnknownMotion = 2 };

const char* category_name(ObjectCategory c);
std::optional<ObjectCategory> parse_category(const std::string& name);
const char* motion_name(MotionClass m);

/// Oriented box at one instant. `size` is (length, width, height) along the
/// box's local x, y, z; `yaw` rotates local x about +z.
struct OrientedBox {
  Vec3 center = Vec3::Zero();
  Vec3 size = Vec3::Ones();
  double yaw = 0.0;

  bool contains(const Vec3& p, double margin = 0.0) const;
  /// Same box after a rigid transform; only the yaw part of the rotation is
  /// representable, so the transform must keep +z fixed.
  OrientedBox transformed(const RigidTransform& tf) const;
};

struct BoxKeyframe {
  OrientedBox box;
  double timestamp = 0.0;
  std::optional<int> scan;  ///< scan index the annotation belongs to, if known
};

struct TrackedBox {
  std::string instance_id;
  ObjectCategory category = ObjectCategory::Vehicle;
  std::vector<BoxKeyframe> keyframes;  ///< strictly increasing timestamps

  void validate() const;
};

struct SpeedThresholds {
  double static_max = 0.5;  ///< below: static
  double moving_min = 1.0;  ///< above: moving
};

struct ThresholdTable {
  std::array<SpeedThresholds, 3> by_category{
      SpeedThresholds{0.375, 0.6},  // human
      SpeedThresholds{0.375, 1.0},  // cycle
      SpeedThresholds{0.5, 1.0},    // vehicle
  };

  const SpeedThresholds& operator[](ObjectCategory c) const {
    return by_category[static_cast<std::size_t>(c)];
  }
  void validate() const;
};

/// Central difference of the box centers; one-sided at the ends. Throws
/// SingleKeyframe for tracks with one keyframe.
double object_speed(const TrackedBox& box, std::size_t keyframe);

MotionClass classify_motion(double speed, ObjectCategory category, const ThresholdTable& table);

/// Motion class of a track at a keyframe; single-keyframe tracks are unknown.
MotionClass track_motion(const TrackedBox& box, std::size_t keyframe, const ThresholdTable& table);

struct LabeledBox {
  OrientedBox box;
  MotionClass motion = MotionClass::Static;
  std::string instance_id;
};

/// Points inside a box take its motion class (moving beats unknown beats
/// static); points outside all boxes are static. Points and boxes share a frame.
std::vector<MotionClass> label_points(const std::vector<Vec3>& points,
                                      const std::vector<LabeledBox>& boxes, double margin = 0.0);

/// Boxes of all tracks annotated at `scan_index` (or, failing that, at
/// `scan_time` within 1e-6 s), with their motion classes.
std::vector<LabeledBox> boxes_at(const std::vector<TrackedBox>& tracks, int scan_index,
                                 double scan_time, const ThresholdTable& table);

}  // namespace top

#endif  // TOP_MOS_LABELING_HPP
