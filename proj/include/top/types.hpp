#ifndef TOP_TYPES_HPP
#define TOP_TYPES_HPP

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace top {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

/// Every failure the library reports carries one of these codes. The CLI maps
/// them onto exit codes, tests match on them.
enum class ErrorCode {
  ZeroRange,
  NonPositiveReportedRange,
  DegeneratePlane,
  NearParallel,
  BehindSensor,
  NonPositiveStart,
  EmptyScan,
  FrameMismatch,
  MissingPose,
  BadDimension,
  EmptyBatch,
  NonFiniteLoss,
  CountMismatch,
  SingleKeyframe,
  TruncatedFile,
  BadLength,
  MalformedLine,
  NonRigid,
  MagicMismatch,
  VersionUnsupported,
  LengthMismatch,
  SchemaViolation,
  SceneMismatch,
  InvalidConfig,
  IoError,
};

std::string_view error_name(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& detail);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// Rigid transform x' = R x + t.
struct RigidTransform {
  Mat3 rotation = Mat3::Identity();
  Vec3 translation = Vec3::Zero();

  static RigidTransform identity() { return {}; }

  Vec3 apply(const Vec3& p) const { return rotation * p + translation; }
  Vec3 rotate(const Vec3& v) const { return rotation * v; }

  RigidTransform inverse() const {
    RigidTransform inv;
    inv.rotation = rotation.transpose();
    inv.translation = -(inv.rotation * translation);
    return inv;
  }

  /// (*this) ∘ rhs: apply rhs first.
  RigidTransform compose(const RigidTransform& rhs) const {
    RigidTransform out;
    out.rotation = rotation * rhs.rotation;
    out.translation = rotation * rhs.translation + translation;
    return out;
  }

  /// max |RᵀR − I| entry.
  double orthonormality_error() const {
    return (rotation.transpose() * rotation - Mat3::Identity()).cwiseAbs().maxCoeff();
  }

  static RigidTransform from_yaw(double yaw, const Vec3& t) {
    RigidTransform tf;
    tf.rotation = Eigen::AngleAxisd(yaw, Vec3::UnitZ()).toRotationMatrix();
    tf.translation = t;
    return tf;
  }
};

/// Axis-aligned crop region, closed on all sides.
struct Bounds {
  Vec3 min{-70.0, -70.0, -4.5};
  Vec3 max{70.0, 70.0, 4.5};

  bool contains(const Vec3& p) const {
    return (p.array() >= min.array()).all() && (p.array() <= max.array()).all();
  }
  bool empty() const { return (max.array() < min.array()).any(); }
};

}  // namespace top

#endif  // TOP_TYPES_HPP
