#ifndef TOP_EVALUATION_HPP
#define TOP_EVALUATION_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "top/mos_labeling.hpp"

namespace top {

struct EvalObject {
  std::string instance_id;
  OrientedBox box;
};

/// One evaluated scan. All per-point arrays have the same length.
struct EvalScan {
  std::vector<Vec3> points;
  std::vector<std::uint8_t> predicted_moving;  ///< 0 static, 1 moving
  std::vector<MotionClass> ground_truth;
  std::vector<std::uint8_t> ego_mask;          ///< 1 on ego-vehicle points; empty = none
  std::vector<EvalObject> moving_objects;

  void validate() const;
  bool is_ego(std::size_t k) const { return !ego_mask.empty() && ego_mask[k] != 0; }
};

using EvalInput = std::vector<EvalScan>;

struct ConfusionCounts {
  std::uint64_t tp = 0;
  std::uint64_t fp = 0;
  std::uint64_t fn = 0;

  ConfusionCounts& operator+=(const ConfusionCounts& o) {
    tp += o.tp;
    fp += o.fp;
    fn += o.fn;
    return *this;
  }
  bool operator==(const ConfusionCounts&) const = default;
};

/// A percentage with a flag for the undefined (zero-denominator) case, in
/// which `value` is 0.
struct Metric {
  double value = 0.0;
  bool defined = false;
};

struct ObjectRecall {
  std::size_t scan = 0;
  std::string instance_id;
  std::uint64_t tp = 0;
  std::uint64_t fn = 0;

  double recall() const { return static_cast<double>(tp) / static_cast<double>(tp + fn); }
};

struct EvalReport {
  Metric recall_obj;
  Metric iou_wo_ego;
  Metric iou_conventional;
  std::vector<ObjectRecall> per_object;  ///< eligible objects only
  ConfusionCounts counts_wo_ego;
  ConfusionCounts counts_with_ego;
};

/// Per-object recalls, one entry per (scan, object) holding at least one
/// ground-truth moving point. Ego points and unknown-motion points are ignored.
std::vector<ObjectRecall> object_recalls(const EvalInput& input, unsigned threads = 1);

Metric recall_obj(const EvalInput& input, unsigned threads = 1);

/// Global moving-class counts over points whose ground truth is not unknown.
ConfusionCounts moving_counts(const EvalInput& input, bool include_ego, unsigned threads = 1);

Metric iou_percent(const ConfusionCounts& c);
Metric iou_excluding_ego(const EvalInput& input, unsigned threads = 1);
Metric iou_conventional(const EvalInput& input, unsigned threads = 1);

EvalReport evaluate(const EvalInput& input, unsigned threads = 1);

struct CdfPoint {
  std::uint64_t point_count = 0;   ///< objects with at most this many points...
  double object_fraction = 0.0;    ///< ...make up this share of objects
  double point_fraction = 0.0;     ///< ...and hold this share of points
};

struct SizeCdf {
  std::vector<CdfPoint> curve;
  std::vector<std::uint64_t> sorted_counts;
  std::uint64_t total_points = 0;

  /// Share of all points held by the smallest `object_fraction` of objects
  /// (rounded down to whole objects).
  double point_share_of_smallest(double object_fraction) const;
};

SizeCdf object_size_cdf(std::vector<std::uint64_t> counts);

/// Ground-truth moving points inside each moving object box, per (scan, object).
std::vector<std::uint64_t> object_point_counts(const EvalInput& input);

}  // namespace top

#endif  // TOP_EVALUATION_HPP
