#include "top/evaluation.hpp"

#include <algorithm>
#include <cmath>

#include "top/parallel.hpp"

namespace top {

void EvalScan::validate() const {
  const std::size_t n = points.size();
  if (predicted_moving.size() != n || ground_truth.size() != n ||
      (!ego_mask.empty() && ego_mask.size() != n)) {
    throw Error(ErrorCode::LengthMismatch, "per-point arrays of a scan differ in length");
  }
}

std::vector<ObjectRecall> object_recalls(const EvalInput& input, unsigned threads) {
  for (const auto& scan : input) scan.validate();
  std::vector<std::vector<ObjectRecall>> per_scan(input.size());
  parallel_for(input.size(), threads, [&](std::size_t s) {
    const auto& scan = input[s];
    for (const auto& obj : scan.moving_objects) {
      ObjectRecall r{s, obj.instance_id, 0, 0};
      for (std::size_t k = 0; k < scan.points.size(); ++k) {
        if (scan.ground_truth[k] != MotionClass::Moving || scan.is_ego(k)) continue;
        if (!obj.box.contains(scan.points[k])) continue;
        (scan.predicted_moving[k] ? r.tp : r.fn)++;
      }
      if (r.tp + r.fn > 0) per_scan[s].push_back(std::move(r));
    }
  });
  std::vector<ObjectRecall> out;
  for (auto& v : per_scan) out.insert(out.end(), v.begin(), v.end());
  return out;
}

Metric recall_obj(const EvalInput& input, unsigned threads) {
  const auto objects = object_recalls(input, threads);
  if (objects.empty()) return {};
  double sum = 0.0;
  for (const auto& o : objects) sum += o.recall();
  return {100.0 * sum / static_cast<double>(objects.size()), true};
}

ConfusionCounts moving_counts(const EvalInput& input, bool include_ego, unsigned threads) {
  for (const auto& scan : input) scan.validate();
  std::vector<ConfusionCounts> per_scan(input.size());
  parallel_for(input.size(), threads, [&](std::size_t s) {
    const auto& scan = input[s];
    ConfusionCounts c;
    for (std::size_t k = 0; k < scan.points.size(); ++k) {
      const MotionClass gt = scan.ground_truth[k];
      if (gt == MotionClass::UnknownMotion) continue;
      if (!include_ego && scan.is_ego(k)) continue;
      const bool pred = scan.predicted_moving[k] != 0;
      const bool truth = gt == MotionClass::Moving;
      if (pred && truth) ++c.tp;
      else if (pred) ++c.fp;
      else if (truth) ++c.fn;
    }
    per_scan[s] = c;
  });
  ConfusionCounts total;
  for (const auto& c : per_scan) total += c;
  return total;
}

Metric iou_percent(const ConfusionCounts& c) {
  const std::uint64_t denom = c.tp + c.fp + c.fn;
  if (denom == 0) return {};
  return {100.0 * static_cast<double>(c.tp) / static_cast<double>(denom), true};
}

Metric iou_excluding_ego(const EvalInput& input, unsigned threads) {
  return iou_percent(moving_counts(input, false, threads));
}

Metric iou_conventional(const EvalInput& input, unsigned threads) {
  return iou_percent(moving_counts(input, true, threads));
}

EvalReport evaluate(const EvalInput& input, unsigned threads) {
  EvalReport report;
  report.per_object = object_recalls(input, threads);
  if (!report.per_object.empty()) {
    double sum = 0.0;
    for (const auto& o : report.per_object) sum += o.recall();
    report.recall_obj = {100.0 * sum / static_cast<double>(report.per_object.size()), true};
  }
  report.counts_wo_ego = moving_counts(input, false, threads);
  report.counts_with_ego = moving_counts(input, true, threads);
  report.iou_wo_ego = iou_percent(report.counts_wo_ego);
  report.iou_conventional = iou_percent(report.counts_with_ego);
  return report;
}

double SizeCdf::point_share_of_smallest(double object_fraction) const {
  if (sorted_counts.empty() || total_points == 0) return 0.0;
  const auto m = static_cast<double>(sorted_counts.size());
  const auto k = static_cast<std::size_t>(
      std::clamp(std::floor(object_fraction * m + 1e-9), 0.0, m));
  std::uint64_t held = 0;
  for (std::size_t i = 0; i < k; ++i) held += sorted_counts[i];
  return static_cast<double>(held) / static_cast<double>(total_points);
}

SizeCdf object_size_cdf(std::vector<std::uint64_t> counts) {
  SizeCdf cdf;
  std::sort(counts.begin(), counts.end());
  for (const auto c : counts) cdf.total_points += c;
  const auto m = static_cast<double>(counts.size());
  std::uint64_t running = 0;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    running += counts[i];
    if (i + 1 < counts.size() && counts[i + 1] == counts[i]) continue;
    CdfPoint p;
    p.point_count = counts[i];
    p.object_fraction = static_cast<double>(i + 1) / m;
    p.point_fraction = cdf.total_points == 0
                           ? 0.0
                           : static_cast<double>(running) / static_cast<double>(cdf.total_points);
    cdf.curve.push_back(p);
  }
  cdf.sorted_counts = std::move(counts);
  return cdf;
}

std::vector<std::uint64_t> object_point_counts(const EvalInput& input) {
  std::vector<std::uint64_t> counts;
  for (const auto& scan : input) {
    for (const auto& obj : scan.moving_objects) {
      std::uint64_t n = 0;
      for (std::size_t k = 0; k < scan.points.size(); ++k) {
        if (scan.ground_truth[k] == MotionClass::Moving && obj.box.contains(scan.points[k])) ++n;
      }
      if (n > 0) counts.push_back(n);
    }
  }
  return counts;
}

}  // namespace top
