#include "top/overlap_extraction.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>
#include <tuple>

#include "top/parallel.hpp"
#include "top/rng.hpp"

namespace top {

namespace {

constexpr std::size_t kBeamsPerTask = 512;
constexpr double kFrameTolerance = 1e-9;

void require_current_frame(const Scan& current, const Scan& adjacent) {
  if (current.frame != Scan::Frame::Current || adjacent.frame != Scan::Frame::Current) {
    throw Error(ErrorCode::FrameMismatch, "scans must be expressed in the current frame");
  }
  if (current.sensor_origin.norm() > kFrameTolerance ||
      (current.pose.rotation - Mat3::Identity()).cwiseAbs().maxCoeff() > kFrameTolerance ||
      current.pose.translation.norm() > kFrameTolerance) {
    throw Error(ErrorCode::FrameMismatch, "current scan pose is not the identity");
  }
  if ((adjacent.sensor_origin - adjacent.pose.translation).norm() > kFrameTolerance) {
    throw Error(ErrorCode::FrameMismatch, "adjacent sensor origin disagrees with its pose");
  }
}

struct PairContext {
  const SensorConfig& sensor;
  const Bounds& bounds;
  double tail;
  Vec3 adjacent_origin;
  std::int8_t offset;
};

// Evaluates one coplanar candidate; appends the surviving overlap points.
void emit_pair(const PairContext& ctx, const Beam& cur, std::uint32_t i, const Beam& adj,
               std::uint32_t j, std::vector<OverlapPoint>& out) {
  const auto q = try_centerline_intersection(cur.direction, ctx.adjacent_origin, adj.direction);
  if (!q) return;

  const double alpha = spatial_angle(cur.direction, adj.direction);
  std::array<Vec3, 5> samples;
  std::size_t n_samples = 1;
  if (classify_scenario(alpha, ctx.sensor) == Scenario::One) {
    samples[0] = q->point;
  } else {
    const double start = segment_start_unchecked(
        q->param_current, (q->point - ctx.adjacent_origin).norm(), alpha, ctx.sensor);
    if (!(start > 0.0) || start > q->param_current) return;
    samples = sample_scenario2_points(cur.hit_point(), adj.hit_point(), q->point, cur.direction);
    n_samples = samples.size();
  }

  for (std::size_t k = 0; k < n_samples; ++k) {
    const Vec3& o = samples[k];
    const double r_cur = o.dot(cur.direction);
    if (!(r_cur > 0.0) || r_cur > cur.range + ctx.tail) continue;
    if (!ctx.bounds.contains(o)) continue;
    const double r_adj = range_along_beam(adj, o);
    if (r_adj < 0.0) continue;
    OverlapPoint p;
    p.position = o;
    p.time = adj.time;
    p.confidence = confidence(ctx.sensor, r_adj, adj.range);
    p.state = occupancy_state(ctx.sensor, r_adj, adj.range);
    p.current_point_index = i;
    p.adjacent_scan_offset = ctx.offset;
    p.adjacent_point_index = j;
    p.sample_rank = static_cast<std::uint8_t>(k);
    out.push_back(p);
  }
}

// Walks every coplanar (i, j) pair found through the index, handing each to `visit`.
template <typename Visit>
void for_each_coplanar(const std::vector<Beam>& cur_beams, const std::vector<Beam>& adj_beams,
                       const DirectionIndex& index, const DirectionIndex::BandPlan& plan,
                       const Vec3& adjacent_origin, const SensorConfig& sensor,
                       std::size_t begin, std::size_t end, std::vector<std::uint32_t>& scratch,
                       Visit&& visit) {
  // Without a baseline every reference plane is undefined.
  if (!index.has_pole()) return;
  for (std::size_t i = begin; i < end; ++i) {
    const Beam& cur = cur_beams[i];
    Vec3 normal;
    try {
      normal = plane_normal(cur.direction, adjacent_origin);
    } catch (const Error&) {
      continue;  // no reference plane, so no pair of this beam is coplanar
    }
    scratch.clear();
    index.band_query(cur.direction, plan, scratch);
    for (const std::uint32_t j : scratch) {
      const Beam& adj = adj_beams[j];
      if (!is_coplanar(coplanarity_angle(normal, adj.direction), sensor)) continue;
      visit(static_cast<std::uint32_t>(i), j);
    }
  }
}

std::size_t task_count(std::size_t n) { return (n + kBeamsPerTask - 1) / kBeamsPerTask; }

}  // namespace

void ExtractionConfig::validate(const SensorConfig& sensor) const {
  if (n_adjacent < 1 || n_adjacent > 127) {
    throw Error(ErrorCode::InvalidConfig, "n_adjacent must lie in [1, 127]");
  }
  if (!(scan_period_s > 0.0)) throw Error(ErrorCode::InvalidConfig, "scan period must be positive");
  if (bounds.empty()) throw Error(ErrorCode::InvalidConfig, "crop bounds are empty");
  if (max_tail_beyond_hit_m && !(*max_tail_beyond_hit_m >= 0.0)) {
    throw Error(ErrorCode::InvalidConfig, "tail length must be non-negative");
  }
  if (index_cell_size_rad != 0.0 && !(index_cell_size_rad >= sensor.divergence_angle_rad)) {
    throw Error(ErrorCode::InvalidConfig, "index cell size must be at least the divergence angle");
  }
}

double ExtractionConfig::tail(const SensorConfig& sensor) const {
  return max_tail_beyond_hit_m.value_or(sensor.occupied_band_length());
}

double ExtractionConfig::cell_size(const SensorConfig& sensor) const {
  if (index_cell_size_rad > 0.0) return index_cell_size_rad;
  return std::max(sensor.divergence_angle_rad, 0.01);
}

bool canonical_less(const OverlapPoint& a, const OverlapPoint& b) {
  return std::tie(a.current_point_index, a.adjacent_scan_offset, a.adjacent_point_index,
                  a.sample_rank) < std::tie(b.current_point_index, b.adjacent_scan_offset,
                                            b.adjacent_point_index, b.sample_rank);
}

std::array<std::size_t, 3> OverlapSet::counts() const {
  std::array<std::size_t, 3> c{0, 0, 0};
  for (const auto& p : points) ++c[static_cast<std::size_t>(p.state)];
  return c;
}

std::vector<std::pair<std::uint32_t, std::uint32_t>> coplanar_pairs(
    const Scan& current, const Scan& adjacent, const ExtractionConfig& cfg,
    const SensorConfig& sensor, unsigned threads) {
  require_current_frame(current, adjacent);
  std::vector<std::pair<std::uint32_t, std::uint32_t>> pairs;
  if (current.points.empty() || adjacent.points.empty()) return pairs;

  const auto cur_beams = beams_of(current);
  const auto adj_beams = beams_of(adjacent);
  const auto index = DirectionIndex::build(adjacent, cfg.cell_size(sensor));
  const auto plan = index.plan_band(0.5 * sensor.divergence_angle_rad);

  const std::size_t n_tasks = task_count(cur_beams.size());
  std::vector<std::vector<std::pair<std::uint32_t, std::uint32_t>>> parts(n_tasks);
  parallel_for(n_tasks, threads, [&](std::size_t t) {
    std::vector<std::uint32_t> scratch;
    const std::size_t begin = t * kBeamsPerTask;
    const std::size_t end = std::min(cur_beams.size(), begin + kBeamsPerTask);
    for_each_coplanar(cur_beams, adj_beams, index, plan, adjacent.sensor_origin, sensor, begin,
                      end, scratch,
                      [&](std::uint32_t i, std::uint32_t j) { parts[t].emplace_back(i, j); });
  });
  for (auto& part : parts) pairs.insert(pairs.end(), part.begin(), part.end());
  std::sort(pairs.begin(), pairs.end());
  return pairs;
}

std::vector<OverlapPoint> extract_scan_pair(const Scan& current, const Scan& adjacent,
                                            int adjacent_offset, const ExtractionConfig& cfg,
                                            const SensorConfig& sensor, unsigned threads) {
  require_current_frame(current, adjacent);
  if (adjacent.time == current.time) {
    throw Error(ErrorCode::InvalidConfig, "adjacent scan shares the current timestamp");
  }
  if (adjacent_offset == 0 || adjacent_offset < -127 || adjacent_offset > 127) {
    throw Error(ErrorCode::InvalidConfig, "adjacent offset must be a non-zero int8");
  }
  std::vector<OverlapPoint> out;
  if (current.points.empty() || adjacent.points.empty()) return out;

  const auto cur_beams = beams_of(current);
  const auto adj_beams = beams_of(adjacent);
  const auto index = DirectionIndex::build(adjacent, cfg.cell_size(sensor));
  const auto plan = index.plan_band(0.5 * sensor.divergence_angle_rad);
  const PairContext ctx{sensor, cfg.bounds, cfg.tail(sensor), adjacent.sensor_origin,
                        static_cast<std::int8_t>(adjacent_offset)};

  const std::size_t n_tasks = task_count(cur_beams.size());
  std::vector<std::vector<OverlapPoint>> parts(n_tasks);
  parallel_for(n_tasks, threads, [&](std::size_t t) {
    std::vector<std::uint32_t> scratch;
    const std::size_t begin = t * kBeamsPerTask;
    const std::size_t end = std::min(cur_beams.size(), begin + kBeamsPerTask);
    auto& part = parts[t];
    for_each_coplanar(cur_beams, adj_beams, index, plan, adjacent.sensor_origin, sensor, begin,
                      end, scratch, [&](std::uint32_t i, std::uint32_t j) {
                        emit_pair(ctx, cur_beams[i], i, adj_beams[j], j, part);
                      });
    std::sort(part.begin(), part.end(), canonical_less);
  });
  // Tasks cover ascending, disjoint beam ranges, so concatenation is sorted.
  std::size_t total = 0;
  for (const auto& part : parts) total += part.size();
  out.reserve(total);
  for (auto& part : parts) out.insert(out.end(), part.begin(), part.end());
  return out;
}

OverlapSet extract_sequence(const Scan& current, const std::vector<AdjacentScan>& adjacents,
                            const ExtractionConfig& cfg, const SensorConfig& sensor,
                            unsigned threads) {
  sensor.validate();
  cfg.validate(sensor);
  std::vector<int> offsets;
  for (const auto& adj : adjacents) offsets.push_back(adj.offset);
  std::sort(offsets.begin(), offsets.end());
  std::vector<int> expected;
  for (int k = -cfg.n_adjacent; k <= cfg.n_adjacent; ++k) {
    if (k != 0) expected.push_back(k);
  }
  if (offsets != expected) {
    throw Error(ErrorCode::MissingPose, "expected " + std::to_string(2 * cfg.n_adjacent) +
                                            " adjacent scans at offsets -n..n");
  }

  OverlapSet set;
  std::vector<const AdjacentScan*> ordered;
  for (const auto& adj : adjacents) ordered.push_back(&adj);
  std::sort(ordered.begin(), ordered.end(),
            [](const AdjacentScan* a, const AdjacentScan* b) { return a->offset < b->offset; });
  for (const AdjacentScan* adj : ordered) {
    if (adj->scan.pose.orthonormality_error() > 1e-6) {
      throw Error(ErrorCode::MissingPose, "adjacent scan " + std::to_string(adj->offset) +
                                              " has no valid rigid pose");
    }
    auto part = extract_scan_pair(current, adj->scan, adj->offset, cfg, sensor, threads);
    set.points.insert(set.points.end(), part.begin(), part.end());
  }
  std::sort(set.points.begin(), set.points.end(), canonical_less);

  if (cfg.max_overlaps_per_beam) {
    const std::uint32_t cap = *cfg.max_overlaps_per_beam;
    std::vector<OverlapPoint> kept;
    kept.reserve(set.points.size());
    std::size_t run = 0;
    for (std::size_t k = 0; k < set.points.size(); ++k) {
      if (k == 0 || set.points[k].current_point_index != set.points[k - 1].current_point_index) {
        run = 0;
      }
      if (run++ < cap) kept.push_back(set.points[k]);
    }
    set.points = std::move(kept);
  }
  return set;
}

OverlapSet balance_classes(const OverlapSet& set, std::uint64_t seed) {
  std::array<std::vector<std::size_t>, 3> by_state;
  for (std::size_t k = 0; k < set.points.size(); ++k) {
    by_state[static_cast<std::size_t>(set.points[k].state)].push_back(k);
  }
  const std::size_t occupied = by_state[1].size();
  const std::array<std::size_t, 3> wanted{5 * occupied, occupied, occupied};

  std::vector<std::size_t> keep = by_state[1];
  for (const std::size_t s : {std::size_t{0}, std::size_t{2}}) {
    auto& pool = by_state[s];
    const std::size_t take = std::min(wanted[s], pool.size());
    std::mt19937_64 gen(derive_seed(seed, s));
    // Partial Fisher-Yates: the first `take` slots become the sample.
    for (std::size_t k = 0; k < take; ++k) {
      const std::size_t pick = k + uniform_index(gen, pool.size() - k);
      std::swap(pool[k], pool[pick]);
    }
    keep.insert(keep.end(), pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(take));
  }
  std::sort(keep.begin(), keep.end());

  OverlapSet out;
  out.points.reserve(keep.size());
  for (const std::size_t k : keep) out.points.push_back(set.points[k]);
  return out;
}

}  // namespace top
