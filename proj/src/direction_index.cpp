#include "top/direction_index.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "top/beam_geometry.hpp"

namespace top {

namespace {

constexpr double kPi = std::numbers::pi;
// Slack absorbing rounding in the pole-frame angles; far below any cell size.
constexpr double kAngleSlack = 1e-6;
// Below this distance from the pole the beam azimuth is ill-conditioned.
constexpr double kMinPoleDistance = 1e-4;

struct PoleCoords {
  double phi;
  double psi;
  double rho;
};

}  // namespace

DirectionIndex DirectionIndex::build(const Scan& adjacent, double cell_size_rad,
                                     double min_baseline) {
  if (adjacent.points.empty()) throw Error(ErrorCode::EmptyScan, "adjacent scan has no points");
  if (!(cell_size_rad > 0.0)) throw Error(ErrorCode::InvalidConfig, "cell size must be positive");

  DirectionIndex idx;
  idx.origin_ = adjacent.sensor_origin;
  const double baseline = idx.origin_.norm();
  idx.has_pole_ = baseline > min_baseline;
  if (idx.has_pole_) {
    idx.pole_ = idx.origin_ / baseline;
    // Any orthonormal completion works; pick the axis least aligned with the pole.
    Eigen::Index axis = 0;
    idx.pole_.cwiseAbs().minCoeff(&axis);
    idx.e1_ = idx.pole_.cross(Vec3::Unit(axis)).normalized();
    idx.e2_ = idx.pole_.cross(idx.e1_);
  }

  idx.rows_ = std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(kPi / cell_size_rad)));
  idx.cols_ =
      std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(2.0 * kPi / cell_size_rad)));
  idx.row_height_ = kPi / static_cast<double>(idx.rows_);
  idx.col_width_ = 2.0 * kPi / static_cast<double>(idx.cols_);

  const std::size_t n_cells = idx.rows_ * idx.cols_;
  std::vector<std::uint32_t> cell_of_beam(adjacent.points.size());
  std::vector<std::uint32_t> counts(n_cells + 1, 0);
  for (std::size_t j = 0; j < adjacent.points.size(); ++j) {
    const Beam b = beam_from_point(adjacent, j);
    const auto [r, c] = idx.cell_of(b.direction);
    cell_of_beam[j] = static_cast<std::uint32_t>(r * idx.cols_ + c);
    ++counts[cell_of_beam[j] + 1];
  }
  for (std::size_t k = 1; k <= n_cells; ++k) counts[k] += counts[k - 1];
  idx.cell_start_ = counts;
  idx.beams_.resize(adjacent.points.size());
  // Stable fill keeps beam indices ascending inside each cell.
  for (std::size_t j = 0; j < adjacent.points.size(); ++j) {
    idx.beams_[counts[cell_of_beam[j]]++] = static_cast<std::uint32_t>(j);
  }

  idx.row_min_sin_.resize(idx.rows_);
  for (std::size_t r = 0; r < idx.rows_; ++r) {
    const double lo = static_cast<double>(r) * idx.row_height_;
    const double hi = std::min(kPi, static_cast<double>(r + 1) * idx.row_height_);
    const bool non_empty = idx.cell_start_[(r + 1) * idx.cols_] > idx.cell_start_[r * idx.cols_];
    idx.row_min_sin_[r] = std::max(0.0, std::min(std::sin(lo), std::sin(hi)) - kAngleSlack);
    if (non_empty) idx.nonempty_rows_.push_back(r);
  }
  return idx;
}

std::pair<std::size_t, std::size_t> DirectionIndex::cell_of(const Vec3& direction) const {
  double phi;
  double psi;
  if (has_pole_) {
    const double x = direction.dot(e1_);
    const double y = direction.dot(e2_);
    phi = std::atan2(std::hypot(x, y), direction.dot(pole_));
    psi = std::atan2(y, x);
  } else {
    phi = std::atan2(std::hypot(direction.x(), direction.y()), direction.z());
    psi = std::atan2(direction.y(), direction.x());
  }
  const auto r = std::min(rows_ - 1, static_cast<std::size_t>(std::max(0.0, phi / row_height_)));
  const auto c = std::min(cols_ - 1, static_cast<std::size_t>(std::max(0.0, (psi + kPi) / col_width_)));
  return {r, c};
}

std::size_t DirectionIndex::occupied_cells() const {
  std::size_t n = 0;
  for (std::size_t k = 0; k + 1 < cell_start_.size(); ++k) n += cell_start_[k + 1] > cell_start_[k];
  return n;
}

DirectionIndex::BandPlan DirectionIndex::plan_band(double half_width_rad) const {
  BandPlan plan;
  plan.half_width_rad = half_width_rad;
  plan.row_delta.resize(rows_);
  const double s = std::sin(std::min(half_width_rad, 0.5 * kPi)) + 1e-12;
  for (std::size_t r = 0; r < rows_; ++r) {
    const double m = row_min_sin_[r];
    plan.row_delta[r] = (m <= s) ? kPi : std::asin(s / m) + kAngleSlack;
  }
  return plan;
}

void DirectionIndex::append_all(std::vector<std::uint32_t>& out) const {
  out.insert(out.end(), beams_.begin(), beams_.end());
}

void DirectionIndex::append_row_window(std::size_t row, double lo, double hi,
                                       std::vector<std::uint32_t>& out) const {
  const auto cols = static_cast<long long>(cols_);
  const long long c0 = static_cast<long long>(std::floor((lo + kPi) / col_width_));
  const long long c1 = static_cast<long long>(std::floor((hi + kPi) / col_width_));
  const std::size_t base = row * cols_;
  if (c1 - c0 + 1 >= cols) {
    out.insert(out.end(), beams_.begin() + cell_start_[base], beams_.begin() + cell_start_[base + cols_]);
    return;
  }
  for (long long c = c0; c <= c1; ++c) {
    const auto col = static_cast<std::size_t>(((c % cols) + cols) % cols);
    out.insert(out.end(), beams_.begin() + cell_start_[base + col],
               beams_.begin() + cell_start_[base + col + 1]);
  }
}

void DirectionIndex::band_query(const Vec3& d_current, const BandPlan& plan,
                                std::vector<std::uint32_t>& out) const {
  if (!has_pole_) {
    append_all(out);
    return;
  }
  const double x = d_current.dot(e1_);
  const double y = d_current.dot(e2_);
  if (std::hypot(x, y) < kMinPoleDistance) {
    append_all(out);
    return;
  }
  const double psi = std::atan2(y, x);
  for (const std::size_t r : nonempty_rows_) {
    const double delta = plan.row_delta[r];
    if (2.0 * delta + 4.0 * col_width_ >= kPi) {
      append_row_window(r, -kPi, kPi, out);
      continue;
    }
    append_row_window(r, psi - delta, psi + delta, out);
    append_row_window(r, psi + kPi - delta, psi + kPi + delta, out);
  }
}

std::vector<std::uint32_t> candidate_pairs(const Beam& current_beam, const DirectionIndex& index,
                                           const Vec3& adjacent_origin, const SensorConfig& sensor) {
  if ((adjacent_origin - index.adjacent_origin()).norm() > 1e-9) {
    throw Error(ErrorCode::FrameMismatch, "index was built for a different adjacent origin");
  }
  std::vector<std::uint32_t> out;
  bool plane_defined = true;
  try {
    plane_normal(current_beam.direction, adjacent_origin);
  } catch (const Error&) {
    plane_defined = false;
  }
  if (!plane_defined) {
    index.band_query(current_beam.direction, 4.0, out);  // half-width beyond pi/2: every beam
    return out;
  }
  index.band_query(current_beam.direction, 0.5 * sensor.divergence_angle_rad, out);
  return out;
}

}  // namespace top
