#ifndef TOP_DIRECTION_INDEX_HPP
#define TOP_DIRECTION_INDEX_HPP

#include <cstdint>
#include <vector>

#include "top/core_model.hpp"

namespace top {

/**
 * Spherical grid over the beam directions of one adjacent scan.
 *
 * The grid's pole is the baseline direction from the current sensor origin to
 * the adjacent one. Every reference plane of the coplanarity test contains
 * that baseline, so in pole coordinates (polar angle phi, azimuth psi) the
 * coplanar band of a current beam at azimuth psi_i is
 *
 *     sin(phi) * |sin(psi - psi_i)| <= sin(divergence / 2),
 *
 * a pair of meridian strips whose half-width only depends on the row. The
 * band query therefore visits a fixed, precomputed azimuth window per row.
 * When the baseline is degenerate there is no pole and queries return every
 * beam.
 */
class DirectionIndex {
 public:
  /// Cells are at least `cell_size_rad` on each side. Throws EmptyScan.
  static DirectionIndex build(const Scan& adjacent, double cell_size_rad,
                              double min_baseline = 1e-3);

  /// Per-row azimuth half-widths for one band width; immutable and shareable
  /// across threads.
  struct BandPlan {
    double half_width_rad = 0.0;
    std::vector<double> row_delta;
  };

  BandPlan plan_band(double half_width_rad) const;

  /// Appends a superset of the beams within the planned half-width of the
  /// reference plane spanned by `d_current` and the baseline.
  void band_query(const Vec3& d_current, const BandPlan& plan,
                  std::vector<std::uint32_t>& out) const;
  void band_query(const Vec3& d_current, double half_width_rad,
                  std::vector<std::uint32_t>& out) const {
    band_query(d_current, plan_band(half_width_rad), out);
  }

  std::size_t beam_count() const { return beams_.size(); }
  std::size_t occupied_cells() const;
  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  double cell_height() const { return row_height_; }
  double cell_width() const { return col_width_; }
  bool has_pole() const { return has_pole_; }
  const Vec3& adjacent_origin() const { return origin_; }

  /// Cell (row, col) holding a direction.
  std::pair<std::size_t, std::size_t> cell_of(const Vec3& direction) const;

 private:
  void append_all(std::vector<std::uint32_t>& out) const;
  void append_row_window(std::size_t row, double lo, double hi,
                         std::vector<std::uint32_t>& out) const;

  Vec3 origin_ = Vec3::Zero();
  Vec3 pole_ = Vec3::UnitZ();
  Vec3 e1_ = Vec3::UnitX();
  Vec3 e2_ = Vec3::UnitY();
  bool has_pole_ = false;
  std::size_t rows_ = 1;
  std::size_t cols_ = 1;
  double row_height_ = 0.0;
  double col_width_ = 0.0;
  std::vector<std::uint32_t> cell_start_;  // CSR offsets, rows*cols + 1
  std::vector<std::uint32_t> beams_;
  std::vector<double> row_min_sin_;
  std::vector<std::size_t> nonempty_rows_;
};

/// Adjacent beams that may satisfy the coplanarity test with `current_beam`.
/// Falls back to every beam when the reference plane is undefined.
std::vector<std::uint32_t> candidate_pairs(const Beam& current_beam, const DirectionIndex& index,
                                           const Vec3& adjacent_origin, const SensorConfig& sensor);

}  // namespace top

#endif  // TOP_DIRECTION_INDEX_HPP
