#ifndef TOP_OBJECTIVES_HPP
#define TOP_OBJECTIVES_HPP

#include <array>
#include <span>
#include <vector>

#include "top/core_model.hpp"

namespace top {

/// Per-state loss weights, indexed [free, occupied, unknown].
struct ClassWeights {
  double free = 1.0;
  double occupied = 5.0;
  double unknown = 1.0;

  double operator[](OccupancyState s) const;
  void validate() const;
};

/// Predicted distribution over [free, occupied, unknown].
struct StatePrediction {
  std::array<double, 3> probabilities{1.0 / 3, 1.0 / 3, 1.0 / 3};

  double operator[](OccupancyState s) const {
    return probabilities[static_cast<std::size_t>(s)];
  }
};

struct EncodingConfig {
  int dimension = 128;
  double frequency_base = 1e4;
  /// Divisors applied to x, y, z, t before encoding.
  std::array<double, 4> coordinate_scale{70.0, 70.0, 4.5, 3.0};
};

/**
 * Sine-cosine encoding of an (x, y, z, t) location.
 *
 * Each axis owns dimension/4 consecutive slots filled as interleaved
 * (sin, cos) pairs at frequencies base^(-2k / (dimension/4)).
 */
std::vector<double> positional_encoding(const std::array<double, 4>& point,
                                        const EncodingConfig& cfg);

/// Confidence- and class-weighted cross entropy over overlap points.
double overlap_loss(std::span<const OccupancyState> states, std::span<const double> confidences,
                    std::span<const StatePrediction> predictions, const ClassWeights& weights);

/// Class-weighted cross entropy over the reconstruction samples; sample k
/// belongs to current point k / per_beam.
double recon_loss(std::span<const OccupancyState> states,
                  std::span<const StatePrediction> predictions, const ClassWeights& weights,
                  std::size_t n_points, std::size_t per_beam);

double total_loss(double overlap, double recon);

}  // namespace top

#endif  // TOP_OBJECTIVES_HPP
