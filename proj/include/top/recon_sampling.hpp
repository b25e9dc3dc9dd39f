#ifndef TOP_RECON_SAMPLING_HPP
#define TOP_RECON_SAMPLING_HPP

#include <cstdint>
#include <vector>

#include "top/core_model.hpp"

namespace top {

struct ReconSample {
  Vec3 position = Vec3::Zero();
  double time = 0.0;
  OccupancyState state = OccupancyState::Free;
  std::uint32_t current_point_index = 0;
};

struct ReconSamplingConfig {
  std::uint32_t occupied_per_beam = 5;
  std::uint32_t free_per_beam = 25;

  std::uint32_t per_beam() const { return occupied_per_beam + free_per_beam; }
};

/**
 * Occupancy reconstruction targets along each beam of the current scan.
 *
 * Per beam, free samples are uniform in (0, r) and occupied samples uniform in
 * the occupied band [r, r + band]. Each beam draws from its own generator
 * seeded from (seed, beam index), so the output does not depend on `threads`.
 * Output is grouped by beam: occupied samples first, then free ones.
 */
std::vector<ReconSample> sample_recon_points(const Scan& current, const ReconSamplingConfig& cfg,
                                             const SensorConfig& sensor, std::uint64_t seed,
                                             unsigned threads = 1);

}  // namespace top

#endif  // TOP_RECON_SAMPLING_HPP
