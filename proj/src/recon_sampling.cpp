#include "top/recon_sampling.hpp"

#include <random>

#include "top/parallel.hpp"
#include "top/rng.hpp"

namespace top {

std::vector<ReconSample> sample_recon_points(const Scan& current, const ReconSamplingConfig& cfg,
                                             const SensorConfig& sensor, std::uint64_t seed,
                                             unsigned threads) {
  const auto beams = beams_of(current);
  const std::size_t per_beam = cfg.per_beam();
  const double band = sensor.occupied_band_length();
  std::vector<ReconSample> out(beams.size() * per_beam);

  constexpr std::size_t kChunk = 1024;
  const std::size_t n_tasks = (beams.size() + kChunk - 1) / kChunk;
  parallel_for(n_tasks, threads, [&](std::size_t task) {
    const std::size_t end = std::min(beams.size(), (task + 1) * kChunk);
    for (std::size_t i = task * kChunk; i < end; ++i) {
      const Beam& b = beams[i];
      std::mt19937_64 gen(derive_seed(seed, i));
      ReconSample* slot = out.data() + i * per_beam;
      for (std::uint32_t k = 0; k < cfg.per_beam(); ++k, ++slot) {
        const bool occupied = k < cfg.occupied_per_beam;
        const OccupancyState wanted = occupied ? OccupancyState::Occupied : OccupancyState::Free;
        // Occupied ranges are uniform in [r, r + band), free ranges in (0, r).
        // Draws that round onto the wrong side of a boundary are redrawn so the
        // stored position always re-labels to its state.
        Vec3 position;
        for (;;) {
          const double u = uniform01(gen);
          const double range = occupied ? b.range + band * u : b.range * u;
          position = b.origin + range * b.direction;
          const double back = range_along_beam(b, position);
          if (back > 0.0 && occupancy_state(sensor, back, b.range) == wanted) break;
        }
        slot->position = position;
        slot->state = wanted;
        slot->time = current.time;
        slot->current_point_index = static_cast<std::uint32_t>(i);
      }
    }
  });
  return out;
}

}  // namespace top
