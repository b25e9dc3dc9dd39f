#include <gtest/gtest.h>

#include <random>

#include "test_support.hpp"
#include "top/recon_sampling.hpp"

using namespace top;
using namespace top::testing;

namespace {

Scan random_current(std::mt19937_64& gen, std::size_t n) {
  std::uniform_real_distribution<double> range(0.5, 80.0);
  std::vector<Vec3> pts;
  for (std::size_t k = 0; k < n; ++k) pts.push_back(range(gen) * random_unit(gen));
  return make_current_scan(pts);
}

}  // namespace

TEST(ReconSampling, CountsAndStatesPerBeam) {
  std::mt19937_64 gen(1);
  const auto cur = random_current(gen, 700);
  SensorConfig sensor;
  const auto s = sample_recon_points(cur, ReconSamplingConfig{}, sensor, 42);
  ASSERT_EQ(s.size(), 700u * 30u);
  for (std::size_t i = 0; i < 700; ++i) {
    int occ = 0;
    int fr = 0;
    for (std::size_t k = 0; k < 30; ++k) {
      const auto& x = s[i * 30 + k];
      EXPECT_EQ(x.current_point_index, i);
      occ += x.state == OccupancyState::Occupied;
      fr += x.state == OccupancyState::Free;
    }
    EXPECT_EQ(occ, 5);
    EXPECT_EQ(fr, 25);
  }
}

// Re-verification: each sample lies on its beam and re-labels to its state.
TEST(ReconSampling, SamplesReLabelToTheirState) {
  std::mt19937_64 gen(2);
  const auto cur = random_current(gen, 500);
  SensorConfig sensor;
  const double band = sensor.occupied_band_length();
  const auto s = sample_recon_points(cur, ReconSamplingConfig{}, sensor, 7);
  for (const auto& x : s) {
    const Vec3 p = cur.points[x.current_point_index];
    const double r = p.norm();
    const Vec3 d = p / r;
    const double along = x.position.dot(d);
    EXPECT_LE((x.position - along * d).norm(), 1e-9 * (1.0 + r));
    if (x.state == OccupancyState::Free) {
      EXPECT_GT(along, 0.0);
      EXPECT_LT(along, r);
    } else {
      EXPECT_GE(along, r - 1e-9);
      EXPECT_LE(along, r + band + 1e-9);
    }
    EXPECT_EQ(occupancy_state(sensor, along, r), x.state);
  }
}

TEST(ReconSampling, DeterministicAndSeeded) {
  std::mt19937_64 gen(3);
  const auto cur = random_current(gen, 3000);
  const auto a = sample_recon_points(cur, ReconSamplingConfig{}, SensorConfig{}, 11, 1);
  const auto b = sample_recon_points(cur, ReconSamplingConfig{}, SensorConfig{}, 11, 4);
  const auto c = sample_recon_points(cur, ReconSamplingConfig{}, SensorConfig{}, 12, 1);
  ASSERT_EQ(a.size(), b.size());
  bool differs = false;
  for (std::size_t k = 0; k < a.size(); ++k) {
    EXPECT_EQ(a[k].position, b[k].position);
    differs |= a[k].position != c[k].position;
  }
  EXPECT_TRUE(differs);
}

TEST(ReconSampling, FreeRangesCoverTheBeam) {
  // One long beam: the free draws should spread across (0, r).
  const auto cur = make_current_scan({Vec3(50, 0, 0)});
  ReconSamplingConfig cfg;
  cfg.occupied_per_beam = 0;
  cfg.free_per_beam = 4000;
  const auto s = sample_recon_points(cur, cfg, SensorConfig{}, 5);
  double sum = 0.0;
  double lo = 1e9;
  double hi = 0.0;
  for (const auto& x : s) {
    sum += x.position.x();
    lo = std::min(lo, x.position.x());
    hi = std::max(hi, x.position.x());
  }
  EXPECT_NEAR(sum / 4000.0, 25.0, 1.0);
  EXPECT_LT(lo, 1.0);
  EXPECT_GT(hi, 49.0);
}

TEST(ReconSampling, EmptyScan) {
  EXPECT_TRUE(sample_recon_points(make_current_scan({}), ReconSamplingConfig{}, SensorConfig{}, 1).empty());
}
