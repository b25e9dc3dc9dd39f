#include <gtest/gtest.h>

#include <algorithm>
#include <random>
#include <set>

#include "test_support.hpp"
#include "top/direction_index.hpp"
#include "top/lidar_sim.hpp"

using namespace top;
using namespace top::testing;

namespace {

Scan adjacent_with(const Vec3& origin, const std::vector<Vec3>& directions) {
  std::vector<Vec3> pts;
  for (const auto& d : directions) pts.push_back(origin + 10.0 * d.normalized());
  return make_adjacent_scan(pts, origin, -0.1);
}

std::set<std::uint32_t> query(const DirectionIndex& index, const Vec3& d, double hw) {
  std::vector<std::uint32_t> out;
  index.band_query(d, hw, out);
  return {out.begin(), out.end()};
}

}  // namespace

TEST(DirectionIndex, SingleBeam) {
  const auto index = DirectionIndex::build(adjacent_with(Vec3(1, 0, 0), {Vec3(0, 1, 0)}), 0.01);
  EXPECT_EQ(index.beam_count(), 1u);
  EXPECT_EQ(index.occupied_cells(), 1u);
}

TEST(DirectionIndex, AntipodalBeamsUseDistinctCells) {
  const auto index =
      DirectionIndex::build(adjacent_with(Vec3(1, 0, 0), {Vec3(0, 1, 0.2), Vec3(0, -1, -0.2)}), 0.01);
  EXPECT_EQ(index.occupied_cells(), 2u);
  EXPECT_NE(index.cell_of(Vec3(0, 1, 0.2).normalized()), index.cell_of(Vec3(0, -1, -0.2).normalized()));
}

TEST(DirectionIndex, EmptyScan) {
  try {
    DirectionIndex::build(make_adjacent_scan({}, Vec3(1, 0, 0), -0.1), 0.01);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::EmptyScan);
  }
}

TEST(DirectionIndex, CountPreservedOnSimulatedScan) {
  SceneSpec scene;
  scene.ground_plane = true;
  scene.ground_z = -1.8;
  // A closed shell around the sensor so every beam returns.
  scene.static_boxes.push_back({"roof", ObjectCategory::Vehicle, {Vec3(0, 0, 30), Vec3(300, 300, 1), 0.0}, Vec3::Zero()});
  for (const auto& [c, s] : {std::pair{Vec3(60, 0, 0), Vec3(1, 300, 100)}, std::pair{Vec3(-60, 0, 0), Vec3(1, 300, 100)},
                             std::pair{Vec3(0, 60, 0), Vec3(300, 1, 100)}, std::pair{Vec3(0, -60, 0), Vec3(300, 1, 100)}}) {
    scene.static_boxes.push_back({"wall", ObjectCategory::Vehicle, {c, s, 0.0}, Vec3::Zero()});
  }
  const auto lidar = SpinningLidarSpec::uniform(32, -0.535, 0.186, 1024);
  const auto sim = simulate_scan(scene, lidar, RigidTransform::from_yaw(0.0, Vec3(0.5, 0, 0)), 0.0);
  ASSERT_EQ(sim.scan.size(), 32u * 1024u);
  const Scan adj = express_in(sim.scan, RigidTransform{}, 0.5);
  const auto index = DirectionIndex::build(adj, 0.01);
  EXPECT_EQ(index.beam_count(), 32768u);
}

TEST(DirectionIndex, NoBaselineHasNoPole) {
  const auto index = DirectionIndex::build(adjacent_with(Vec3::Zero(), {Vec3(0, 1, 0), Vec3(1, 0, 0)}), 0.01);
  EXPECT_FALSE(index.has_pole());
  EXPECT_EQ(query(index, Vec3(1, 0, 0), 0.0015).size(), 2u);
}

TEST(CandidatePairs, PerpendicularBeamsExcluded) {
  // Baseline along x; current beam along y: the reference plane is z = 0.
  const Vec3 a(1, 0, 0);
  const auto adj = adjacent_with(a, {Vec3(0, 0, 1), Vec3(0, 0, -1), Vec3(0.001, 0.001, 1)});
  const auto index = DirectionIndex::build(adj, 0.01);
  const Beam cur{Vec3::Zero(), Vec3(0, 1, 0), 10.0, 0.0};
  EXPECT_TRUE(candidate_pairs(cur, index, a, SensorConfig{}).empty());
}

TEST(CandidatePairs, InPlaneBeamAlwaysIncluded) {
  std::mt19937_64 gen(8);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int k = 0; k < 2000; ++k) {
    const Vec3 a = (0.01 + 2.0 * u(gen)) * random_unit(gen);
    const Vec3 d = random_unit(gen);
    const Vec3 n = d.cross(a.normalized());
    if (n.norm() < 1e-6) continue;
    // An arbitrary direction inside the plane spanned by d and a.
    const double t = 2.0 * std::numbers::pi * u(gen);
    const Vec3 e2 = n.normalized().cross(d);
    const Vec3 in_plane = std::cos(t) * d + std::sin(t) * e2;
    std::vector<Vec3> dirs;
    for (int m = 0; m < 50; ++m) dirs.push_back(random_unit(gen));
    dirs.push_back(in_plane);
    const auto index = DirectionIndex::build(adjacent_with(a, dirs), 0.003 + 0.05 * u(gen));
    const Beam cur{Vec3::Zero(), d, 10.0, 0.0};
    const auto c = candidate_pairs(cur, index, a, SensorConfig{});
    ASSERT_TRUE(std::find(c.begin(), c.end(), 50u) != c.end()) << "trial " << k;
  }
}

// Conservativeness against the exhaustive coplanarity test.
TEST(CandidatePairs, SupersetOfBruteForce) {
  std::mt19937_64 gen(12);
  SensorConfig sensor;
  for (int trial = 0; trial < 100; ++trial) {
    const auto sp = random_scan_pair(gen, 150, 400);
    const auto brute = brute_coplanar_pairs(sp.current, sp.adjacent, sensor);
    const auto index = DirectionIndex::build(sp.adjacent, 0.01);
    std::set<std::pair<std::uint32_t, std::uint32_t>> cand;
    const auto beams = beams_of(sp.current);
    for (std::uint32_t i = 0; i < beams.size(); ++i) {
      for (const auto j : candidate_pairs(beams[i], index, sp.adjacent.sensor_origin, sensor)) cand.insert({i, j});
    }
    for (const auto& p : brute) ASSERT_TRUE(cand.contains(p)) << "trial " << trial;
  }
}

TEST(CandidatePairs, BeamsNearThePole) {
  // Adjacent beams nearly along the baseline belong to every reference plane.
  const Vec3 a(0, 0, 1);
  std::vector<Vec3> dirs{Vec3(1e-5, 0, 1), Vec3(0, -1e-5, 1), Vec3(0, 0, -1), Vec3(1, 0, 0)};
  const auto index = DirectionIndex::build(adjacent_with(a, dirs), 0.01);
  const Beam cur{Vec3::Zero(), Vec3(0, 1, 0.3).normalized(), 10.0, 0.0};
  const auto c = candidate_pairs(cur, index, a, SensorConfig{});
  const std::set<std::uint32_t> got(c.begin(), c.end());
  EXPECT_TRUE(got.contains(0));
  EXPECT_TRUE(got.contains(1));
  EXPECT_TRUE(got.contains(2));
}

TEST(CandidatePairs, FrameMismatch) {
  const auto adj = adjacent_with(Vec3(1, 0, 0), {Vec3(0, 1, 0)});
  const auto index = DirectionIndex::build(adj, 0.01);
  const Beam cur{Vec3::Zero(), Vec3(0, 1, 0), 10.0, 0.0};
  try {
    candidate_pairs(cur, index, Vec3(2, 0, 0), SensorConfig{});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::FrameMismatch);
  }
}
