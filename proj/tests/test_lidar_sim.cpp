#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>

#include "test_support.hpp"
#include "top/lidar_sim.hpp"

using namespace top;
using namespace top::testing;

namespace {

SpinningLidarSpec single_beam() {
  SpinningLidarSpec l;
  l.elevations_rad = {0.0};
  l.azimuth_step_rad = 2.0 * std::numbers::pi;
  return l;
}

SceneSpec wall_at(double x) {
  SceneSpec s;
  s.static_boxes.push_back({"wall", ObjectCategory::Vehicle, {Vec3(x + 0.5, 0, 0), Vec3(1, 20, 20), 0.0}, Vec3::Zero()});
  return s;
}

SceneSpec random_scene(std::mt19937_64& gen) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  SceneSpec s;
  s.ground_plane = true;
  s.ground_z = -1.8;
  for (int k = 0; k < 6; ++k) {
    s.static_boxes.push_back({"s" + std::to_string(k), ObjectCategory::Vehicle,
                              {Vec3(12 * u(gen), 12 * u(gen), 0), Vec3(1.5 + u(gen), 1.5 + u(gen), 3), u(gen)},
                              Vec3::Zero()});
  }
  s.moving_boxes.push_back({"m", ObjectCategory::Vehicle, {Vec3(5, -6, -1), Vec3(4, 2, 1.5), 0.2}, Vec3(0, 3, 0)});
  return s;
}

}  // namespace

TEST(SimulateScan, BeamHitsFaceAtTen) {
  const auto sim = simulate_scan(wall_at(10.0), single_beam(), RigidTransform{}, 0.0);
  ASSERT_EQ(sim.scan.size(), 1u);
  EXPECT_LE((sim.scan.points[0] - Vec3(10, 0, 0)).norm(), 1e-12);
  EXPECT_EQ(sim.hit_object[0], 0);
  EXPECT_EQ(sim.labels[0], MotionClass::Static);
}

TEST(SimulateScan, EmptySceneGivesEmptyScan) {
  const auto sim = simulate_scan(SceneSpec{}, SpinningLidarSpec::uniform(16, -0.3, 0.2, 256), RigidTransform{}, 0.0);
  EXPECT_EQ(sim.scan.size(), 0u);
}

TEST(SimulateScan, LinearAdvection) {
  SceneSpec s;
  s.moving_boxes.push_back({"m", ObjectCategory::Vehicle, {Vec3(10.5, 0, 0), Vec3(1, 4, 4), 0.0}, Vec3(1, 0, 0)});
  const auto a = simulate_scan(s, single_beam(), RigidTransform{}, 0.0);
  const auto b = simulate_scan(s, single_beam(), RigidTransform{}, 2.0);
  ASSERT_EQ(a.scan.size(), 1u);
  ASSERT_EQ(b.scan.size(), 1u);
  EXPECT_NEAR(b.scan.points[0].x() - a.scan.points[0].x(), 2.0, 1e-12);
  EXPECT_EQ(b.labels[0], MotionClass::Moving);
}

TEST(SimulateScan, PoseMapsSensorToWorld) {
  const auto pose = RigidTransform::from_yaw(std::numbers::pi / 2, Vec3(10, 3, 0));
  // Sensor faces +y in the world, toward a wall at y = 8.
  SceneSpec s;
  s.static_boxes.push_back({"w", ObjectCategory::Vehicle, {Vec3(10, 8.5, 0), Vec3(20, 1, 20), 0.0}, Vec3::Zero()});
  const auto sim = simulate_scan(s, single_beam(), pose, 0.0);
  ASSERT_EQ(sim.scan.size(), 1u);
  EXPECT_LE((sim.scan.points[0] - Vec3(5, 0, 0)).norm(), 1e-12);
  EXPECT_LE((pose.apply(sim.scan.points[0]) - Vec3(10, 8, 0)).norm(), 1e-12);
}

// Hits lie on a box surface and nothing is closer along the ray, checked by
// stepping 1 cm at a time.
TEST(SimulateScan, NearestSurfaceByDenseSampling) {
  std::mt19937_64 gen(5);
  const auto scene = random_scene(gen);
  auto lidar = SpinningLidarSpec::uniform(8, -0.4, 0.1, 64);
  lidar.max_range = 30.0;
  const auto sim = simulate_scan(scene, lidar, RigidTransform{}, 0.3);
  ASSERT_GT(sim.scan.size(), 100u);
  for (std::size_t k = 0; k < sim.scan.size(); ++k) {
    const Vec3 p = sim.scan.points[k];
    const double r = p.norm();
    const Vec3 d = p / r;
    if (sim.hit_object[k] < 0) {
      EXPECT_NEAR(p.z(), -1.8, 1e-9);
    } else {
      const auto box = scene.object(static_cast<std::size_t>(sim.hit_object[k])).at(0.3);
      EXPECT_TRUE(box.contains(p, 1e-9));
      EXPECT_FALSE(box.contains(p - 1e-6 * d));
    }
    for (double s = 0.01; s < r - 0.01; s += 0.01) {
      const Vec3 x = s * d;
      ASSERT_GT(x.z(), -1.8);
      for (std::size_t o = 0; o < scene.object_count(); ++o) {
        ASSERT_FALSE(scene.object(o).at(0.3).contains(x)) << "beam " << k << " at " << s;
      }
    }
  }
}

TEST(SimulateScan, ThreadInvariant) {
  std::mt19937_64 gen(6);
  const auto scene = random_scene(gen);
  const auto lidar = SpinningLidarSpec::uniform(16, -0.4, 0.1, 512);
  const auto a = simulate_scan(scene, lidar, RigidTransform::from_yaw(0.3, Vec3(1, 1, 0)), 0.2, 1);
  const auto b = simulate_scan(scene, lidar, RigidTransform::from_yaw(0.3, Vec3(1, 1, 0)), 0.2, 4);
  ASSERT_EQ(a.scan.size(), b.scan.size());
  for (std::size_t k = 0; k < a.scan.size(); ++k) {
    EXPECT_EQ(a.scan.points[k], b.scan.points[k]);
    EXPECT_EQ(a.hit_object[k], b.hit_object[k]);
  }
}

TEST(GroundTruthState, WallExamples) {
  const auto s = wall_at(10.0);
  const double band = SensorConfig{}.occupied_band_length();
  EXPECT_EQ(ground_truth_state(Vec3(5, 0, 0), 0.0, Vec3::Zero(), s, band), GroundTruthState::Free);
  EXPECT_EQ(ground_truth_state(Vec3(10.05, 0, 0), 0.0, Vec3::Zero(), s, band), GroundTruthState::Occupied);
  EXPECT_EQ(ground_truth_state(Vec3(11, 0, 0), 0.0, Vec3::Zero(), s, band), GroundTruthState::Unknown);
}

TEST(CastRay, MissAndMinimumDistance) {
  const auto s = wall_at(10.0);
  EXPECT_FALSE(cast_ray(s, Vec3::Zero(), Vec3(-1, 0, 0), 0.0).has_value());
  const auto hit = cast_ray(s, Vec3::Zero(), Vec3(1, 0, 0), 0.0);
  ASSERT_TRUE(hit.has_value());
  EXPECT_NEAR(hit->distance, 10.0, 1e-12);
}

TEST(OracleCompare, InfiniteMarginLeavesNothingToCompare) {
  auto file = load_scene_file(scene_path("static_room.yaml").string());
  file.lidar = SpinningLidarSpec::uniform(8, -0.5, 0.1, 128);
  file.trajectory.resize(3);
  const auto seq = simulate_sequence(file);
  const auto w = make_window(seq, 1, 1);
  ExtractionConfig cfg;
  cfg.n_adjacent = 1;
  const SensorConfig sensor;
  const auto set = extract_sequence(w.current, w.adjacents, cfg, sensor);
  ASSERT_GT(set.size(), 0u);

  const auto inf = oracle_compare(set, file.scene, w.current_pose, w.current_time, w.adjacents, sensor,
                                  std::numeric_limits<double>::infinity());
  EXPECT_EQ(inf.compared, 0u);
  EXPECT_FALSE(inf.agreement.defined);

  const auto near = oracle_compare(set, file.scene, w.current_pose, w.current_time, w.adjacents, sensor, 0.02);
  ASSERT_TRUE(near.agreement.defined);
  EXPECT_GT(near.agreement.value, 99.0);
}

TEST(OracleCompare, MissingAdjacentScan) {
  auto file = load_scene_file(scene_path("static_room.yaml").string());
  file.lidar = SpinningLidarSpec::uniform(8, -0.5, 0.1, 128);
  file.trajectory.resize(3);
  const auto seq = simulate_sequence(file);
  auto w = make_window(seq, 1, 1);
  ExtractionConfig cfg;
  cfg.n_adjacent = 1;
  const auto set = extract_sequence(w.current, w.adjacents, cfg, SensorConfig{});
  w.adjacents.pop_back();
  try {
    oracle_compare(set, file.scene, w.current_pose, w.current_time, w.adjacents, SensorConfig{}, 0.02);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::SceneMismatch);
  }
}

TEST(SceneFile, BundledScenesLoad) {
  for (const char* name : {"static_room.yaml", "crossing_corridor.yaml", "wall_pass.yaml"}) {
    const auto f = load_scene_file(scene_path(name).string());
    EXPECT_TRUE(f.lidar.has_value()) << name;
    EXPECT_EQ(f.trajectory.size(), 13u) << name;
    EXPECT_EQ(f.lidar->elevations_rad.size(), 32u) << name;
  }
}

TEST(SceneFile, SchemaErrorsNameTheField) {
  const auto code_and_message = [](const std::string& text) -> std::pair<ErrorCode, std::string> {
    try {
      parse_scene_text(text);
    } catch (const Error& e) {
      return {e.code(), e.what()};
    }
    return {ErrorCode::IoError, ""};
  };
  auto r = code_and_message("static_boxes:\n  - {center: [0, 0, 0], size: [1, -1, 1]}\n");
  EXPECT_EQ(r.first, ErrorCode::SchemaViolation);
  EXPECT_NE(r.second.find("size"), std::string::npos);
  r = code_and_message("static_boxes:\n  - {center: [0, 0], size: [1, 1, 1]}\n");
  EXPECT_EQ(r.first, ErrorCode::SchemaViolation);
  EXPECT_NE(r.second.find("center"), std::string::npos);
  r = code_and_message("moving_boxes:\n  - {center: [0, 0, 0], size: [1, 1, 1], category: TRUCK, velocity: [1, 0, 0]}\n");
  EXPECT_EQ(r.first, ErrorCode::SchemaViolation);
  EXPECT_NE(r.second.find("category"), std::string::npos);
  r = code_and_message("static_boxes: [\n");
  EXPECT_EQ(r.first, ErrorCode::SchemaViolation);
  r = code_and_message("static_boxes:\n  - {center: [0, 0, 0], size: [1, 1, 1], velocity: [1, 0, 0]}\n");
  EXPECT_EQ(r.first, ErrorCode::SchemaViolation);
}

TEST(SceneFile, MissingFile) {
  try {
    load_scene_file("/nonexistent/scene.yaml");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::IoError);
  }
}
