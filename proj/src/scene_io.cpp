#include <yaml-cpp/yaml.h>

#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "top/lidar_sim.hpp"

namespace top {

namespace {

[[noreturn]] void schema(const std::string& field, const std::string& what) {
  throw Error(ErrorCode::SchemaViolation, field + ": " + what);
}

double get_double(const YAML::Node& node, const std::string& field) {
  if (!node || !node.IsScalar()) schema(field, "expected a number");
  try {
    return node.as<double>();
  } catch (const YAML::Exception&) {
    schema(field, "expected a number");
  }
}

double get_double_or(const YAML::Node& parent, const std::string& key, double fallback,
                     const std::string& path) {
  const auto node = parent[key];
  return node ? get_double(node, path + "." + key) : fallback;
}

Vec3 get_vec3(const YAML::Node& node, const std::string& field) {
  if (!node || !node.IsSequence() || node.size() != 3) schema(field, "expected [x, y, z]");
  return {get_double(node[0], field + "[0]"), get_double(node[1], field + "[1]"),
          get_double(node[2], field + "[2]")};
}

SceneObject parse_object(const YAML::Node& node, const std::string& path, bool moving) {
  if (!node.IsMap()) schema(path, "expected a mapping");
  SceneObject obj;
  obj.id = node["id"] ? node["id"].as<std::string>() : path;
  obj.box.center = get_vec3(node["center"], path + ".center");
  obj.box.size = get_vec3(node["size"], path + ".size");
  if (!(obj.box.size.array() > 0.0).all()) schema(path + ".size", "must be positive");
  obj.box.yaw = get_double_or(node, "yaw", 0.0, path);
  if (node["category"]) {
    const auto cat = parse_category(node["category"].as<std::string>());
    if (!cat) schema(path + ".category", "expected HUMAN, CYCLE or VEHICLE");
    obj.category = *cat;
  }
  if (moving) {
    obj.velocity = get_vec3(node["velocity"], path + ".velocity");
  } else if (node["velocity"]) {
    schema(path + ".velocity", "static boxes cannot move");
  }
  return obj;
}

SpinningLidarSpec parse_lidar(const YAML::Node& node) {
  if (!node.IsMap()) schema("lidar", "expected a mapping");
  SpinningLidarSpec spec;
  constexpr double deg = std::numbers::pi / 180.0;
  if (node["elevations_deg"]) {
    const auto list = node["elevations_deg"];
    if (!list.IsSequence() || list.size() == 0) schema("lidar.elevations_deg", "expected a list");
    for (std::size_t k = 0; k < list.size(); ++k) {
      spec.elevations_rad.push_back(deg * get_double(list[k], "lidar.elevations_deg"));
    }
  } else {
    const double channels = get_double_or(node, "channels", 32, "lidar");
    if (channels < 1 || channels != std::floor(channels)) schema("lidar.channels", "expected a positive integer");
    const double lo = get_double_or(node, "elevation_min_deg", -30.67, "lidar");
    const double hi = get_double_or(node, "elevation_max_deg", 10.67, "lidar");
    spec = SpinningLidarSpec::uniform(static_cast<std::size_t>(channels), lo * deg, hi * deg, 1024);
  }
  const double az = get_double_or(node, "azimuth_count", 1024, "lidar");
  if (az < 1 || az != std::floor(az)) schema("lidar.azimuth_count", "expected a positive integer");
  spec.azimuth_step_rad = 2.0 * std::numbers::pi / az;
  spec.max_range = get_double_or(node, "max_range", spec.max_range, "lidar");
  spec.min_range = get_double_or(node, "min_range", spec.min_range, "lidar");
  spec.divergence_rad = get_double_or(node, "divergence", spec.divergence_rad, "lidar");
  spec.range_noise_sigma = get_double_or(node, "range_noise_sigma", 0.0, "lidar");
  spec.noise_seed = static_cast<std::uint64_t>(get_double_or(node, "noise_seed", 0.0, "lidar"));
  try {
    spec.validate();
  } catch (const Error& e) {
    schema("lidar", e.what());
  }
  return spec;
}

std::vector<TrajectoryPose> parse_trajectory(const YAML::Node& node) {
  std::vector<TrajectoryPose> out;
  if (node["poses"]) {
    const auto poses = node["poses"];
    if (!poses.IsSequence()) schema("trajectory.poses", "expected a list");
    for (std::size_t k = 0; k < poses.size(); ++k) {
      const std::string path = "trajectory.poses[" + std::to_string(k) + "]";
      TrajectoryPose p;
      p.time = get_double(poses[k]["time"], path + ".time");
      p.pose = RigidTransform::from_yaw(get_double_or(poses[k], "yaw", 0.0, path),
                                        get_vec3(poses[k]["position"], path + ".position"));
      out.push_back(p);
    }
  } else {
    const Vec3 start = get_vec3(node["start"], "trajectory.start");
    const Vec3 velocity = node["velocity"] ? get_vec3(node["velocity"], "trajectory.velocity") : Vec3::Zero();
    const double yaw = get_double_or(node, "yaw", 0.0, "trajectory");
    const double count = get_double(node["count"], "trajectory.count");
    const double period = get_double(node["period"], "trajectory.period");
    const double t0 = get_double_or(node, "start_time", 0.0, "trajectory");
    if (count < 0 || count != std::floor(count)) schema("trajectory.count", "expected a non-negative integer");
    if (!(period > 0.0)) schema("trajectory.period", "must be positive");
    for (int k = 0; k < static_cast<int>(count); ++k) {
      const double dt = k * period;
      out.push_back({t0 + dt, RigidTransform::from_yaw(yaw, start + velocity * dt)});
    }
  }
  for (std::size_t k = 1; k < out.size(); ++k) {
    if (!(out[k].time > out[k - 1].time)) schema("trajectory", "times must increase strictly");
  }
  return out;
}

SceneFile parse_scene_root(const YAML::Node& root) {
  if (!root.IsMap()) schema("scene", "top level must be a mapping");

  SceneFile file;
  auto& scene = file.scene;
  scene.ground_plane = root["ground_plane"] ? root["ground_plane"].as<bool>() : false;
  scene.ground_z = get_double_or(root, "ground_z", 0.0, "scene");
  if (root["world_bounds"]) {
    const auto b = root["world_bounds"];
    if (!b.IsSequence() || b.size() != 6) schema("world_bounds", "expected [x0, x1, y0, y1, z0, z1]");
    for (int a = 0; a < 3; ++a) {
      scene.world_bounds.min[a] = get_double(b[2 * a], "world_bounds");
      scene.world_bounds.max[a] = get_double(b[2 * a + 1], "world_bounds");
    }
  }
  for (const auto& [key, moving] : {std::pair{"static_boxes", false}, std::pair{"moving_boxes", true}}) {
    const auto list = root[key];
    if (!list) continue;
    if (!list.IsSequence()) schema(key, "expected a list");
    for (std::size_t k = 0; k < list.size(); ++k) {
      auto obj = parse_object(list[k], std::string(key) + "[" + std::to_string(k) + "]", moving);
      (moving ? scene.moving_boxes : scene.static_boxes).push_back(std::move(obj));
    }
  }
  scene.validate();
  if (root["lidar"]) file.lidar = parse_lidar(root["lidar"]);
  if (root["trajectory"]) file.trajectory = parse_trajectory(root["trajectory"]);
  return file;
}

}  // namespace

SceneFile parse_scene_text(const std::string& text) {
  try {
    return parse_scene_root(YAML::Load(text));
  } catch (const YAML::Exception& e) {
    throw Error(ErrorCode::SchemaViolation, std::string("scene is not valid YAML: ") + e.what());
  }
}

SceneFile load_scene_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open scene file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_scene_text(ss.str());
}

}  // namespace top
