#include "top/cli.hpp"

#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>
#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <sstream>
#include <thread>

#include "top/io_formats.hpp"
#include "top/lidar_sim.hpp"
#include "top/rng.hpp"

namespace top::cli {

using nlohmann::json;

namespace {

[[noreturn]] void bad_config(const std::string& field, const std::string& what) {
  throw Error(ErrorCode::InvalidConfig, "config " + field + ": " + what);
}

double yaml_double(const YAML::Node& node, const std::string& field) {
  try {
    return node.as<double>();
  } catch (const YAML::Exception&) {
    bad_config(field, "expected a number");
  }
}

std::uint64_t yaml_u64(const YAML::Node& node, const std::string& field) {
  try {
    return node.as<std::uint64_t>();
  } catch (const YAML::Exception&) {
    bad_config(field, "expected a non-negative integer");
  }
}

template <typename Fn>
void with(const YAML::Node& parent, const char* key, Fn&& fn) {
  if (const auto node = parent[key]) fn(node);
}

json optional_json(const auto& v) { return v ? json(*v) : json(nullptr); }

// Removes everything it recorded unless commit() is called.
class OutputGuard {
 public:
  ~OutputGuard() {
    if (committed_) return;
    for (const auto& p : paths_) {
      std::error_code ec;
      fs::remove(p, ec);
    }
  }
  void add(const fs::path& p) { paths_.push_back(p); }
  void commit() { committed_ = true; }
  const std::vector<fs::path>& paths() const { return paths_; }

 private:
  std::vector<fs::path> paths_;
  bool committed_ = false;
};

struct Sequence {
  std::vector<fs::path> scans;
  std::vector<RigidTransform> poses;
  std::vector<double> times;
};

Sequence load_sequence(const RunConfig& cfg, const SequenceInput& in) {
  Sequence seq;
  if (!fs::is_directory(in.scan_dir)) {
    throw Error(ErrorCode::IoError, "scan directory not found: " + in.scan_dir.string());
  }
  seq.scans = list_scans(in.scan_dir);
  if (!fs::exists(in.pose_file)) {
    throw Error(ErrorCode::MissingPose, "pose file not found: " + in.pose_file.string());
  }
  seq.poses = io::read_poses(in.pose_file);
  if (seq.poses.size() < seq.scans.size()) {
    throw Error(ErrorCode::MissingPose, std::to_string(seq.scans.size()) + " scans but only " +
                                            std::to_string(seq.poses.size()) + " poses");
  }
  if (in.times_file) {
    seq.times = io::read_times(*in.times_file);
    if (seq.times.size() < seq.scans.size()) {
      throw Error(ErrorCode::CountMismatch, std::to_string(seq.scans.size()) + " scans but only " +
                                                std::to_string(seq.times.size()) + " timestamps");
    }
  } else {
    for (std::size_t k = 0; k < seq.scans.size(); ++k) {
      seq.times.push_back(static_cast<double>(k) * cfg.extraction.scan_period_s);
    }
  }
  return seq;
}

Scan load_world_scan(const Sequence& seq, std::size_t k) {
  Scan scan = io::read_scan_bin(seq.scans[k]);
  scan.pose = seq.poses[k];
  scan.time = seq.times[k];
  return scan;
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw Error(ErrorCode::IoError, "cannot create " + dir.string());
}

std::string percent(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  std::string s(buf);
  while (s.back() == '0') s.pop_back();
  if (s.back() == '.') s.pop_back();
  return s;
}

}  // namespace

// --- configuration ---------------------------------------------------------

void RunConfig::validate() const {
  sensor.validate();
  extraction.validate(sensor);
  thresholds.validate();
  weights.validate();
  if (recon.per_beam() == 0) throw Error(ErrorCode::InvalidConfig, "recon sampling draws no samples");
  if (label_margin_m < 0.0) throw Error(ErrorCode::InvalidConfig, "label margin must be non-negative");
}

std::string RunConfig::to_json() const {
  const auto& e = extraction;
  json thr;
  for (auto c : {ObjectCategory::Human, ObjectCategory::Cycle, ObjectCategory::Vehicle}) {
    thr[category_name(c)] = {thresholds[c].static_max, thresholds[c].moving_min};
  }
  json j = {
      {"sensor",
       {{"divergence", sensor.divergence_angle_rad},
        {"lambda_occ", sensor.occupied_confidence_threshold},
        {"decay_rate", sensor.decay_rate_per_meter}}},
      {"extraction",
       {{"n", e.n_adjacent},
        {"scan_period", e.scan_period_s},
        {"bounds",
         {e.bounds.min.x(), e.bounds.max.x(), e.bounds.min.y(), e.bounds.max.y(), e.bounds.min.z(),
          e.bounds.max.z()}},
        {"max_tail", optional_json(e.max_tail_beyond_hit_m)},
        {"max_overlaps_per_beam", optional_json(e.max_overlaps_per_beam)},
        {"index_cell_size", e.index_cell_size_rad}}},
      {"recon", {{"occupied_per_beam", recon.occupied_per_beam}, {"free_per_beam", recon.free_per_beam}}},
      {"thresholds", thr},
      {"weights", {weights.free, weights.occupied, weights.unknown}},
      {"label_margin", label_margin_m},
      {"seed", seed},
  };
  return j.dump();
}

Bounds parse_bounds(const std::string& text) {
  std::vector<double> v;
  std::stringstream ss(text);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    std::size_t used = 0;
    double d = 0.0;
    try {
      d = std::stod(tok, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || tok.find_first_not_of(" \t", used) != std::string::npos) {
      throw Error(ErrorCode::InvalidConfig, "bounds: '" + tok + "' is not a number");
    }
    v.push_back(d);
  }
  if (v.size() != 6) throw Error(ErrorCode::InvalidConfig, "bounds: expected x0,x1,y0,y1,z0,z1");
  Bounds b{{v[0], v[2], v[4]}, {v[1], v[3], v[5]}};
  if (b.empty()) throw Error(ErrorCode::InvalidConfig, "bounds: lower limits must not exceed upper ones");
  return b;
}

RunConfig parse_config_text(const std::string& yaml, RunConfig cfg) {
  YAML::Node root;
  try {
    root = YAML::Load(yaml);
  } catch (const YAML::Exception& e) {
    throw Error(ErrorCode::InvalidConfig, std::string("config is not valid YAML: ") + e.what());
  }
  if (root.IsNull()) return cfg;
  if (!root.IsMap()) bad_config("top level", "expected a mapping");

  with(root, "sensor", [&](const YAML::Node& s) {
    with(s, "divergence", [&](auto n) { cfg.sensor.divergence_angle_rad = yaml_double(n, "sensor.divergence"); });
    with(s, "lambda_occ", [&](auto n) { cfg.sensor.occupied_confidence_threshold = yaml_double(n, "sensor.lambda_occ"); });
    with(s, "decay_rate", [&](auto n) { cfg.sensor.decay_rate_per_meter = yaml_double(n, "sensor.decay_rate"); });
  });
  with(root, "extraction", [&](const YAML::Node& e) {
    auto& x = cfg.extraction;
    with(e, "n", [&](auto n) { x.n_adjacent = static_cast<int>(yaml_u64(n, "extraction.n")); });
    with(e, "scan_period", [&](auto n) { x.scan_period_s = yaml_double(n, "extraction.scan_period"); });
    with(e, "bounds", [&](auto n) {
      if (!n.IsSequence() || n.size() != 6) bad_config("extraction.bounds", "expected six numbers");
      std::string text;
      for (std::size_t k = 0; k < 6; ++k) {
        text += (k ? "," : "") + n[k].template as<std::string>();
      }
      x.bounds = parse_bounds(text);
    });
    with(e, "max_tail", [&](auto n) {
      if (!n.IsNull()) x.max_tail_beyond_hit_m = yaml_double(n, "extraction.max_tail");
    });
    with(e, "max_overlaps_per_beam", [&](auto n) {
      if (!n.IsNull()) {
        x.max_overlaps_per_beam = static_cast<std::uint32_t>(yaml_u64(n, "extraction.max_overlaps_per_beam"));
      }
    });
    with(e, "index_cell_size", [&](auto n) { x.index_cell_size_rad = yaml_double(n, "extraction.index_cell_size"); });
  });
  with(root, "recon", [&](const YAML::Node& r) {
    with(r, "occupied_per_beam", [&](auto n) {
      cfg.recon.occupied_per_beam = static_cast<std::uint32_t>(yaml_u64(n, "recon.occupied_per_beam"));
    });
    with(r, "free_per_beam", [&](auto n) {
      cfg.recon.free_per_beam = static_cast<std::uint32_t>(yaml_u64(n, "recon.free_per_beam"));
    });
  });
  with(root, "thresholds", [&](const YAML::Node& t) {
    if (!t.IsMap()) bad_config("thresholds", "expected a mapping");
    for (const auto& kv : t) {
      const auto name = kv.first.as<std::string>();
      const auto cat = parse_category(name);
      if (!cat) bad_config("thresholds." + name, "unknown category");
      if (!kv.second.IsSequence() || kv.second.size() != 2) {
        bad_config("thresholds." + name, "expected [static_max, moving_min]");
      }
      auto& slot = cfg.thresholds.by_category[static_cast<std::size_t>(*cat)];
      slot.static_max = yaml_double(kv.second[0], "thresholds." + name);
      slot.moving_min = yaml_double(kv.second[1], "thresholds." + name);
    }
  });
  with(root, "weights", [&](const YAML::Node& w) {
    if (!w.IsSequence() || w.size() != 3) bad_config("weights", "expected [free, occupied, unknown]");
    cfg.weights = {yaml_double(w[0], "weights"), yaml_double(w[1], "weights"), yaml_double(w[2], "weights")};
  });
  with(root, "label_margin", [&](auto n) { cfg.label_margin_m = yaml_double(n, "label_margin"); });
  with(root, "seed", [&](auto n) { cfg.seed = yaml_u64(n, "seed"); });
  with(root, "threads", [&](auto n) { cfg.threads = static_cast<unsigned>(yaml_u64(n, "threads")); });
  return cfg;
}

RunConfig resolve_config(const std::optional<fs::path>& config_file, const Overrides& flags) {
  RunConfig cfg;
  if (config_file) {
    if (!fs::exists(*config_file)) {
      throw Error(ErrorCode::InvalidConfig, "config file not found: " + config_file->string());
    }
    cfg = parse_config_text(io::read_file(*config_file), cfg);
  }
  if (flags.threads) cfg.threads = *flags.threads;
  if (flags.seed) cfg.seed = *flags.seed;
  if (flags.bounds) cfg.extraction.bounds = *flags.bounds;
  if (flags.n_adjacent) cfg.extraction.n_adjacent = *flags.n_adjacent;
  if (flags.divergence) cfg.sensor.divergence_angle_rad = *flags.divergence;
  if (flags.lambda_occ) cfg.sensor.occupied_confidence_threshold = *flags.lambda_occ;
  if (cfg.threads == 0) cfg.threads = std::max(1u, std::thread::hardware_concurrency());
  cfg.extraction.rng_seed = cfg.seed;
  cfg.validate();
  return cfg;
}

// --- sequences -------------------------------------------------------------

std::string scan_file_name(std::size_t index, const char* extension) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%06zu%s", index, extension);
  return buf;
}

std::vector<fs::path> list_scans(const fs::path& dir) {
  std::vector<fs::path> out;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".bin") out.push_back(entry.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<std::size_t> eligible_current_scans(std::size_t scan_count, int n) {
  std::vector<std::size_t> out;
  const auto w = static_cast<std::size_t>(n);
  for (std::size_t c = w; c + w < scan_count; ++c) out.push_back(c);
  return out;
}

// --- extract ---------------------------------------------------------------

ExtractResult cmd_extract(const RunConfig& cfg, const SequenceInput& in, const fs::path& out_dir,
                          bool balance) {
  cfg.validate();
  const Sequence seq = load_sequence(cfg, in);
  const int n = cfg.extraction.n_adjacent;
  const auto currents = eligible_current_scans(seq.scans.size(), n);
  if (currents.empty()) {
    throw Error(ErrorCode::CountMismatch, "need at least " + std::to_string(2 * n + 1) +
                                              " scans for n = " + std::to_string(n) + ", found " +
                                              std::to_string(seq.scans.size()));
  }
  ensure_dir(out_dir);
  const std::string config_json = cfg.to_json();
  const std::uint64_t overlap_stream = derive_seed(cfg.seed, 1);
  const std::uint64_t recon_stream = derive_seed(cfg.seed, 2);

  OutputGuard guard;
  ExtractResult result;
  const auto w = static_cast<std::size_t>(n);
  std::map<std::size_t, Scan> cache;
  for (const std::size_t c : currents) {
    while (!cache.empty() && cache.begin()->first + w < c) cache.erase(cache.begin());
    for (std::size_t k = c - w; k <= c + w; ++k) {
      if (!cache.contains(k)) cache.emplace(k, load_world_scan(seq, k));
    }
    const Scan& world_current = cache.at(c);
    const Scan current = express_in(world_current, world_current.pose, world_current.time);
    std::vector<AdjacentScan> adjacents;
    for (int off = -n; off <= n; ++off) {
      if (off == 0) continue;
      adjacents.push_back({off, express_in(cache.at(static_cast<std::size_t>(static_cast<long long>(c) + off)), world_current.pose, world_current.time)});
    }
    OverlapSet set = extract_sequence(current, adjacents, cfg.extraction, cfg.sensor, cfg.threads);
    if (balance) set = balance_classes(set, derive_seed(overlap_stream, c));

    io::ReconFile recon;
    recon.n_points = static_cast<std::uint32_t>(current.size());
    recon.sampling = cfg.recon;
    recon.config_json = config_json;
    recon.samples = sample_recon_points(current, cfg.recon, cfg.sensor, derive_seed(recon_stream, c),
                                        cfg.threads);

    const fs::path overlap_path = out_dir / ("overlap_" + scan_file_name(c, ".tovp"));
    const fs::path recon_path = out_dir / ("recon_" + scan_file_name(c, ".trec"));
    guard.add(overlap_path);
    io::write_overlap_set(overlap_path, set, cfg.sensor, config_json);
    guard.add(recon_path);
    io::write_recon_samples(recon_path, recon);

    const auto counts = set.counts();
    spdlog::info("scan {}: {} overlap points (free {}, occupied {}, unknown {}), {} recon samples", c,
                 set.size(), counts[0], counts[1], counts[2], recon.samples.size());
    result.processed.push_back(c);
    result.overlap_points += set.size();
    result.recon_samples += recon.samples.size();
  }
  result.outputs = guard.paths();
  guard.commit();
  return result;
}

// --- simulate --------------------------------------------------------------

std::size_t cmd_simulate(const RunConfig& cfg, const SimulateInput& in, const fs::path& out_dir) {
  if (!fs::exists(in.scene_file)) throw Error(ErrorCode::IoError, "scene file not found: " + in.scene_file.string());
  SceneFile scene = load_scene_file(in.scene_file.string());
  if (in.lidar_file) {
    auto extra = load_scene_file(in.lidar_file->string());
    if (!extra.lidar) throw Error(ErrorCode::SchemaViolation, "lidar file has no lidar section");
    scene.lidar = extra.lidar;
  }
  if (in.trajectory_file) {
    scene.trajectory = load_scene_file(in.trajectory_file->string()).trajectory;
  }
  if (!scene.lidar) throw Error(ErrorCode::SchemaViolation, "lidar: section missing");
  if (scene.trajectory.empty()) throw Error(ErrorCode::SchemaViolation, "trajectory: no poses");

  const fs::path scan_dir = out_dir / "scans";
  const fs::path label_dir = out_dir / "labels";
  ensure_dir(scan_dir);
  ensure_dir(label_dir);

  OutputGuard guard;
  std::vector<RigidTransform> poses;
  std::vector<double> times;
  std::vector<TrackedBox> tracks;
  for (const auto& obj : scene.scene.moving_boxes) tracks.push_back({obj.id, obj.category, {}});

  for (std::size_t k = 0; k < scene.trajectory.size(); ++k) {
    const auto& tp = scene.trajectory[k];
    const auto sim = simulate_scan(scene.scene, *scene.lidar, tp.pose, tp.time, cfg.threads);
    const fs::path scan_path = scan_dir / scan_file_name(k, ".bin");
    const fs::path label_path = label_dir / scan_file_name(k, ".label");
    guard.add(scan_path);
    io::write_scan_bin(scan_path, sim.scan);
    guard.add(label_path);
    io::write_labels(label_path, sim.labels);
    poses.push_back(tp.pose);
    times.push_back(tp.time);
    for (std::size_t m = 0; m < tracks.size(); ++m) {
      tracks[m].keyframes.push_back({scene.scene.moving_boxes[m].at(tp.time), tp.time, static_cast<int>(k)});
    }
    spdlog::info("scan {}: {} points", k, sim.scan.size());
  }
  for (const auto& [name, write] :
       {std::pair<const char*, std::function<void(const fs::path&)>>{
            "poses.txt", [&](const fs::path& p) { io::write_poses(p, poses); }},
        {"times.txt", [&](const fs::path& p) { io::write_times(p, times); }},
        {"boxes.jsonl", [&](const fs::path& p) { io::write_boxes_jsonl(p, tracks); }}}) {
    guard.add(out_dir / name);
    write(out_dir / name);
  }
  guard.commit();
  return scene.trajectory.size();
}

// --- label -----------------------------------------------------------------

std::size_t cmd_label(const RunConfig& cfg, const SequenceInput& in, const fs::path& boxes_file,
                      const fs::path& out_dir) {
  cfg.validate();
  const Sequence seq = load_sequence(cfg, in);
  const auto tracks = io::read_boxes_jsonl(boxes_file);
  ensure_dir(out_dir);
  OutputGuard guard;
  for (std::size_t k = 0; k < seq.scans.size(); ++k) {
    const Scan scan = io::read_scan_bin(seq.scans[k]);
    const RigidTransform to_sensor = seq.poses[k].inverse();
    auto boxes = boxes_at(tracks, static_cast<int>(k), seq.times[k], cfg.thresholds);
    for (auto& b : boxes) b.box = b.box.transformed(to_sensor);
    const auto labels = label_points(scan.points, boxes, cfg.label_margin_m);
    const fs::path path = out_dir / scan_file_name(k, ".label");
    guard.add(path);
    io::write_labels(path, labels);
  }
  guard.commit();
  return seq.scans.size();
}

// --- eval ------------------------------------------------------------------

EvalInput load_eval_input(const RunConfig& cfg, const EvalFiles& files, bool with_predictions) {
  const Sequence seq = load_sequence(cfg, files.sequence);
  const auto tracks = io::read_boxes_jsonl(files.boxes_file);
  EvalInput input;
  for (std::size_t k = 0; k < seq.scans.size(); ++k) {
    EvalScan es;
    es.points = io::read_scan_bin(seq.scans[k]).points;
    const std::size_t n = es.points.size();
    const auto name = scan_file_name(k, ".label");
    es.ground_truth = io::read_labels(files.label_dir / name, n);
    es.predicted_moving = with_predictions ? io::read_u8_per_point(files.prediction_dir / name, n, 1)
                                           : std::vector<std::uint8_t>(n, 0);
    if (files.ego_dir) es.ego_mask = io::read_u8_per_point(*files.ego_dir / name, n, 1);
    const RigidTransform to_sensor = seq.poses[k].inverse();
    for (const auto& b : boxes_at(tracks, static_cast<int>(k), seq.times[k], cfg.thresholds)) {
      if (b.motion == MotionClass::Moving) es.moving_objects.push_back({b.instance_id, b.box.transformed(to_sensor)});
    }
    input.push_back(std::move(es));
  }
  return input;
}

EvalReport cmd_eval(const RunConfig& cfg, const EvalFiles& files) {
  cfg.validate();
  return evaluate(load_eval_input(cfg, files, true), cfg.threads);
}

// --- stats -----------------------------------------------------------------

std::string format_size_cdf(const SizeCdf& cdf, const std::vector<double>& fractions) {
  std::ostringstream os;
  os << "objects " << cdf.sorted_counts.size() << ", points " << cdf.total_points << "\n";
  os << "points_per_object  object_fraction  point_fraction\n";
  for (const auto& p : cdf.curve) {
    char buf[96];
    std::snprintf(buf, sizeof buf, "%17llu  %15.6f  %14.6f\n", static_cast<unsigned long long>(p.point_count),
                  p.object_fraction, p.point_fraction);
    os << buf;
  }
  for (const double f : fractions) {
    os << percent(100.0 * f) << "% objects → " << percent(100.0 * cdf.point_share_of_smallest(f))
       << "% points\n";
  }
  return os.str();
}

std::string format_size_csv(const SizeCdf& cdf) {
  std::ostringstream os;
  os << "point_count,object_fraction,point_fraction\n";
  os.precision(17);
  for (const auto& p : cdf.curve) {
    os << p.point_count << "," << p.object_fraction << "," << p.point_fraction << "\n";
  }
  return os.str();
}

std::vector<std::uint64_t> read_counts(const fs::path& path) {
  std::istringstream in(io::read_file(path));
  std::vector<std::uint64_t> out;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    const auto last = line.find_last_not_of(" \t\r");
    const std::string tok = line.substr(first, last - first + 1);
    if (tok.find_first_not_of("0123456789") != std::string::npos || tok.size() > 19) {
      throw Error(ErrorCode::MalformedLine, "counts line " + std::to_string(line_no) + " is not a count");
    }
    out.push_back(std::stoull(tok));
  }
  return out;
}

// --- loss-check ------------------------------------------------------------

LossCheckResult cmd_loss_check(const RunConfig& cfg, const LossCheckInput& in) {
  cfg.validate();
  LossCheckResult out;
  const auto overlaps = io::read_overlap_set(in.overlap_file);
  const auto preds = io::read_probabilities(in.overlap_predictions);
  std::vector<OccupancyState> states;
  std::vector<double> conf;
  for (const auto& p : overlaps.set.points) {
    states.push_back(p.state);
    conf.push_back(p.confidence);
  }
  out.overlap = overlap_loss(states, conf, preds, cfg.weights);

  if (in.recon_file.has_value() != in.recon_predictions.has_value()) {
    throw Error(ErrorCode::InvalidConfig, "recon samples and recon predictions must be given together");
  }
  if (in.recon_file) {
    const auto recon = io::read_recon_samples(*in.recon_file);
    const auto rpreds = io::read_probabilities(*in.recon_predictions);
    std::vector<OccupancyState> rstates;
    for (const auto& s : recon.samples) rstates.push_back(s.state);
    out.recon = recon_loss(rstates, rpreds, cfg.weights, recon.n_points, recon.sampling.per_beam());
  }
  return out;
}

std::string format_loss(const LossCheckResult& r) {
  char buf[64];
  std::string out;
  std::snprintf(buf, sizeof buf, "overlap_loss %.9f\n", r.overlap);
  out += buf;
  if (r.recon) {
    std::snprintf(buf, sizeof buf, "recon_loss %.9f\n", *r.recon);
    out += buf;
    std::snprintf(buf, sizeof buf, "total_loss %.9f\n", total_loss(r.overlap, *r.recon));
    out += buf;
  }
  return out;
}

int exit_code_for(ErrorCode code) {
  return code == ErrorCode::InvalidConfig ? kExitUsage : kExitData;
}

}  // namespace top::cli
