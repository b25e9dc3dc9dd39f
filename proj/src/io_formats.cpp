#include "top/io_formats.hpp"

#include <Eigen/SVD>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <sstream>

namespace top::io {

using nlohmann::json;

namespace {

// Little-endian byte sink / source. Integers are assembled byte by byte so the
// layout does not depend on the host.
class Writer {
 public:
  explicit Writer(std::string& out) : out_(out) {}

  void bytes(const char* p, std::size_t n) { out_.append(p, n); }
  template <typename T>
  void uint(T v) {
    for (std::size_t k = 0; k < sizeof(T); ++k) {
      out_.push_back(static_cast<char>(static_cast<std::uint8_t>(v >> (8 * k))));
    }
  }
  void u8(std::uint8_t v) { uint(v); }
  void i8(std::int8_t v) { uint(static_cast<std::uint8_t>(v)); }
  void u16(std::uint16_t v) { uint(v); }
  void u32(std::uint32_t v) { uint(v); }
  void u64(std::uint64_t v) { uint(v); }
  void f32(float v) { uint(std::bit_cast<std::uint32_t>(v)); }
  void f64(double v) { uint(std::bit_cast<std::uint64_t>(v)); }

 private:
  std::string& out_;
};

class Reader {
 public:
  explicit Reader(std::string_view in) : in_(in) {}

  std::size_t remaining() const { return in_.size() - pos_; }
  std::string_view take(std::size_t n) {
    need(n);
    auto s = in_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  template <typename T>
  T uint() {
    need(sizeof(T));
    T v = 0;
    for (std::size_t k = 0; k < sizeof(T); ++k) {
      v |= static_cast<T>(static_cast<T>(static_cast<std::uint8_t>(in_[pos_ + k])) << (8 * k));
    }
    pos_ += sizeof(T);
    return v;
  }
  std::uint8_t u8() { return uint<std::uint8_t>(); }
  std::int8_t i8() { return static_cast<std::int8_t>(uint<std::uint8_t>()); }
  std::uint16_t u16() { return uint<std::uint16_t>(); }
  std::uint32_t u32() { return uint<std::uint32_t>(); }
  std::uint64_t u64() { return uint<std::uint64_t>(); }
  float f32() { return std::bit_cast<float>(uint<std::uint32_t>()); }
  double f64() { return std::bit_cast<double>(uint<std::uint64_t>()); }

 private:
  void need(std::size_t n) const {
    if (remaining() < n) throw Error(ErrorCode::TruncatedFile, "unexpected end of data");
  }
  std::string_view in_;
  std::size_t pos_ = 0;
};

[[noreturn]] void schema(const std::string& field, const std::string& what) {
  throw Error(ErrorCode::SchemaViolation, field + ": " + what);
}

float to_f32_confidence(double c) {
  // Far behind a return the confidence underflows float; keep it positive.
  return std::max(static_cast<float>(c), std::numeric_limits<float>::denorm_min());
}

void check_magic(Reader& r, const char (&magic)[4], const char* what) {
  if (r.remaining() < 4) throw Error(ErrorCode::TruncatedFile, std::string(what) + " header is truncated");
  if (r.take(4) != std::string_view(magic, 4)) {
    throw Error(ErrorCode::MagicMismatch, std::string("not a ") + what + " file");
  }
  const auto version = r.u16();
  if (version != kFormatVersion) {
    throw Error(ErrorCode::VersionUnsupported,
                std::string(what) + " version " + std::to_string(version) + " is not supported");
  }
}

std::uint64_t checked_count(const Reader& r, std::uint64_t count, std::size_t record_size) {
  const std::size_t rem = r.remaining();
  if (rem % record_size != 0) throw Error(ErrorCode::TruncatedFile, "trailing partial record");
  if (count != rem / record_size) {
    throw Error(ErrorCode::CountMismatch, "header announces " + std::to_string(count) +
                                              " records but " + std::to_string(rem / record_size) +
                                              " are present");
  }
  return count;
}

std::string read_config_json(Reader& r, std::uint64_t hash) {
  const auto len = r.u32();
  std::string text(r.take(len));
  if (fnv1a64(text) != hash) schema("config_hash", "does not match the embedded configuration");
  return text;
}

OccupancyState checked_state(std::uint8_t s) {
  if (s > 2) schema("state", "expected 0, 1 or 2, got " + std::to_string(s));
  return static_cast<OccupancyState>(s);
}

std::string format_double(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

}  // namespace

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const char c : bytes) {
    h ^= static_cast<std::uint8_t>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw Error(ErrorCode::IoError, "cannot read " + path.string());
  return ss.str();
}

void write_file(const fs::path& path, std::string_view bytes) {
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::IoError, "cannot create " + tmp.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) {
      std::error_code ec;
      fs::remove(tmp, ec);
      throw Error(ErrorCode::IoError, "cannot write " + tmp.string());
    }
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw Error(ErrorCode::IoError, "cannot move output into place: " + path.string());
  }
}

// --- scans -----------------------------------------------------------------

Scan parse_scan_bin(std::string_view bytes) {
  if (bytes.size() % 16 != 0) {
    throw Error(ErrorCode::BadLength,
                "scan file length " + std::to_string(bytes.size()) + " is not a multiple of 16");
  }
  Reader r(bytes);
  Scan scan;
  const std::size_t n = bytes.size() / 16;
  scan.points.reserve(n);
  scan.intensity.reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    const float x = r.f32();
    const float y = r.f32();
    const float z = r.f32();
    scan.points.emplace_back(x, y, z);
    scan.intensity.push_back(r.f32());
  }
  scan.frame = Scan::Frame::Sensor;
  return scan;
}

Scan read_scan_bin(const fs::path& path) { return parse_scan_bin(read_file(path)); }

void write_scan_bin(const fs::path& path, const Scan& scan) {
  std::string out;
  out.reserve(scan.points.size() * 16);
  Writer w(out);
  for (std::size_t k = 0; k < scan.points.size(); ++k) {
    const auto& p = scan.points[k];
    w.f32(static_cast<float>(p.x()));
    w.f32(static_cast<float>(p.y()));
    w.f32(static_cast<float>(p.z()));
    w.f32(k < scan.intensity.size() ? scan.intensity[k] : 0.0f);
  }
  write_file(path, out);
}

// --- poses -----------------------------------------------------------------

std::vector<RigidTransform> parse_poses(const std::string& text) {
  std::vector<RigidTransform> poses;
  std::istringstream lines(text);
  std::string line;
  int line_no = 0;
  while (std::getline(lines, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::istringstream fields(line);
    std::vector<double> values;
    std::string tok;
    while (fields >> tok) {
      double v = 0.0;
      std::size_t used = 0;
      try {
        v = std::stod(tok, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != tok.size() || !std::isfinite(v)) {
        throw Error(ErrorCode::MalformedLine,
                    "poses line " + std::to_string(line_no) + ": '" + tok + "' is not a number");
      }
      values.push_back(v);
    }
    if (values.size() != 12) {
      throw Error(ErrorCode::MalformedLine, "poses line " + std::to_string(line_no) + " has " +
                                                std::to_string(values.size()) + " numbers, expected 12");
    }
    RigidTransform tf;
    for (int row = 0; row < 3; ++row) {
      for (int col = 0; col < 3; ++col) tf.rotation(row, col) = values[4 * row + col];
      tf.translation[row] = values[4 * row + 3];
    }
    const double dev = tf.orthonormality_error();
    if (dev > 1e-2 || tf.rotation.determinant() <= 0.0) {
      throw Error(ErrorCode::NonRigid, "poses line " + std::to_string(line_no) +
                                           " is not a rotation (deviation " + format_double(dev) + ")");
    }
    if (dev > 1e-6) {
      Eigen::JacobiSVD<Mat3> svd(tf.rotation, Eigen::ComputeFullU | Eigen::ComputeFullV);
      tf.rotation = svd.matrixU() * svd.matrixV().transpose();
    }
    poses.push_back(tf);
  }
  return poses;
}

std::vector<RigidTransform> read_poses(const fs::path& path) {
  if (!fs::exists(path)) throw Error(ErrorCode::MissingPose, "pose file not found: " + path.string());
  return parse_poses(read_file(path));
}

void write_poses(const fs::path& path, const std::vector<RigidTransform>& poses) {
  std::string out;
  for (const auto& tf : poses) {
    for (int row = 0; row < 3; ++row) {
      for (int col = 0; col < 3; ++col) out += format_double(tf.rotation(row, col)) + " ";
      out += format_double(tf.translation[row]);
      out += row < 2 ? " " : "\n";
    }
  }
  write_file(path, out);
}

std::vector<double> read_times(const fs::path& path) {
  std::istringstream in(read_file(path));
  std::vector<double> times;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::istringstream fields(line);
    double t = 0.0;
    std::string rest;
    if (!(fields >> t) || (fields >> rest) || !std::isfinite(t)) {
      throw Error(ErrorCode::MalformedLine, "times line " + std::to_string(line_no) + " is not one number");
    }
    times.push_back(t);
  }
  return times;
}

void write_times(const fs::path& path, const std::vector<double>& times) {
  std::string out;
  for (const double t : times) out += format_double(t) + "\n";
  write_file(path, out);
}

// --- overlap sets ----------------------------------------------------------

std::string encode_overlap_set(const OverlapSet& set, const SensorConfig& sensor,
                               const std::string& config_json) {
  if (!std::is_sorted(set.points.begin(), set.points.end(), canonical_less)) {
    throw Error(ErrorCode::SchemaViolation, "overlap set is not in canonical order");
  }
  std::string out;
  out.reserve(64 + config_json.size() + set.points.size() * kOverlapRecordSize);
  Writer w(out);
  w.bytes(kOverlapMagic, 4);
  w.u16(kFormatVersion);
  w.u64(set.points.size());
  w.f64(sensor.divergence_angle_rad);
  w.f64(sensor.occupied_confidence_threshold);
  w.f64(sensor.decay_rate_per_meter);
  w.u64(fnv1a64(config_json));
  w.u32(static_cast<std::uint32_t>(config_json.size()));
  w.bytes(config_json.data(), config_json.size());
  for (const auto& p : set.points) {
    w.u32(p.current_point_index);
    w.i8(p.adjacent_scan_offset);
    w.u32(p.adjacent_point_index);
    w.f32(static_cast<float>(p.position.x()));
    w.f32(static_cast<float>(p.position.y()));
    w.f32(static_cast<float>(p.position.z()));
    w.f32(static_cast<float>(p.time));
    w.u8(static_cast<std::uint8_t>(p.state));
    w.f32(to_f32_confidence(p.confidence));
    w.u8(p.sample_rank);
    w.u16(0);  // reserved
  }
  return out;
}

OverlapFile decode_overlap_set(std::string_view bytes, std::optional<std::uint64_t> expected_hash) {
  Reader r(bytes);
  check_magic(r, kOverlapMagic, "overlap set");
  OverlapFile file;
  auto& h = file.header;
  h.version = kFormatVersion;
  h.record_count = r.u64();
  h.sensor.divergence_angle_rad = r.f64();
  h.sensor.occupied_confidence_threshold = r.f64();
  h.sensor.decay_rate_per_meter = r.f64();
  h.config_hash = r.u64();
  h.config_json = read_config_json(r, h.config_hash);
  try {
    h.sensor.validate();
  } catch (const Error& e) {
    schema("sensor", e.what());
  }
  if (expected_hash && *expected_hash != h.config_hash) {
    throw Error(ErrorCode::InvalidConfig, "overlap set was produced with a different configuration");
  }
  const auto count = checked_count(r, h.record_count, kOverlapRecordSize);
  file.set.points.resize(count);
  for (auto& p : file.set.points) {
    p.current_point_index = r.u32();
    p.adjacent_scan_offset = r.i8();
    p.adjacent_point_index = r.u32();
    const float x = r.f32();
    const float y = r.f32();
    const float z = r.f32();
    p.position = Vec3(x, y, z);
    p.time = r.f32();
    p.state = checked_state(r.u8());
    const float conf = r.f32();
    if (!(conf > 0.0f && conf <= 1.0f)) schema("confidence", "must lie in (0, 1]");
    p.confidence = conf;
    p.sample_rank = r.u8();
    if (r.u16() != 0) schema("reserved", "must be zero");
    if (!p.position.allFinite() || !std::isfinite(p.time)) schema("position", "must be finite");
    if (p.adjacent_scan_offset == 0) schema("adjacent_scan_offset", "must be non-zero");
  }
  if (!std::is_sorted(file.set.points.begin(), file.set.points.end(), canonical_less)) {
    schema("records", "not in canonical order");
  }
  return file;
}

void write_overlap_set(const fs::path& path, const OverlapSet& set, const SensorConfig& sensor,
                       const std::string& config_json) {
  write_file(path, encode_overlap_set(set, sensor, config_json));
}

OverlapFile read_overlap_set(const fs::path& path, std::optional<std::uint64_t> expected_hash) {
  return decode_overlap_set(read_file(path), expected_hash);
}

// --- reconstruction samples ------------------------------------------------

std::string encode_recon_samples(const ReconFile& file) {
  std::string out;
  out.reserve(48 + file.config_json.size() + file.samples.size() * kReconRecordSize);
  Writer w(out);
  w.bytes(kReconMagic, 4);
  w.u16(kFormatVersion);
  w.u64(file.samples.size());
  w.u32(file.n_points);
  w.u32(file.sampling.occupied_per_beam);
  w.u32(file.sampling.free_per_beam);
  w.u64(fnv1a64(file.config_json));
  w.u32(static_cast<std::uint32_t>(file.config_json.size()));
  w.bytes(file.config_json.data(), file.config_json.size());
  for (const auto& s : file.samples) {
    w.u32(s.current_point_index);
    w.f32(static_cast<float>(s.position.x()));
    w.f32(static_cast<float>(s.position.y()));
    w.f32(static_cast<float>(s.position.z()));
    w.f32(static_cast<float>(s.time));
    w.u8(static_cast<std::uint8_t>(s.state));
  }
  return out;
}

ReconFile decode_recon_samples(std::string_view bytes) {
  Reader r(bytes);
  check_magic(r, kReconMagic, "reconstruction sample");
  ReconFile file;
  const auto count = r.u64();
  file.n_points = r.u32();
  file.sampling.occupied_per_beam = r.u32();
  file.sampling.free_per_beam = r.u32();
  file.config_hash = r.u64();
  file.config_json = read_config_json(r, file.config_hash);
  checked_count(r, count, kReconRecordSize);
  file.samples.resize(count);
  for (auto& s : file.samples) {
    s.current_point_index = r.u32();
    const float x = r.f32();
    const float y = r.f32();
    const float z = r.f32();
    s.position = Vec3(x, y, z);
    s.time = r.f32();
    s.state = checked_state(r.u8());
    if (s.current_point_index >= file.n_points) schema("current_point_index", "out of range");
  }
  return file;
}

void write_recon_samples(const fs::path& path, const ReconFile& file) {
  write_file(path, encode_recon_samples(file));
}

ReconFile read_recon_samples(const fs::path& path) { return decode_recon_samples(read_file(path)); }

// --- predictions and labels ------------------------------------------------

std::string encode_probabilities(const std::vector<StatePrediction>& preds) {
  std::string out;
  Writer w(out);
  w.bytes(kProbMagic, 4);
  w.u16(kFormatVersion);
  w.u64(preds.size());
  for (const auto& p : preds) {
    for (const double v : p.probabilities) w.f32(static_cast<float>(v));
  }
  return out;
}

std::vector<StatePrediction> decode_probabilities(std::string_view bytes) {
  Reader r(bytes);
  check_magic(r, kProbMagic, "prediction");
  const auto count = checked_count(r, r.u64(), 12);
  std::vector<StatePrediction> preds(count);
  for (auto& p : preds) {
    for (auto& v : p.probabilities) {
      v = r.f32();
      if (!(v >= 0.0 && v <= 1.0)) schema("probability", "must lie in [0, 1]");
    }
  }
  return preds;
}

void write_probabilities(const fs::path& path, const std::vector<StatePrediction>& preds) {
  write_file(path, encode_probabilities(preds));
}

std::vector<StatePrediction> read_probabilities(const fs::path& path) {
  return decode_probabilities(read_file(path));
}

std::vector<std::uint8_t> read_u8_per_point(const fs::path& path, std::size_t expected_count,
                                            std::uint8_t max_value) {
  const std::string bytes = read_file(path);
  if (bytes.size() != expected_count) {
    throw Error(ErrorCode::LengthMismatch, path.filename().string() + " holds " +
                                               std::to_string(bytes.size()) + " values for " +
                                               std::to_string(expected_count) + " points");
  }
  std::vector<std::uint8_t> out(bytes.begin(), bytes.end());
  for (const auto v : out) {
    if (v > max_value) schema(path.filename().string(), "value " + std::to_string(v) + " out of range");
  }
  return out;
}

void write_u8_per_point(const fs::path& path, const std::vector<std::uint8_t>& values) {
  write_file(path, std::string_view(reinterpret_cast<const char*>(values.data()), values.size()));
}

std::vector<MotionClass> read_labels(const fs::path& path, std::size_t expected_count) {
  const auto raw = read_u8_per_point(path, expected_count, 2);
  std::vector<MotionClass> out;
  out.reserve(raw.size());
  for (const auto v : raw) out.push_back(static_cast<MotionClass>(v));
  return out;
}

void write_labels(const fs::path& path, const std::vector<MotionClass>& labels) {
  std::vector<std::uint8_t> raw;
  raw.reserve(labels.size());
  for (const auto l : labels) raw.push_back(static_cast<std::uint8_t>(l));
  write_u8_per_point(path, raw);
}

// --- boxes -----------------------------------------------------------------

namespace {

double json_number(const json& obj, const char* key, const std::string& where) {
  if (!obj.contains(key)) schema(where + "." + key, "missing");
  const auto& v = obj.at(key);
  if (!v.is_number()) schema(where + "." + key, "expected a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) schema(where + "." + key, "must be finite");
  return d;
}

Vec3 json_vec3(const json& obj, const char* key, const std::string& where) {
  if (!obj.contains(key)) schema(where + "." + key, "missing");
  const auto& v = obj.at(key);
  if (!v.is_array() || v.size() != 3) schema(where + "." + key, "expected [x, y, z]");
  Vec3 out;
  for (int a = 0; a < 3; ++a) {
    if (!v[a].is_number()) schema(where + "." + key, "expected numbers");
    out[a] = v[a].get<double>();
  }
  if (!out.allFinite()) schema(where + "." + key, "must be finite");
  return out;
}

json vec3_json(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

}  // namespace

std::vector<TrackedBox> parse_boxes_jsonl(const std::string& text) {
  std::vector<TrackedBox> tracks;
  std::map<std::string, std::size_t> slot;
  std::istringstream lines(text);
  std::string line;
  int line_no = 0;
  while (std::getline(lines, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = "boxes line " + std::to_string(line_no);
    json obj;
    try {
      obj = json::parse(line);
    } catch (const json::exception&) {
      schema(where, "not valid JSON");
    }
    if (!obj.is_object()) schema(where, "expected an object");
    if (!obj.contains("instance_id") || !obj["instance_id"].is_string()) {
      schema(where + ".instance_id", "expected a string");
    }
    if (!obj.contains("category") || !obj["category"].is_string()) {
      schema(where + ".category", "expected a string");
    }
    const auto id = obj["instance_id"].get<std::string>();
    const auto category = parse_category(obj["category"].get<std::string>());
    if (!category) schema(where + ".category", "expected HUMAN, CYCLE or VEHICLE");

    BoxKeyframe kf;
    kf.timestamp = json_number(obj, "timestamp", where);
    kf.box.center = json_vec3(obj, "center", where);
    kf.box.size = json_vec3(obj, "size", where);
    if (!(kf.box.size.array() > 0.0).all()) schema(where + ".size", "must be positive");
    kf.box.yaw = json_number(obj, "yaw", where);
    if (obj.contains("scan")) {
      if (!obj["scan"].is_number_integer()) schema(where + ".scan", "expected an integer");
      kf.scan = obj["scan"].get<int>();
    }

    auto [it, inserted] = slot.try_emplace(id, tracks.size());
    if (inserted) tracks.push_back({id, *category, {}});
    auto& track = tracks[it->second];
    if (track.category != *category) schema(where + ".category", "differs from earlier lines of " + id);
    track.keyframes.push_back(kf);
  }
  for (auto& t : tracks) {
    std::stable_sort(t.keyframes.begin(), t.keyframes.end(),
                     [](const BoxKeyframe& a, const BoxKeyframe& b) { return a.timestamp < b.timestamp; });
    t.validate();
  }
  return tracks;
}

std::vector<TrackedBox> read_boxes_jsonl(const fs::path& path) { return parse_boxes_jsonl(read_file(path)); }

std::string format_boxes_jsonl(const std::vector<TrackedBox>& tracks) {
  std::string out;
  for (const auto& t : tracks) {
    for (const auto& kf : t.keyframes) {
      json obj = {{"instance_id", t.instance_id},
                  {"category", category_name(t.category)},
                  {"timestamp", kf.timestamp},
                  {"center", vec3_json(kf.box.center)},
                  {"size", vec3_json(kf.box.size)},
                  {"yaw", kf.box.yaw}};
      if (kf.scan) obj["scan"] = *kf.scan;
      out += obj.dump() + "\n";
    }
  }
  return out;
}

void write_boxes_jsonl(const fs::path& path, const std::vector<TrackedBox>& tracks) {
  write_file(path, format_boxes_jsonl(tracks));
}

// --- reports ---------------------------------------------------------------

namespace {

json metric_json(const Metric& m) {
  return json{{"value", m.value}, {"defined", m.defined}};
}

Metric metric_from(const json& j, const char* key) {
  if (!j.contains(key) || !j[key].is_object()) schema(std::string("report.") + key, "missing");
  const auto& m = j[key];
  if (!m.contains("value") || !m["value"].is_number() || !m.contains("defined") ||
      !m["defined"].is_boolean()) {
    schema(std::string("report.") + key, "expected {value, defined}");
  }
  return {m["value"].get<double>(), m["defined"].get<bool>()};
}

json counts_json(const ConfusionCounts& c) { return json{{"tp", c.tp}, {"fp", c.fp}, {"fn", c.fn}}; }

ConfusionCounts counts_from(const json& j, const char* key) {
  if (!j.contains(key) || !j[key].is_object()) schema(std::string("report.") + key, "missing");
  ConfusionCounts c;
  for (auto [name, field] : {std::pair{"tp", &c.tp}, std::pair{"fp", &c.fp}, std::pair{"fn", &c.fn}}) {
    const auto& v = j[key];
    if (!v.contains(name) || !v[name].is_number_unsigned()) {
      schema(std::string("report.") + key + "." + name, "expected a count");
    }
    *field = v[name].get<std::uint64_t>();
  }
  return c;
}

}  // namespace

std::string report_to_json(const EvalReport& report) {
  json per_object = json::array();
  for (const auto& o : report.per_object) {
    per_object.push_back({{"scan", o.scan},
                          {"instance_id", o.instance_id},
                          {"tp", o.tp},
                          {"fn", o.fn},
                          {"recall", 100.0 * o.recall()}});
  }
  json j = {{"recall_obj", metric_json(report.recall_obj)},
            {"iou_wo_ego", metric_json(report.iou_wo_ego)},
            {"iou_conventional", metric_json(report.iou_conventional)},
            {"counts_wo_ego", counts_json(report.counts_wo_ego)},
            {"counts_with_ego", counts_json(report.counts_with_ego)},
            {"per_object", per_object}};
  return j.dump(2) + "\n";
}

EvalReport report_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception&) {
    schema("report", "not valid JSON");
  }
  if (!j.is_object()) schema("report", "expected an object");
  EvalReport r;
  r.recall_obj = metric_from(j, "recall_obj");
  r.iou_wo_ego = metric_from(j, "iou_wo_ego");
  r.iou_conventional = metric_from(j, "iou_conventional");
  r.counts_wo_ego = counts_from(j, "counts_wo_ego");
  r.counts_with_ego = counts_from(j, "counts_with_ego");
  if (!j.contains("per_object") || !j["per_object"].is_array()) schema("report.per_object", "expected a list");
  for (const auto& o : j["per_object"]) {
    if (!o.is_object() || !o.contains("scan") || !o["scan"].is_number_unsigned() ||
        !o.contains("instance_id") || !o["instance_id"].is_string() || !o.contains("tp") ||
        !o["tp"].is_number_unsigned() || !o.contains("fn") || !o["fn"].is_number_unsigned()) {
      schema("report.per_object", "malformed entry");
    }
    r.per_object.push_back({o["scan"].get<std::size_t>(), o["instance_id"].get<std::string>(),
                            o["tp"].get<std::uint64_t>(), o["fn"].get<std::uint64_t>()});
  }
  return r;
}

}  // namespace top::io
