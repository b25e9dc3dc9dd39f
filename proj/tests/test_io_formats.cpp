#include <gtest/gtest.h>

#include <nlohmann/json.hpp>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <random>

#include "top/io_formats.hpp"

using namespace top;
using namespace top::io;

namespace {

template <typename Fn>
ErrorCode error_of(Fn&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error raised";
  return ErrorCode::IoError;
}

class TempDir {
 public:
  TempDir() {
    path_ = fs::temp_directory_path() /
            ("top_io_" + std::to_string(std::random_device{}()) + "_" +
             ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  fs::path operator/(const std::string& name) const { return path_ / name; }

 private:
  fs::path path_;
};

std::string floats(const std::vector<float>& v) {
  std::string s(v.size() * 4, '\0');
  std::memcpy(s.data(), v.data(), s.size());
  return s;
}

OverlapSet random_overlaps(std::mt19937_64& gen, std::size_t n) {
  std::uniform_real_distribution<float> u(-60.0f, 60.0f);
  std::uniform_real_distribution<float> c(0.01f, 1.0f);
  OverlapSet s;
  s.points.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    auto& p = s.points[k];
    p.current_point_index = static_cast<std::uint32_t>(k / 7);
    p.adjacent_scan_offset = static_cast<std::int8_t>(k % 7 < 3 ? -1 - static_cast<int>(k % 7) : 1 + k % 7);
    p.adjacent_point_index = static_cast<std::uint32_t>(gen() % 30000);
    p.sample_rank = static_cast<std::uint8_t>(gen() % 5);
    // Values that survive the float32 round trip exactly.
    p.position = Vec3(u(gen), u(gen), u(gen));
    p.time = static_cast<float>(0.1 * p.adjacent_scan_offset);
    p.state = static_cast<OccupancyState>(gen() % 3);
    p.confidence = c(gen);
  }
  std::sort(s.points.begin(), s.points.end(), canonical_less);
  return s;
}

}  // namespace

TEST(ScanBin, ThirtyTwoBytesAreTwoPoints) {
  const auto s = parse_scan_bin(floats({1, 2, 3, 0.5f, -4, 5, 6.25f, 0}));
  ASSERT_EQ(s.size(), 2u);
  EXPECT_EQ(s.points[1], Vec3(-4, 5, 6.25));
  EXPECT_EQ(s.intensity[0], 0.5f);
  EXPECT_EQ(s.frame, Scan::Frame::Sensor);
}

TEST(ScanBin, BadLength) {
  EXPECT_EQ(error_of([] { parse_scan_bin(std::string(17, '\0')); }), ErrorCode::BadLength);
}

TEST(ScanBin, RoundTripIsBitIdentical) {
  TempDir dir;
  std::mt19937_64 gen(1);
  std::uniform_real_distribution<float> u(-80.0f, 80.0f);
  std::vector<float> raw;
  for (int k = 0; k < 4000; ++k) raw.push_back(u(gen));
  const std::string bytes = floats(raw);
  write_file(dir / "a.bin", bytes);
  const Scan s = read_scan_bin(dir / "a.bin");
  write_scan_bin(dir / "b.bin", s);
  EXPECT_EQ(read_file(dir / "b.bin"), bytes);
}

TEST(Poses, IdentityAndTranslation) {
  const auto p = parse_poses("1 0 0 0 0 1 0 0 0 0 1 0\n1 0 0 2.5 0 1 0 -1 0 0 1 3\n");
  ASSERT_EQ(p.size(), 2u);
  EXPECT_EQ(p[0].rotation, Mat3::Identity());
  EXPECT_EQ(p[0].translation, Vec3::Zero());
  EXPECT_EQ(p[1].translation, Vec3(2.5, -1, 3));
}

TEST(Poses, Errors) {
  EXPECT_EQ(error_of([] { parse_poses("1 0 0 0 0 1 0 0 0 0 1\n"); }), ErrorCode::MalformedLine);
  EXPECT_EQ(error_of([] { parse_poses("1 0 0 0 0 1 0 0 0 0 1 x\n"); }), ErrorCode::MalformedLine);
  EXPECT_EQ(error_of([] { parse_poses("1.1 0 0 0 0 1 0 0 0 0 1 0\n"); }), ErrorCode::NonRigid);
  // A reflection is orthonormal but not a rotation.
  EXPECT_EQ(error_of([] { parse_poses("-1 0 0 0 0 1 0 0 0 0 1 0\n"); }), ErrorCode::NonRigid);
  EXPECT_EQ(error_of([] { read_poses("/nonexistent/poses.txt"); }), ErrorCode::MissingPose);
}

TEST(Poses, SmallDriftIsReOrthonormalized) {
  const auto p = parse_poses("1.00001 0 0 0 0 1 0 0 0 0 0.99999 0\n");
  EXPECT_LE(p[0].orthonormality_error(), 1e-12);
  EXPECT_NEAR(p[0].rotation(0, 0), 1.0, 1e-12);
}

TEST(Poses, TextRoundTripIsValueIdentical) {
  TempDir dir;
  std::vector<RigidTransform> poses;
  std::mt19937_64 gen(2);
  std::uniform_real_distribution<double> u(-100.0, 100.0);
  for (int k = 0; k < 50; ++k) poses.push_back(RigidTransform::from_yaw(u(gen), Vec3(u(gen), u(gen), u(gen))));
  write_poses(dir / "poses.txt", poses);
  const auto back = read_poses(dir / "poses.txt");
  ASSERT_EQ(back.size(), poses.size());
  for (std::size_t k = 0; k < poses.size(); ++k) {
    EXPECT_EQ(back[k].rotation, poses[k].rotation);
    EXPECT_EQ(back[k].translation, poses[k].translation);
  }
}

TEST(Times, RoundTrip) {
  TempDir dir;
  const std::vector<double> t{0.0, 0.1, 0.2000000001, 1e9 + 0.05};
  write_times(dir / "times.txt", t);
  EXPECT_EQ(read_times(dir / "times.txt"), t);
}

TEST(OverlapFile, EmptySet) {
  const std::string bytes = encode_overlap_set({}, SensorConfig{}, "{}");
  const auto f = decode_overlap_set(bytes);
  EXPECT_EQ(f.header.record_count, 0u);
  EXPECT_EQ(f.set.size(), 0u);
  EXPECT_EQ(f.header.config_hash, fnv1a64("{}"));
  EXPECT_EQ(std::memcmp(bytes.data(), "TOVP", 4), 0);
}

TEST(OverlapFile, RecordSizeAndLayout) {
  OverlapSet s;
  OverlapPoint p;
  p.current_point_index = 0x01020304;
  p.adjacent_scan_offset = -3;
  p.adjacent_point_index = 7;
  p.position = Vec3(1, 2, 3);
  p.time = -0.25;
  p.state = OccupancyState::Unknown;
  p.confidence = 0.5;
  p.sample_rank = 4;
  s.points = {p};
  const std::string empty = encode_overlap_set({}, SensorConfig{}, "{}");
  const std::string one = encode_overlap_set(s, SensorConfig{}, "{}");
  ASSERT_EQ(one.size() - empty.size(), kOverlapRecordSize);
  const auto* r = reinterpret_cast<const unsigned char*>(one.data() + empty.size());
  EXPECT_EQ(r[0], 0x04);
  EXPECT_EQ(r[3], 0x01);
  EXPECT_EQ(static_cast<std::int8_t>(r[4]), -3);
  EXPECT_EQ(r[5], 7);
  float x = 0.0f;
  std::memcpy(&x, r + 9, 4);
  EXPECT_EQ(x, 1.0f);
  EXPECT_EQ(r[25], 2);
  float conf = 0.0f;
  std::memcpy(&conf, r + 26, 4);
  EXPECT_EQ(conf, 0.5f);
  EXPECT_EQ(r[30], 4);
}

TEST(OverlapFile, LargeRoundTripIsByteIdentical) {
  TempDir dir;
  std::mt19937_64 gen(3);
  const auto set = random_overlaps(gen, 1'000'000);
  write_overlap_set(dir / "o.tovp", set, SensorConfig{}, R"({"n":6})");
  const std::string first = read_file(dir / "o.tovp");
  const auto back = read_overlap_set(dir / "o.tovp");
  ASSERT_EQ(back.set.size(), set.size());
  for (std::size_t k = 0; k < set.size(); k += 997) {
    EXPECT_EQ(back.set.points[k].position, set.points[k].position);
    EXPECT_EQ(back.set.points[k].state, set.points[k].state);
    EXPECT_EQ(back.set.points[k].adjacent_scan_offset, set.points[k].adjacent_scan_offset);
  }
  EXPECT_EQ(encode_overlap_set(back.set, back.header.sensor, back.header.config_json), first);
}

TEST(OverlapFile, CountMismatch) {
  std::mt19937_64 gen(4);
  const auto set = random_overlaps(gen, 4);
  std::string bytes = encode_overlap_set(set, SensorConfig{}, "{}");
  // The record count follows the 4-byte magic and the u16 version.
  const std::uint64_t five = 5;
  std::memcpy(bytes.data() + 6, &five, 8);
  EXPECT_EQ(error_of([&] { decode_overlap_set(bytes); }), ErrorCode::CountMismatch);
  bytes.pop_back();
  EXPECT_EQ(error_of([&] { decode_overlap_set(bytes); }), ErrorCode::TruncatedFile);
}

TEST(OverlapFile, MagicVersionAndHash) {
  const std::string good = encode_overlap_set({}, SensorConfig{}, "{}");
  std::string bad = good;
  bad[0] = 'X';
  EXPECT_EQ(error_of([&] { decode_overlap_set(bad); }), ErrorCode::MagicMismatch);
  bad = good;
  bad[4] = 9;
  EXPECT_EQ(error_of([&] { decode_overlap_set(bad); }), ErrorCode::VersionUnsupported);
  EXPECT_EQ(error_of([&] { decode_overlap_set(good, fnv1a64("other")); }), ErrorCode::InvalidConfig);
  EXPECT_NO_THROW(decode_overlap_set(good, fnv1a64("{}")));
}

TEST(OverlapFile, RejectsUnsortedInput) {
  std::mt19937_64 gen(5);
  auto set = random_overlaps(gen, 20);
  std::swap(set.points[0], set.points[19]);
  EXPECT_EQ(error_of([&] { encode_overlap_set(set, SensorConfig{}, "{}"); }), ErrorCode::SchemaViolation);
}

TEST(ReconFile, RoundTrip) {
  ReconFile f;
  f.n_points = 2;
  f.config_json = "{}";
  f.config_hash = fnv1a64("{}");
  for (std::uint32_t i = 0; i < 2; ++i) {
    for (int k = 0; k < 30; ++k) {
      f.samples.push_back({Vec3(i, k, 0.5), 0.0, k < 5 ? OccupancyState::Occupied : OccupancyState::Free, i});
    }
  }
  const std::string bytes = encode_recon_samples(f);
  const auto back = decode_recon_samples(bytes);
  EXPECT_EQ(back.samples.size(), 60u);
  EXPECT_EQ(back.sampling.occupied_per_beam, 5u);
  EXPECT_EQ(encode_recon_samples(back), bytes);
  f.samples[3].current_point_index = 9;
  EXPECT_EQ(error_of([&] { decode_recon_samples(encode_recon_samples(f)); }), ErrorCode::SchemaViolation);
}

TEST(Probabilities, RoundTripAndRange) {
  const std::vector<StatePrediction> p{{{0.25, 0.5, 0.25}}, {{1, 0, 0}}};
  const auto back = decode_probabilities(encode_probabilities(p));
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[0].probabilities, p[0].probabilities);
  std::string bad = encode_probabilities({{{1.5, 0, 0}}});
  EXPECT_EQ(error_of([&] { decode_probabilities(bad); }), ErrorCode::SchemaViolation);
}

TEST(Labels, LengthMismatchAndRange) {
  TempDir dir;
  write_labels(dir / "l.label", {MotionClass::Static, MotionClass::Moving, MotionClass::UnknownMotion});
  EXPECT_EQ(read_labels(dir / "l.label", 3)[1], MotionClass::Moving);
  EXPECT_EQ(error_of([&] { read_labels(dir / "l.label", 4); }), ErrorCode::LengthMismatch);
  write_u8_per_point(dir / "p.bin", {0, 1, 3});
  EXPECT_EQ(error_of([&] { read_u8_per_point(dir / "p.bin", 3, 1); }), ErrorCode::SchemaViolation);
}

TEST(Boxes, NegativeSizeNamesTheField) {
  const std::string line =
      R"({"instance_id":"a","category":"VEHICLE","timestamp":0.0,"center":[0,0,0],"size":[1,-2,1],"yaw":0})";
  try {
    parse_boxes_jsonl(line + "\n");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::SchemaViolation);
    EXPECT_NE(std::string(e.what()).find("size"), std::string::npos);
  }
}

TEST(Boxes, GroupsAndSortsKeyframes) {
  const std::string text =
      R"({"instance_id":"b","category":"HUMAN","timestamp":0.5,"center":[1,0,0],"size":[1,1,2],"yaw":0.1,"scan":5})"
      "\n"
      R"({"instance_id":"a","category":"VEHICLE","timestamp":0.0,"center":[0,0,0],"size":[4,2,1.5],"yaw":0})"
      "\n\n"
      R"({"instance_id":"b","category":"HUMAN","timestamp":0.0,"center":[0,0,0],"size":[1,1,2],"yaw":0.1,"scan":0})"
      "\n";
  const auto tracks = parse_boxes_jsonl(text);
  ASSERT_EQ(tracks.size(), 2u);
  const auto& b = tracks[0].instance_id == "b" ? tracks[0] : tracks[1];
  ASSERT_EQ(b.keyframes.size(), 2u);
  EXPECT_EQ(b.keyframes[0].timestamp, 0.0);
  EXPECT_EQ(b.keyframes[1].scan, 5);
  EXPECT_EQ(b.category, ObjectCategory::Human);
  const auto again = parse_boxes_jsonl(format_boxes_jsonl(tracks));
  ASSERT_EQ(again.size(), 2u);
  for (std::size_t k = 0; k < 2; ++k) {
    EXPECT_EQ(again[k].instance_id, tracks[k].instance_id);
    EXPECT_EQ(again[k].keyframes.size(), tracks[k].keyframes.size());
    EXPECT_EQ(again[k].keyframes.back().box.center, tracks[k].keyframes.back().box.center);
  }
}

TEST(Boxes, MalformedLines) {
  EXPECT_EQ(error_of([] { parse_boxes_jsonl("{not json}\n"); }), ErrorCode::SchemaViolation);
  EXPECT_EQ(error_of([] {
              parse_boxes_jsonl(R"({"instance_id":"a","category":"TRUCK","timestamp":0,"center":[0,0,0],"size":[1,1,1]})");
            }),
            ErrorCode::SchemaViolation);
}

TEST(Report, RoundTrip) {
  EvalReport r;
  r.recall_obj = {62.5, true};
  r.iou_wo_ego = {100.0 / 3.0, true};
  r.iou_conventional = {0.0, false};
  r.counts_wo_ego = {5, 5, 5};
  r.counts_with_ego = {105, 5, 5};
  r.per_object = {{0, "a", 4, 0}, {0, "b", 1, 3}};
  const std::string text = report_to_json(r);
  const auto j = nlohmann::json::parse(text);
  EXPECT_EQ(j["recall_obj"]["value"], 62.5);
  EXPECT_EQ(j["iou_conventional"]["defined"], false);
  const auto back = report_from_json(text);
  EXPECT_EQ(back.recall_obj.value, r.recall_obj.value);
  EXPECT_EQ(back.iou_wo_ego.value, r.iou_wo_ego.value);
  EXPECT_FALSE(back.iou_conventional.defined);
  EXPECT_EQ(back.counts_with_ego, r.counts_with_ego);
  ASSERT_EQ(back.per_object.size(), 2u);
  EXPECT_EQ(back.per_object[1].instance_id, "b");
  EXPECT_EQ(report_to_json(back), text);
}

// Mutated and truncated inputs may only raise the library's own errors.
TEST(Fuzz, ReadersOnlyThrowLibraryErrors) {
  std::mt19937_64 gen(77);
  std::mt19937_64 data_gen(8);
  const std::string overlap = encode_overlap_set(random_overlaps(data_gen, 40), SensorConfig{}, R"({"a":1})");
  ReconFile rf;
  rf.n_points = 1;
  rf.config_json = "{}";
  for (int k = 0; k < 30; ++k) rf.samples.push_back({Vec3(1, 2, 3), 0.0, OccupancyState::Free, 0});
  const std::string recon = encode_recon_samples(rf);
  const std::string probs = encode_probabilities({{{0.2, 0.3, 0.5}}, {{0.1, 0.1, 0.8}}});
  const std::string poses = "1 0 0 0 0 1 0 0 0 0 1 0\n1 0 0 1 0 1 0 2 0 0 1 3\n";
  const std::string boxes =
      R"({"instance_id":"a","category":"VEHICLE","timestamp":0.0,"center":[0,0,0],"size":[4,2,1.5],"yaw":0})"
      "\n";

  auto mutate = [&](std::string s) {
    const int kind = static_cast<int>(gen() % 3);
    if (kind == 0 && !s.empty()) {
      s.resize(gen() % s.size());
    } else {
      const int flips = 1 + static_cast<int>(gen() % 8);
      for (int k = 0; k < flips && !s.empty(); ++k) s[gen() % s.size()] = static_cast<char>(gen());
    }
    return s;
  };
  auto survives = [](auto&& fn) {
    try {
      fn();
    } catch (const Error&) {
    } catch (...) {
      return false;
    }
    return true;
  };
  for (int trial = 0; trial < 3000; ++trial) {
    const auto o = mutate(overlap);
    ASSERT_TRUE(survives([&] { decode_overlap_set(o); })) << trial;
    const auto r = mutate(recon);
    ASSERT_TRUE(survives([&] { decode_recon_samples(r); })) << trial;
    const auto p = mutate(probs);
    ASSERT_TRUE(survives([&] { decode_probabilities(p); })) << trial;
    const auto t = mutate(poses);
    ASSERT_TRUE(survives([&] { parse_poses(t); })) << trial;
    const auto b = mutate(boxes);
    ASSERT_TRUE(survives([&] { parse_boxes_jsonl(b); })) << trial;
    const auto s = mutate(std::string(64, '\x01'));
    ASSERT_TRUE(survives([&] { parse_scan_bin(s); })) << trial;
  }
}
