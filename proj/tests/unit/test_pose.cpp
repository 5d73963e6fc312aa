#include <doctest.h>

#include <sstream>

#include "reactkit/errors.hpp"
#include "reactkit/pose.hpp"
#include "reactkit/synth.hpp"
#include "support.hpp"

using namespace reactkit;
using reactkit::testing::random_stream;
using reactkit::testing::static_stream;

namespace {

std::string csv(const PoseStream& s) { return to_string(s, PoseFormat::csv); }

PoseStream parse_csv(const std::string& text) {
  std::istringstream in(text);
  return parse_pose_csv(in);
}

}  // namespace

TEST_CASE("three-frame CSV parses into three frames") {
  const auto s = parse_csv(csv(static_stream(3)));
  CHECK(s.size() == 3);
  for (const auto& f : s.frames) CHECK(f.landmarks.size() == 33);
  CHECK(s.frames[2].timestamp_ms == doctest::Approx(66.6667).epsilon(1e-4));
  CHECK_FALSE(s.timestamps_synthesized);
}

TEST_CASE("a frame with 32 landmarks is a SchemaError naming the frame") {
  auto s = static_stream(3);
  s.frames[1].landmarks.pop_back();
  try {
    parse_csv(csv(s));
    FAIL("expected SchemaError");
  } catch (const SchemaError& e) {
    CHECK(std::string(e.what()).find("frame 1") != std::string::npos);
    CHECK(std::string(e.what()).find("found 32") != std::string::npos);
  }
}

TEST_CASE("duplicate landmark ids are a SchemaError") {
  auto s = static_stream(2);
  s.frames[0].landmarks[5].id = 4;
  CHECK_THROWS_AS(parse_csv(csv(s)), SchemaError);
}

TEST_CASE("malformed rows report their line number") {
  auto text = csv(static_stream(2));
  // Line 1 is the header, so landmark 3 of frame 0 sits on line 5.
  std::istringstream lines(text);
  std::string out, line;
  for (int n = 1; std::getline(lines, line); ++n) out += (n == 5 ? "0,0,3,abc,0,0,1" : line) + "\n";
  try {
    parse_csv(out);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() == 5);
  }
  CHECK_THROWS_AS(parse_csv("frame,wrong\n"), ParseError);
  CHECK_THROWS_AS(parse_csv(""), EmptyStream);
  CHECK_THROWS_AS(parse_csv("frame,timestamp_ms,id,x,y,z,visibility\n"), EmptyStream);
}

TEST_CASE("60 s at 30 fps round-trips through writer and parser") {
  const auto pose = gen_pose_stream(60000.0, 30.0, {}, NoiseSpec{0.01, 5}, 5);
  REQUIRE(pose.stream.size() == 1800);
  for (auto fmt : {PoseFormat::csv, PoseFormat::jsonl}) {
    std::istringstream in(to_string(pose.stream, fmt));
    const auto back = fmt == PoseFormat::csv ? parse_pose_csv(in, 30.0, "synth") : parse_pose_jsonl(in, 30.0, "synth");
    CHECK(back.size() == 1800);
    CHECK(back.frames.front().timestamp_ms == 0.0);
    CHECK(back.frames.back().timestamp_ms == doctest::Approx(59966.6667).epsilon(1e-9));
    CHECK(back == pose.stream);
  }
}

TEST_CASE("round-trip is exact for arbitrary coordinates") {
  const auto s = random_stream(20, 11);
  for (auto fmt : {PoseFormat::csv, PoseFormat::jsonl}) {
    std::istringstream in(to_string(s, fmt));
    auto back = fmt == PoseFormat::csv ? parse_pose_csv(in, 30.0, "random") : parse_pose_jsonl(in, 30.0, "random");
    CHECK(back == s);
    CHECK(to_string(back, fmt) == to_string(s, fmt));
  }
}

TEST_CASE("missing timestamps are synthesized and flagged") {
  std::ostringstream os;
  os << "frame,timestamp_ms,id,x,y,z,visibility\n";
  for (int f = 0; f < 3; ++f)
    for (int id = 0; id < 33; ++id) os << f << ",," << id << ",0.5,0.5,0,1\n";
  const auto s = parse_csv(os.str());
  CHECK(s.timestamps_synthesized);
  CHECK(s.frames[2].timestamp_ms == doctest::Approx(2000.0 / 30.0));
  const auto report = validate_stream(s);
  CHECK(report.count(FindingKind::synthesized_timestamps) == 1);
  // Written back without timestamps.
  CHECK(parse_csv(csv(s)).timestamps_synthesized);
}

TEST_CASE("JSONL accepts a null timestamp and the optional v field") {
  std::ostringstream os;
  for (int f = 0; f < 2; ++f) {
    os << R"({"frame":)" << f << R"(,"timestamp_ms":null,"landmarks":[)";
    for (int id = 0; id < 33; ++id) os << (id ? "," : "") << R"({"id":)" << id << R"(,"x":0.1,"y":0.2,"z":0.3})";
    os << "]}\n";
  }
  std::istringstream in(os.str());
  const auto s = parse_pose_jsonl(in);
  CHECK(s.size() == 2);
  CHECK(s.timestamps_synthesized);
  CHECK(s.frames[0].landmarks[7].visibility == 1.0);
  std::istringstream bad("{\"frame\":0,\n");
  CHECK_THROWS_AS(parse_pose_jsonl(bad), ParseError);
}

TEST_CASE("select_upper_body keeps ids 0..24") {
  const auto s = random_stream(5, 3);
  const auto u = select_upper_body(s);
  REQUIRE(u.size() == s.size());
  for (std::size_t i = 0; i < u.size(); ++i) {
    REQUIRE(u.frames[i].landmarks.size() == 25);
    for (int k = 0; k < 25; ++k) CHECK(u.frames[i].landmarks[static_cast<std::size_t>(k)].id == k);
    CHECK(u.frames[i].timestamp_ms == s.frames[i].timestamp_ms);
    CHECK(u.frames[i].frame_index == s.frames[i].frame_index);
  }
  CHECK(select_upper_body(u) == u);
}

TEST_CASE("select_upper_body ignores lower-body perturbations") {
  const auto s = random_stream(10, 4);
  auto t = s;
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> u(-100.0, 100.0);
  for (auto& f : t.frames)
    for (auto& lm : f.landmarks)
      if (lm.id >= 25) {
        lm.x = u(rng);
        lm.y = u(rng);
        lm.z = u(rng);
        lm.visibility = 0.5;
      }
  CHECK(csv(select_upper_body(s)) == csv(select_upper_body(t)));
}

TEST_CASE("regular stream validates clean") {
  CHECK(validate_stream(static_stream(90)).clean());
}

TEST_CASE("one dropped frame is one gap at that index") {
  auto s = static_stream(10);
  s.frames.erase(s.frames.begin() + 4);
  for (std::size_t i = 4; i < s.frames.size(); ++i) s.frames[i].frame_index = static_cast<std::int64_t>(i);
  const auto report = validate_stream(s);
  REQUIRE(report.findings.size() == 1);
  CHECK(report.findings[0].kind == FindingKind::gap);
  CHECK(report.findings[0].position == 4);
  CHECK(is_gap(66.7, 1000.0 / 30.0));
  CHECK_FALSE(is_gap(40.0, 1000.0 / 30.0));
}

TEST_CASE("visibility 1.2 is a range finding naming landmark and frame") {
  auto s = static_stream(5);
  s.frames[3].landmarks[7].visibility = 1.2;
  const auto report = validate_stream(s);
  REQUIRE(report.findings.size() == 1);
  const auto& f = report.findings[0];
  CHECK(f.kind == FindingKind::out_of_range);
  CHECK(f.frame_index == 3);
  REQUIRE(f.landmark_id);
  CHECK(*f.landmark_id == 7);
  CHECK(to_json(report).find("out_of_range") != std::string::npos);
}

TEST_CASE("non-increasing timestamps are anomalies and validation never mutates") {
  auto s = static_stream(6);
  s.frames[3].timestamp_ms = s.frames[2].timestamp_ms;
  const auto copy = s;
  const auto report = validate_stream(s);
  CHECK(report.count(FindingKind::timestamp_anomaly) >= 1);
  CHECK(s == copy);
}

TEST_CASE("format from extension") {
  CHECK(pose_format_from_path("a/b.jsonl") == PoseFormat::jsonl);
  CHECK(pose_format_from_path("a/b.csv") == PoseFormat::csv);
}
