#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "reactkit/errors.hpp"
#include "reactkit/kinematics.hpp"
#include "support.hpp"

using namespace reactkit;
using reactkit::testing::random_stream;
using reactkit::testing::static_stream;

namespace {

// Naive per-landmark loop, written independently of the library.
double brute_displacement(const PoseFrame& a, const PoseFrame& b, bool use_z) {
  double sum = 0.0;
  for (std::size_t k = 0; k < a.landmarks.size(); ++k) {
    const double dx = b.landmarks[k].x - a.landmarks[k].x;
    const double dy = b.landmarks[k].y - a.landmarks[k].y;
    const double dz = use_z ? b.landmarks[k].z - a.landmarks[k].z : 0.0;
    sum += std::sqrt(dx * dx + dy * dy + dz * dz);
  }
  return sum;
}

}  // namespace

TEST_CASE("identical frames have zero displacement") {
  const auto s = static_stream(2);
  CHECK(frame_displacement(s.frames[0], s.frames[0], Dims::xyz) == 0.0);
}

TEST_CASE("3-4-5 displacement in xy") {
  auto s = static_stream(2);
  s.frames[1].landmarks[3].x += 0.3;
  s.frames[1].landmarks[3].y += 0.4;
  s.frames[1].landmarks[3].z += 7.0;  // ignored in xy
  CHECK(frame_displacement(s.frames[0], s.frames[1], Dims::xy) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("displacement matches a brute-force landmark sum") {
  const auto s = select_upper_body(random_stream(40, 17));
  for (std::size_t i = 1; i < s.frames.size(); ++i) {
    CHECK(frame_displacement(s.frames[i - 1], s.frames[i], Dims::xyz) ==
          doctest::Approx(brute_displacement(s.frames[i - 1], s.frames[i], true)).epsilon(1e-12));
    CHECK(frame_displacement(s.frames[i - 1], s.frames[i], Dims::xy) ==
          doctest::Approx(brute_displacement(s.frames[i - 1], s.frames[i], false)).epsilon(1e-12));
  }
}

TEST_CASE("mismatched landmark sets are rejected") {
  const auto s = static_stream(2);
  const auto u = select_upper_body(s);
  CHECK_THROWS_AS(frame_displacement(s.frames[0], u.frames[1], Dims::xyz), MismatchedLandmarks);
}

TEST_CASE("static subject gives an all-zero series of length n - 1") {
  const auto v = velocity_series(static_stream(30));
  CHECK(v.size() == 29);
  CHECK(v.v.isZero(0.0));
  for (Eigen::Index i = 1; i < v.size(); ++i) CHECK(v.t_ms(i) > v.t_ms(i - 1));
  CHECK(v.t_ms(0) == doctest::Approx(1000.0 / 30.0));
}

TEST_CASE("one landmark at 0.1 units per frame is 3 units per second at 30 fps") {
  auto s = static_stream(20);
  for (std::size_t i = 0; i < s.frames.size(); ++i) s.frames[i].landmarks[0].x += 0.1 * static_cast<double>(i);
  const auto v = velocity_series(s);
  for (Eigen::Index i = 0; i < v.size(); ++i) CHECK(v.v(i) == doctest::Approx(3.0).epsilon(1e-12));
}

TEST_CASE("a dropped frame is a GapError naming it, or a flag") {
  auto s = static_stream(10);
  s.frames.erase(s.frames.begin() + 6);
  try {
    velocity_series(s);
    FAIL("expected GapError");
  } catch (const GapError& e) {
    CHECK(std::string(e.what()).find("7") != std::string::npos);
  }
  const auto v = velocity_series(s, Dims::xyz, GapPolicy::flag);
  CHECK(v.has_gaps());
  CHECK(std::count(v.gap.begin(), v.gap.end(), true) == 1);
  CHECK(v.gap[5]);
}

TEST_CASE("fewer than two frames is rejected") {
  CHECK_THROWS_AS(velocity_series(static_stream(1)), Error);
}

TEST_CASE("translation, scaling and reversal properties") {
  const auto s = random_stream(50, 23);
  const auto base = velocity_series(s);

  auto shifted = s;
  for (auto& f : shifted.frames)
    for (auto& lm : f.landmarks) {
      lm.x += 3.25;
      lm.y -= 1.5;
      lm.z += 0.75;
    }
  CHECK(velocity_series(shifted).v.isApprox(base.v, 1e-12));

  auto scaled = s;
  for (auto& f : scaled.frames)
    for (auto& lm : f.landmarks) {
      lm.x *= 2.5;
      lm.y *= 2.5;
      lm.z *= 2.5;
    }
  CHECK(velocity_series(scaled).v.isApprox(2.5 * base.v, 1e-12));

  auto reversed = s;
  std::reverse(reversed.frames.begin(), reversed.frames.end());
  for (std::size_t i = 0; i < reversed.frames.size(); ++i) {
    reversed.frames[i].frame_index = static_cast<std::int64_t>(i);
    reversed.frames[i].timestamp_ms = s.frames[i].timestamp_ms;
  }
  const auto rv = velocity_series(reversed);
  CHECK(rv.v.isApprox(base.v.reverse().eval(), 1e-12));
}

TEST_CASE("v is zero exactly where consecutive frames are identical") {
  auto s = random_stream(12, 8);
  s.frames[5] = s.frames[4];
  s.frames[5].frame_index = 5;
  s.frames[5].timestamp_ms = 5000.0 / 30.0;
  const auto v = velocity_series(s);
  for (Eigen::Index i = 0; i < v.size(); ++i) CHECK((v.v(i) == 0.0) == (i == 4));
}

TEST_CASE("velocity CSV export") {
  auto s = static_stream(3);
  s.frames[2].landmarks[0].x += 0.1;
  std::ostringstream os;
  write_velocity_csv(os, velocity_series(s));
  const auto text = os.str();
  CHECK(text.rfind("frame,t_ms,v\n", 0) == 0);
  CHECK(std::count(text.begin(), text.end(), '\n') == 3);
}
