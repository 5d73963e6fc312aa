#include <doctest.h>

#include <cmath>
#include <random>

#include "reactkit/detector.hpp"
#include "reactkit/errors.hpp"
#include "reactkit/synth.hpp"
#include "support.hpp"

using namespace reactkit;

namespace {

constexpr double kFrame = 1000.0 / 30.0;

// Hand-built convolution series on a regular grid, for locate_peak.
ConvolutionSeries grid_series(const Eigen::VectorXd& y, double frame_ms = kFrame) {
  ConvolutionSeries c;
  c.y = y;
  c.t_ms = Eigen::VectorXd::LinSpaced(y.size(), 0.0, frame_ms * static_cast<double>(y.size() - 1));
  c.gap.assign(static_cast<std::size_t>(y.size()), false);
  c.kernel_length = 3;
  c.kernel_center = 1;
  return c;
}

VelocitySeries series_of(const Eigen::VectorXd& v, double fps = 30.0) {
  VelocitySeries s;
  s.v = v;
  s.t_ms = Eigen::VectorXd::LinSpaced(v.size(), 1000.0 / fps, 1000.0 / fps * static_cast<double>(v.size()));
  s.gap.assign(static_cast<std::size_t>(v.size()), false);
  s.frame_index.resize(static_cast<std::size_t>(v.size()));
  for (Eigen::Index i = 0; i < v.size(); ++i) s.frame_index[static_cast<std::size_t>(i)] = i + 1;
  s.fps = s.nominal_fps = fps;
  return s;
}

// Textbook "same" convolution, written independently: full convolution then a centered slice.
Eigen::VectorXd oracle_same(const Eigen::VectorXd& x, const Eigen::VectorXd& k, Eigen::Index c) {
  const Eigen::Index n = x.size(), m = k.size();
  Eigen::VectorXd full = Eigen::VectorXd::Zero(n + m - 1);
  for (Eigen::Index a = 0; a < n; ++a)
    for (Eigen::Index b = 0; b < m; ++b) full(a + b) += x(a) * k(b);
  return full.segment(c, n);
}

}  // namespace

TEST_CASE("kernel for 438 ms at 33.33 ms frames") {
  const auto k = build_kernel(438.0, 33.33);
  CHECK(k.duration_ms == 438.0);
  CHECK(k.mu_ms == 219.0);
  CHECK(k.sigma_ms == 54.75);
  CHECK(k.amplitude == 1.0);
  CHECK(k.length() == 14);
  CHECK(k(k.mu_ms) == 1.0);
  CHECK(k(k.mu_ms + k.sigma_ms) == doctest::Approx(std::exp(-0.5)).epsilon(1e-15));
  CHECK(k(k.mu_ms - k.sigma_ms) == doctest::Approx(0.6065306597).epsilon(1e-9));
}

TEST_CASE("kernel invariants over a range of durations") {
  for (double d = 100.0; d <= 1500.0; d += 37.0) {
    const auto k = build_kernel(d, kFrame);
    CHECK(k.sigma_ms == d / 8.0);
    CHECK(k.length() == std::llround(d / kFrame) + 1);
    for (Eigen::Index j = 0; j < k.length(); ++j) {
      CHECK(std::abs(k.samples(j) - k.samples(k.length() - 1 - j)) <= 1e-12 * k.samples(j));
      CHECK(k.samples(j) == doctest::Approx(k(k.sample_time(j))).epsilon(1e-12));
    }
    CHECK(k.sample_time(0) + k.sample_time(k.length() - 1) == doctest::Approx(d).epsilon(1e-12));
  }
}

TEST_CASE("kernel templated on float") {
  const auto k = build_kernel<float>(438.0f, 33.33f);
  CHECK(k.length() == 14);
  CHECK(k.samples.maxCoeff() <= 1.0f);
}

TEST_CASE("short baselines are KernelTooShort") {
  CHECK_THROWS_AS(build_kernel(90.0, kFrame), KernelTooShort);
  CHECK_THROWS_AS(build_kernel(0.0, kFrame), KernelTooShort);
  CHECK_NOTHROW(build_kernel(100.0, kFrame));
}

TEST_CASE("default window rule") {
  auto w = default_window(438, 154, 33.33);
  CHECK(w.length_ms == 1000.0);
  CHECK(w.length_frames == 30);
  w = default_window(400, 200, 33.33);
  CHECK(w.length_ms == 1000.0);
  CHECK(w.length_frames == 30);
  w = default_window(600, 300, 33.33);
  CHECK(w.length_ms == 2000.0);
  CHECK(w.length_frames == 60);
}

TEST_CASE("zero series convolves to zero") {
  const auto k = build_kernel(438.0, kFrame);
  const auto c = convolve(series_of(Eigen::VectorXd::Zero(100)), k);
  CHECK(c.y.isZero(0.0));
}

TEST_CASE("unit impulse reproduces the kernel centered on it") {
  for (double d : {400.0, 438.0}) {  // odd and even kernel lengths
    const auto k = build_kernel(d, kFrame);
    Eigen::VectorXd x = Eigen::VectorXd::Zero(80);
    const Eigen::Index at = 40;
    x(at) = 1.0;
    for (auto m : {ConvolutionMethod::direct, ConvolutionMethod::fft}) {
      const auto y = convolve_same(x, k.samples, m);
      for (Eigen::Index j = 0; j < k.length(); ++j) {
        CHECK(y(at - k.center_index() + j) == doctest::Approx(k.samples(j)).epsilon(1e-12));
      }
      CHECK(std::abs(y.sum() - k.samples.sum()) < 1e-12);
    }
  }
}

TEST_CASE("direct matches a textbook oracle and fft matches direct") {
  std::mt19937_64 rng(512);
  std::uniform_real_distribution<double> u(0.0, 5.0);
  Eigen::VectorXd x(512);
  for (auto& v : x) v = u(rng);
  const auto k = build_kernel(438.0, kFrame);
  const auto direct = convolve_same(x, k.samples, ConvolutionMethod::direct);
  const auto fft = convolve_same(x, k.samples, ConvolutionMethod::fft);
  const auto oracle = oracle_same(x, k.samples, k.center_index());
  CHECK((direct - oracle).cwiseAbs().maxCoeff() <= 1e-12 * oracle.cwiseAbs().maxCoeff());
  CHECK((fft - direct).cwiseAbs().maxCoeff() <= 1e-9 * direct.cwiseAbs().maxCoeff());
}

TEST_CASE("symmetric kernel: convolution equals cross-correlation") {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> n(0.0, 1.0);
  for (double d : {300.0, 438.0, 700.0}) {
    Eigen::VectorXd x(300);
    for (auto& v : x) v = n(rng);
    const auto k = build_kernel(d, kFrame);
    const auto conv = convolve_same(x, k.samples, ConvolutionMethod::direct);
    const auto corr = correlate_same(x, k.samples);
    CHECK((conv - corr).cwiseAbs().maxCoeff() <= 1e-12 * conv.cwiseAbs().maxCoeff());
  }
}

TEST_CASE("series shorter than the kernel is a LengthError") {
  CHECK_THROWS_AS(convolve(series_of(Eigen::VectorXd::Ones(5)), build_kernel(438.0, kFrame)), LengthError);
}

TEST_CASE("locate_peak: single maximum, ties, flat, range and gaps") {
  // Window opens at sample 3 so the kernel support fits before it.
  SearchWindow w{100.0, 30, 1000.0};
  Eigen::VectorXd y = Eigen::VectorXd::Zero(60);
  y(15) = 2.0;  // 400 ms after the window start
  auto p = locate_peak(grid_series(y), w);
  CHECK(p.t_max_ms == doctest::Approx(400.0).epsilon(1e-12));
  CHECK(p.value == 2.0);

  y.setZero();
  y(12) = 1.0;  // 300 ms
  y(18) = 1.0;  // 500 ms
  p = locate_peak(grid_series(y), w);
  CHECK(p.t_max_ms == doctest::Approx(300.0).epsilon(1e-12));

  CHECK_THROWS_AS(locate_peak(grid_series(Eigen::VectorXd::Zero(60)), w), FlatSignal);
  CHECK_THROWS_AS(locate_peak(grid_series(Eigen::VectorXd::Constant(60, 4.0)), w), FlatSignal);

  SearchWindow late{1500.0, 30, 1000.0};
  CHECK_THROWS_AS(locate_peak(grid_series(Eigen::VectorXd::Ones(60)), late), WindowOutOfRange);

  auto g = grid_series(y);
  g.gap[20] = true;
  CHECK_THROWS_AS(locate_peak(g, w), GapInWindow);
  g.gap[20] = false;
  g.gap[50] = true;  // outside window plus kernel support
  CHECK_NOTHROW(locate_peak(g, w));
}

TEST_CASE("reaction_time arithmetic") {
  const auto k = build_kernel(438.0, kFrame);
  CHECK(reaction_time(619.0, k) == 400.0);
  CHECK(reaction_time(219.0, k) == 0.0);
  CHECK_THROWS_AS(reaction_time(200.0, k), NegativeOnset);
}

TEST_CASE("detect recovers injected onsets") {
  SUBCASE("noise-free, onset 350 ms, D = 438") {
    BurstSpec b;
    b.onset_ms = 350.0;
    b.burst_sigma_ms = 438.0 / 8.0;
    b.peak_lead_ms = 219.0;
    const auto pose = gen_pose_stream(60000.0, 30.0, {{25000.0, {b}}}, NoiseSpec{}, 1);
    const auto est = detect(pose.stream, 25000.0, 438.0, {});
    CHECK(std::abs(est.rt_ms - 350.0) <= kFrame);
    CHECK(est.kernel.duration_ms == 438.0);
    CHECK(est.window.length_frames == 30);
    REQUIRE(est.series);
    REQUIRE(est.convolution);
    CHECK(est.convolution->size() == est.series->size());
  }
  SUBCASE("SNR 10, onset 400 ms") {
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
      BurstSpec b;
      b.onset_ms = 400.0;
      b.burst_sigma_ms = 438.0 / 8.0;
      b.peak_lead_ms = 219.0;
      const auto pose = gen_pose_stream(60000.0, 30.0, {{25000.0, {b}}},
                                        NoiseSpec{noise_sigma_for_snr(b.amplitude, 10.0, 30.0), seed}, seed);
      const auto est = detect(pose.stream, 25000.0, 438.0, {});
      CHECK(std::abs(est.rt_ms - 400.0) <= kFrame);
    }
  }
}

TEST_CASE("static subject is FlatSignal") {
  CHECK_THROWS_AS(detect(testing::static_stream(1800), 25000.0, 438.0, {}), FlatSignal);
}

TEST_CASE("two warnings give two estimates sharing one convolution") {
  BurstSpec b;
  b.onset_ms = 300.0;
  b.burst_sigma_ms = 50.0;
  b.peak_lead_ms = 200.0;
  const auto pose = gen_pose_stream(60000.0, 30.0, {{25000.0, {b}}, {45000.0, {b}}}, NoiseSpec{0.0005, 2}, 2);
  const auto est = detect_all(pose.stream, {25000.0, 45000.0}, 400.0, {});
  REQUIRE(est.size() == 2);
  CHECK(est[0].convolution == est[1].convolution);
  CHECK(std::abs(est[0].rt_ms - 300.0) <= kFrame);
  CHECK(std::abs(est[1].rt_ms - 300.0) <= kFrame);
  const auto json = to_json(est, false);
  CHECK(json.find("\"rt_ms\"") != std::string::npos);
  CHECK(json.find("\"trace\"") == std::string::npos);
  CHECK(to_json(est, true).find("\"trace\"") != std::string::npos);
}

TEST_CASE("direct and fft detection agree") {
  BurstSpec b;
  b.onset_ms = 250.0;
  b.burst_sigma_ms = 60.0;
  b.peak_lead_ms = 240.0;
  const auto pose = gen_pose_stream(40000.0, 30.0, {{25000.0, {b}}}, NoiseSpec{0.001, 4}, 4);
  DetectOptions direct;
  direct.method = ConvolutionMethod::direct;
  const auto a = detect(pose.stream, 25000.0, 480.0, {}, direct);
  const auto f = detect(pose.stream, 25000.0, 480.0, {});
  CHECK(a.t_max_ms == f.t_max_ms);
  CHECK(a.peak_value == doctest::Approx(f.peak_value).epsilon(1e-9));
}

TEST_CASE("argmax invariances on a random series") {
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Eigen::VectorXd v(400);
  for (auto& x : v) x = u(rng);
  const auto k = build_kernel(438.0, kFrame);
  const auto base_series = series_of(v);
  const auto base = convolve(base_series, k);
  const SearchWindow w = default_window(438, 154, kFrame, 3000.0);
  const auto p = locate_peak(base, w);

  SUBCASE("amplitude") {
    for (double c : {0.1, 10.0}) {
      const auto scaled = convolve(series_of(c * v), k);
      CHECK(locate_peak(scaled, w).t_max_ms == p.t_max_ms);
      CHECK(scaled.y.isApprox(c * base.y, 1e-12));
    }
  }
  SUBCASE("constant offset shifts values by c * sum(kernel)") {
    const auto off = convolve(series_of(v.array() + 2.5), k);
    const Eigen::Index lo = k.length(), hi = v.size() - k.length();
    for (Eigen::Index i = lo; i < hi; ++i) {
      CHECK(off.y(i) == doctest::Approx(base.y(i) + 2.5 * k.samples.sum()).epsilon(1e-12));
    }
    CHECK(locate_peak(off, w).t_max_ms == p.t_max_ms);
  }
  SUBCASE("shift by k frames") {
    for (Eigen::Index shift : {1, 5, 17}) {
      Eigen::VectorXd d = Eigen::VectorXd::Zero(v.size() + shift);
      d.tail(v.size()) = v;
      const auto c = convolve(series_of(d), k);
      const auto q = locate_peak(c, SearchWindow{w.start_ms + static_cast<double>(shift) * kFrame,
                                                 w.length_frames, w.length_ms});
      CHECK(q.index == p.index + shift);
      CHECK(q.t_max_ms == doctest::Approx(p.t_max_ms).epsilon(1e-9));
    }
  }
}
