#pragma once

// Seeded detector accuracy trials: one warning per 60 s stream, burst sigma
// mismatched against the kernel by up to 25%, noise set from the SNR.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "reactkit/detector.hpp"
#include "reactkit/synth.hpp"

namespace reactkit::testing {

struct TrialOutcome {
  double injected_onset_ms = 0.0;
  double rt_ms = 0.0;
  double error_ms = 0.0;
  bool failed = false;  // detector threw
};

inline TrialOutcome accuracy_trial(std::uint64_t seed, double snr, double fps = 30.0) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> dn(438.0, 154.0);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double frame_ms = 1000.0 / fps;
  const double d = std::clamp(dn(rng), 150.0, 700.0);
  const double warning_ms = 25000.0;

  BurstSpec b;
  b.amplitude = 1.0;
  b.burst_sigma_ms = d / 8.0 * (1.0 + 0.25 * (2.0 * u(rng) - 1.0));
  b.peak_lead_ms = d / 2.0;
  const double lo = kMinOnsetMs;
  const double hi = 1000.0 - d / 2.0 - 2.0 * frame_ms;
  b.onset_ms = lo + u(rng) * (hi - lo);

  TrialOutcome out;
  out.injected_onset_ms = b.onset_ms;
  const NoiseSpec noise{noise_sigma_for_snr(b.amplitude, snr, fps), seed ^ 0x5bd1e995ULL};
  const auto pose = gen_pose_stream(60000.0, fps, {{warning_ms, {b}}}, noise, seed + 17);
  try {
    const auto est = detect(pose.stream, warning_ms, d, {});
    out.rt_ms = est.rt_ms;
    out.error_ms = est.rt_ms - b.onset_ms;
  } catch (const std::exception&) {
    out.failed = true;
  }
  return out;
}

struct TrialSummary {
  int trials = 0;
  int within_1 = 0;  // |error| <= 1 frame
  int within_2 = 0;
  int failed = 0;
  double median_abs_error_ms = 0.0;
  double p95_abs_error_ms = 0.0;
};

inline TrialSummary run_trials(std::uint64_t first_seed, int count, double snr, double fps = 30.0) {
  const double frame_ms = 1000.0 / fps;
  TrialSummary s;
  std::vector<double> errs;
  for (int i = 0; i < count; ++i) {
    const auto o = accuracy_trial(first_seed + static_cast<std::uint64_t>(i), snr, fps);
    ++s.trials;
    if (o.failed) {
      ++s.failed;
      errs.push_back(1e9);
      continue;
    }
    const double e = std::fabs(o.error_ms);
    // Tiny slack for floating-point frame arithmetic.
    if (e <= frame_ms + 1e-6) ++s.within_1;
    if (e <= 2.0 * frame_ms + 1e-6) ++s.within_2;
    errs.push_back(e);
  }
  std::sort(errs.begin(), errs.end());
  if (!errs.empty()) {
    s.median_abs_error_ms = errs[errs.size() / 2];
    s.p95_abs_error_ms = errs[std::min(errs.size() - 1, static_cast<std::size_t>(std::ceil(0.95 * errs.size())) - 1)];
  }
  return s;
}

}  // namespace reactkit::testing
