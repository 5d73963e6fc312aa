#include "reactkit/synth.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>

#include "reactkit/errors.hpp"

namespace reactkit {

namespace {

// Rough frontal standing pose in normalized image coordinates, ids 0..32.
constexpr std::array<std::array<double, 2>, kLandmarkCount> kBasePose{{
    {0.500, 0.120}, {0.510, 0.105}, {0.518, 0.105}, {0.525, 0.106}, {0.490, 0.105}, {0.482, 0.105},
    {0.475, 0.106}, {0.535, 0.115}, {0.465, 0.115}, {0.512, 0.138}, {0.488, 0.138}, {0.580, 0.220},
    {0.420, 0.220}, {0.610, 0.330}, {0.390, 0.330}, {0.625, 0.430}, {0.375, 0.430}, {0.632, 0.455},
    {0.368, 0.455}, {0.628, 0.460}, {0.372, 0.460}, {0.620, 0.450}, {0.380, 0.450}, {0.550, 0.480},
    {0.450, 0.480}, {0.555, 0.650}, {0.445, 0.650}, {0.560, 0.810}, {0.440, 0.810}, {0.565, 0.830},
    {0.435, 0.830}, {0.575, 0.850}, {0.425, 0.850},
}};

struct PlacedBurst {
  double peak_s;
  double sigma_s;
  double amplitude;
  std::vector<int> landmarks;
  std::vector<std::array<double, 2>> directions;
};

// Integral of the unit-peak Gaussian speed pulse from -inf to t (seconds).
double ramp(double t_s, double peak_s, double sigma_s) {
  return sigma_s * std::sqrt(std::numbers::pi / 2.0) * (1.0 + std::erf((t_s - peak_s) / (sigma_s * std::sqrt(2.0))));
}

double chi_mean(int k) { return std::sqrt(2.0) * std::exp(std::lgamma((k + 1) / 2.0) - std::lgamma(k / 2.0)); }

double chi_variance(int k) {
  const double m = chi_mean(k);
  return k - m * m;
}

// Inverse Mills ratio phi(a) / (1 - Phi(a)).
double mills(double a) {
  if (a > 25.0) return a + 1.0 / a;
  const double phi = std::exp(-0.5 * a * a) / std::sqrt(2.0 * std::numbers::pi);
  return phi / (0.5 * std::erfc(a / std::numbers::sqrt2));
}

// Marginal mean of draws built like truncated_draw with location `loc`:
// the floor is applied conditionally on the shared effect z ~ N(0, 1).
double floored_mean(double loc, double sd, double rho) {
  const double spread = sd * std::sqrt(rho);
  const double tau = sd * std::sqrt(1.0 - rho);
  constexpr int kSteps = 800;
  constexpr double kZ = 8.0;
  double acc = 0.0;
  double weight = 0.0;
  for (int i = 0; i <= kSteps; ++i) {
    const double z = -kZ + 2.0 * kZ * i / kSteps;
    const double w = std::exp(-0.5 * z * z) * ((i == 0 || i == kSteps) ? 0.5 : 1.0);
    const double mu = loc + spread * z;
    acc += w * (mu + tau * mills((kSrtFloorMs - mu) / tau));
    weight += w;
  }
  return acc / weight;
}

// Location whose floored draws average to `mean`.
double floored_location(double mean, double sd, double rho) {
  if (sd == 0.0) return mean;
  double lo = mean - 20.0 * sd;
  double hi = mean;
  if (floored_mean(lo, sd, rho) > mean) throw BadParams("cell mean " + std::to_string(mean) + " too close to the 50 ms floor");
  for (int it = 0; it < 200 && hi - lo > 1e-9 * std::max(1.0, mean); ++it) {
    const double mid = 0.5 * (lo + hi);
    (floored_mean(mid, sd, rho) < mean ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

double truncated_draw(double loc, double sd, double shared, double rho, std::mt19937_64& rng,
                      std::normal_distribution<double>& normal) {
  if (sd == 0.0) return loc;
  const double fixed = loc + sd * std::sqrt(rho) * shared;
  const double free_sd = sd * std::sqrt(1.0 - rho);
  const double a = (kSrtFloorMs - fixed) / free_sd;
  if (a < 0.5) {
    for (;;) {
      const double e = normal(rng);
      if (e >= a) return std::max(kSrtFloorMs, fixed + free_sd * e);
    }
  }
  // Deep tail: exponential proposal (Robert 1995).
  const double lambda = 0.5 * (a + std::sqrt(a * a + 4.0));
  std::exponential_distribution<double> expo(lambda);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (;;) {
    const double e = a + expo(rng);
    if (unit(rng) <= std::exp(-0.5 * (e - lambda) * (e - lambda))) return std::max(kSrtFloorMs, fixed + free_sd * e);
  }
}

}  // namespace

std::string participant_label(int index) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "P%02d", index + 1);
  return buf;
}

SyntheticPose gen_pose_stream(double duration_ms, double fps, const std::vector<WarningBursts>& warnings,
                              const NoiseSpec& noise, std::uint64_t seed, std::string source_id) {
  if (!(fps > 0.0) || !(duration_ms > 0.0)) throw SpecError("duration and fps must be positive");
  if (!(noise.sigma >= 0.0)) throw SpecError("noise sigma must be non-negative");
  const auto frames = static_cast<std::int64_t>(std::floor(duration_ms * fps / 1000.0 + 1e-9));
  if (frames < 2) throw SpecError("recording shorter than two frames");
  const double last_ms = static_cast<double>(frames - 1) * 1000.0 / fps;

  std::mt19937_64 dir_rng(seed);
  std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);

  SyntheticPose out;
  std::vector<PlacedBurst> placed;
  for (const auto& w : warnings) {
    std::vector<std::pair<double, double>> spans;
    for (const auto& b : w.bursts) {
      if (!(b.onset_ms >= 0.0)) throw SpecError("burst onset must be >= 0");
      if (!(b.amplitude > 0.0)) throw SpecError("burst amplitude must be > 0");
      if (!(b.burst_sigma_ms > 0.0)) throw SpecError("burst sigma must be > 0");
      const double peak = w.warning_ms + b.onset_ms + b.lead_ms();
      const double lo = peak - 4.0 * b.burst_sigma_ms;
      const double hi = peak + 4.0 * b.burst_sigma_ms;
      if (lo < 0.0 || hi > last_ms) {
        throw SpecError("burst at warning " + std::to_string(w.warning_ms) + " ms does not fit in the recording");
      }
      for (const auto& [slo, shi] : spans) {
        if (lo < shi && slo < hi) {
          throw SpecError("overlapping bursts after warning " + std::to_string(w.warning_ms) + " ms");
        }
      }
      spans.emplace_back(lo, hi);

      PlacedBurst p;
      // Velocity samples are stamped at the later frame of each pair and carry the
      // mean speed over the interval, so the physical pulse is centered half a
      // frame earlier for the sampled pulse to peak at `peak`.
      p.peak_s = (peak - 500.0 / fps) / 1000.0;
      p.sigma_s = b.burst_sigma_ms / 1000.0;
      p.amplitude = b.amplitude;
      p.landmarks = b.landmarks;
      if (p.landmarks.empty()) {
        for (int id = 0; id <= kUpperBodyLastId; ++id) p.landmarks.push_back(id);
      }
      for (int id : p.landmarks) {
        if (id < 0 || id > kUpperBodyLastId) throw SpecError("burst landmark " + std::to_string(id) + " outside 0..24");
        const double th = angle(dir_rng);
        p.directions.push_back({std::cos(th), std::sin(th)});
      }
      placed.push_back(std::move(p));
      out.truth.push_back({w.warning_ms, b.onset_ms, peak, b.burst_sigma_ms, b.amplitude});
    }
  }

  std::mt19937_64 noise_rng(noise.seed);
  std::normal_distribution<double> normal(0.0, 1.0);

  auto& stream = out.stream;
  stream.nominal_fps = fps;
  stream.source_id = std::move(source_id);
  stream.frames.resize(static_cast<std::size_t>(frames));
  for (std::int64_t i = 0; i < frames; ++i) {
    auto& f = stream.frames[static_cast<std::size_t>(i)];
    f.frame_index = i;
    f.timestamp_ms = static_cast<double>(i) * 1000.0 / fps;
    const double t_s = f.timestamp_ms / 1000.0;
    f.landmarks.resize(kLandmarkCount);
    for (int id = 0; id < kLandmarkCount; ++id) {
      auto& lm = f.landmarks[static_cast<std::size_t>(id)];
      lm.id = id;
      lm.x = kBasePose[static_cast<std::size_t>(id)][0];
      lm.y = kBasePose[static_cast<std::size_t>(id)][1];
      lm.z = 0.0;
      lm.visibility = 1.0;
    }
    for (const auto& p : placed) {
      const double share = p.amplitude * ramp(t_s, p.peak_s, p.sigma_s);
      for (std::size_t k = 0; k < p.landmarks.size(); ++k) {
        auto& lm = f.landmarks[static_cast<std::size_t>(p.landmarks[k])];
        lm.x += share * p.directions[k][0];
        lm.y += share * p.directions[k][1];
      }
    }
    if (noise.sigma > 0.0) {
      for (auto& lm : f.landmarks) {
        lm.x += noise.sigma * normal(noise_rng);
        lm.y += noise.sigma * normal(noise_rng);
        lm.z += noise.sigma * normal(noise_rng);
      }
    }
  }
  return out;
}

double noise_velocity_mean(double sigma, double fps, int n_landmarks, Dims dims) {
  const int k = dims == Dims::xy ? 2 : 3;
  return fps * sigma * std::sqrt(2.0) * n_landmarks * chi_mean(k);
}

double noise_velocity_sd(double sigma, double fps, int n_landmarks, Dims dims) {
  const int k = dims == Dims::xy ? 2 : 3;
  return fps * sigma * std::sqrt(2.0) * std::sqrt(n_landmarks * chi_variance(k));
}

std::vector<ReactionRecord> gen_srt_dataset(const std::vector<SrtCell>& cells, std::uint64_t seed, double rho) {
  if (!(rho >= 0.0 && rho < 1.0)) throw BadParams("rho must lie in [0, 1)");
  int max_n = 0;
  for (const auto& c : cells) {
    if (c.n < 1) throw BadParams("cell n must be >= 1");
    if (!(c.sd_ms >= 0.0)) throw BadParams("cell sd must be >= 0");
    if (!(c.mean_ms > kSrtFloorMs) && !(c.sd_ms == 0.0 && c.mean_ms == kSrtFloorMs)) {
      throw BadParams("cell mean must lie above the 50 ms floor");
    }
    if (c.setting == Setting::VisionE && (c.method != Method::Vision || c.modality != Modality::HAV)) {
      throw BadParams("VisionE cells must be Vision / HAV");
    }
    max_n = std::max(max_n, c.n);
  }
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> effects(static_cast<std::size_t>(max_n));
  for (auto& z : effects) z = normal(rng);

  std::vector<ReactionRecord> out;
  for (const auto& c : cells) {
    const double loc = floored_location(c.mean_ms, c.sd_ms, rho);
    for (int k = 0; k < c.n; ++k) {
      ReactionRecord r;
      r.participant = participant_label(k);
      r.setting = c.setting;
      r.modality = c.modality;
      r.method = c.method;
      r.rt_ms = truncated_draw(loc, c.sd_ms, effects[static_cast<std::size_t>(k)], rho, rng, normal);
      out.push_back(std::move(r));
    }
  }
  return out;
}

std::vector<SrtCell> srt_cells() {
  struct Row {
    Modality m;
    std::array<double, 4> mean;
    std::array<double, 4> sd;
  };
  const std::array<Row, 4> rows{{
      {Modality::V, {410, 597, 489, 493}, {105, 232, 159, 177}},
      {Modality::AV, {422, 627, 483, 477}, {122, 249, 162, 108}},
      {Modality::HV, {359, 530, 410, 411}, {145, 245, 184, 149}},
      {Modality::HAV, {365, 574, 411, 438}, {149, 273, 127, 154}},
  }};
  const std::array<int, 4> n{32, 34, 32, 32};
  std::vector<SrtCell> cells;
  for (std::size_t s = 0; s < kSrtSettings.size(); ++s) {
    for (const auto& r : rows) cells.push_back({kSrtSettings[s], r.m, r.mean[s], r.sd[s], n[s], Method::SRT});
  }
  return cells;
}

std::vector<SrtCell> vision_cells() {
  return {
      {Setting::VisionE, Modality::HAV, 490, 330, 21, Method::Vision},
      {Setting::VisionE, Modality::HAV, 370, 220, 21, Method::Vision},
  };
}

double noise_sigma_for_snr(double amplitude, double snr, double fps) {
  if (!(amplitude > 0.0) || !(snr > 0.0) || !(fps > 0.0)) throw BadParams("amplitude, snr and fps must be positive");
  return amplitude / (snr * fps * std::numbers::sqrt2);
}

SyntheticSession gen_session(const SessionSpec& spec, std::uint64_t seed) {
  if (spec.participants < 1) throw BadParams("session needs at least one participant");
  if (!(spec.snr > 0.0) || !(spec.amplitude > 0.0)) throw BadParams("snr and amplitude must be positive");
  SyntheticSession session;
  auto cells = srt_cells();
  for (auto& c : cells) c.n = std::max(c.n, spec.participants);
  session.srt_records = gen_srt_dataset(cells, seed, spec.rho);

  const double frame_ms = 1000.0 / spec.fps;
  // Kernel durations stay within what a 1 s window at this frame rate can hold.
  const double d_min = 4.0 * frame_ms;
  const double d_max = spec.window_ms - 4.0 * frame_ms;
  for (auto& r : session.srt_records) {
    if (r.setting == Setting::VR_WT && r.modality == Modality::HAV) {
      const auto idx = std::stoi(r.participant.substr(1)) - 1;
      if (idx < spec.participants) {
        r.rt_ms = std::clamp(r.rt_ms, d_min, d_max);
        session.baseline_rt_ms[r.participant] = r.rt_ms;
      }
    }
  }

  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double noise_sigma = noise_sigma_for_snr(spec.amplitude, spec.snr, spec.fps);
  for (int p = 0; p < spec.participants; ++p) {
    const auto label = participant_label(p);
    const double d = session.baseline_rt_ms.at(label);
    std::vector<WarningBursts> warnings;
    for (double w : spec.warnings_ms) {
      BurstSpec b;
      b.amplitude = spec.amplitude;
      b.burst_sigma_ms = d / 8.0 * (1.0 + spec.sigma_mismatch * (2.0 * unit(rng) - 1.0));
      b.peak_lead_ms = d / 2.0;
      // Onset range keeps the pulse peak and its kernel support inside the window.
      const double lo = kMinOnsetMs;
      const double hi = std::max(lo, spec.window_ms - d / 2.0 - 2.0 * frame_ms);
      b.onset_ms = std::round(lo + unit(rng) * (hi - lo));
      warnings.push_back({w, {b}});
    }
    NoiseSpec noise{noise_sigma, seed + 1000 + static_cast<std::uint64_t>(p)};
    session.poses.push_back(gen_pose_stream(spec.duration_ms, spec.fps, warnings, noise,
                                            seed + 2000 + static_cast<std::uint64_t>(p), label));
  }
  return session;
}

}  // namespace reactkit
