#pragma once

// Seeded generators with known ground truth: pose streams carrying Gaussian
// velocity bursts after each warning, and SRT datasets drawn from per-cell
// means and SDs.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "reactkit/kinematics.hpp"
#include "reactkit/pose.hpp"
#include "reactkit/stats.hpp"

namespace reactkit {

struct BurstSpec {
  double onset_ms = 0.0;         // relative to the warning
  double burst_sigma_ms = 50.0;
  double amplitude = 1.0;        // peak speed of each moving landmark, input-units per second
  std::vector<int> landmarks;    // subset of 0..24; empty means all 25
  // Onset-to-peak lead. Unset: 4 * burst_sigma_ms, i.e. the pulse occupies
  // [onset, onset + 8 sigma] like a kernel of duration 8 sigma.
  std::optional<double> peak_lead_ms;

  double lead_ms() const { return peak_lead_ms.value_or(4.0 * burst_sigma_ms); }
};

struct NoiseSpec {
  double sigma = 0.0;  // per-coordinate positional noise, input units
  std::uint64_t seed = 0;
};

struct WarningBursts {
  double warning_ms = 0.0;
  std::vector<BurstSpec> bursts;
};

struct GroundTruthOnset {
  double warning_ms = 0.0;
  double onset_ms = 0.0;  // relative to the warning
  double peak_ms = 0.0;   // absolute time of the velocity pulse maximum
  double burst_sigma_ms = 0.0;
  double amplitude = 0.0;
};

struct SyntheticPose {
  PoseStream stream;
  std::vector<GroundTruthOnset> truth;
};

// Landmark trajectories = fixed base pose + per-frame Gaussian jitter + smooth
// displacement ramps whose speed is the Gaussian pulse of each burst. Noise
// uses noise.seed; burst directions use seed. Throws SpecError for bursts that
// overlap within one warning or leave the recording.
SyntheticPose gen_pose_stream(double duration_ms, double fps, const std::vector<WarningBursts>& warnings,
                              const NoiseSpec& noise, std::uint64_t seed, std::string source_id = "synth");

// Marginal mean and SD of the cumulative speed produced by positional noise alone
// (sum over n_landmarks of chi-distributed frame-to-frame displacements).
double noise_velocity_mean(double sigma, double fps, int n_landmarks, Dims dims);
double noise_velocity_sd(double sigma, double fps, int n_landmarks, Dims dims);

// Positional sigma whose per-axis velocity noise (fps * sqrt(2) * sigma) sits
// snr times below a per-landmark pulse of the given amplitude.
double noise_sigma_for_snr(double amplitude, double snr, double fps);

struct SrtCell {
  Setting setting = Setting::Baseline;
  Modality modality = Modality::V;
  double mean_ms = 0.0;
  double sd_ms = 0.0;
  int n = 0;
  Method method = Method::SRT;
};

inline constexpr double kSrtFloorMs = 50.0;
// Earliest onset gen_session draws after a warning.
inline constexpr double kMinOnsetMs = 100.0;

// Normal draws truncated below at 50 ms. Participant k (label P01, P02, ...)
// carries one latent effect shared by all cells, mixed in with weight rho:
// rt = loc + sd (sqrt(rho) z_k + sqrt(1 - rho) e), redrawing e below the floor.
// loc is solved so the expected rt equals the cell mean. Throws BadParams,
// including for means at or below the floor.
std::vector<ReactionRecord> gen_srt_dataset(const std::vector<SrtCell>& cells, std::uint64_t seed, double rho = 0.0);

// Per-cell means / SDs of the reported SRT study (n = 32, 34, 32, 32 by setting).
std::vector<SrtCell> srt_cells();
// Vision-based reaction times for the two warnings (n = 21).
std::vector<SrtCell> vision_cells();

std::string participant_label(int index);  // 0 -> "P01"

struct SessionSpec {
  int participants = 21;
  double fps = 30.0;
  double duration_ms = 60000.0;
  std::vector<double> warnings_ms{25000.0, 45000.0};
  double snr = 10.0;              // see noise_sigma_for_snr
  double amplitude = 1.0;
  double sigma_mismatch = 0.25;   // burst sigma drawn within +-this fraction of D/8
  double rho = 0.5;
  double window_ms = 1000.0;
};

struct SyntheticSession {
  std::vector<SyntheticPose> poses;               // one per participant
  std::map<std::string, double> baseline_rt_ms;   // kernel durations
  std::vector<ReactionRecord> srt_records;        // full SRT table
};

// SRT records for every setting x modality cell; each vision participant's
// VR-WT HAV record doubles as the kernel duration of its pose stream.
SyntheticSession gen_session(const SessionSpec& spec, std::uint64_t seed);

}  // namespace reactkit
