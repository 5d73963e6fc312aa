#pragma once

// Frequency-domain diagnostics of velocity series: one-sided DFT magnitude
// spectra and a continuous wavelet transform with the 2nd-order Gaussian
// ("Mexican hat") mother wavelet.

#include <Eigen/Core>

#include <complex>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "reactkit/kinematics.hpp"

namespace reactkit {

// Forward DFT, unnormalized: X_k = sum_n x_n exp(-2 pi i k n / N). The inverse carries 1/N.
Eigen::VectorXcd dft(const Eigen::VectorXd& x);

struct MagnitudeSpectrum {
  Eigen::VectorXd freq_hz;    // 0 .. fps/2 in steps of fps/n
  Eigen::VectorXd magnitude;  // |X_k|, k = 0 .. n/2
  double fps = 0.0;
  Eigen::Index n = 0;
};

MagnitudeSpectrum fft_magnitude(const Eigen::VectorXd& x, double fps, bool remove_mean = false);
// Throws NonUniformSampling if the series has gaps or irregular spacing.
MagnitudeSpectrum fft_magnitude(const VelocitySeries& series, bool remove_mean = false);

// (1/n) sum over the full two-sided spectrum, reconstructed from the one-sided bins.
double spectrum_energy(const MagnitudeSpectrum& spectrum);

void write_spectrum_csv(std::ostream& out, const MagnitudeSpectrum& spectrum);

inline constexpr const char* kGaus2Tag = "gaussian-2nd-order";
// L2 normalization of psi(t) = C (1 - t^2) exp(-t^2 / 2): C = 2 / (sqrt(3) pi^(1/4)).
double gaus2_normalization();
double gaus2(double t);
// Truncation of the wavelet support, in units of the scale.
inline constexpr double kGaus2SupportHalfWidth = 5.0;

struct CwtResult {
  Eigen::VectorXd scales;           // in samples (frames)
  Eigen::VectorXd translations_ms;  // one per input sample
  Eigen::MatrixXd coefficients;     // |scales| x |translations|
  // Entries whose truncated support runs past either end of the series.
  Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic> boundary;
  std::string wavelet = kGaus2Tag;
  double normalization = 0.0;
};

// W(a, b) = a^(-1/2) sum_n x_n psi((n - b) / a), support truncated at |n - b| <= 5a.
// The truncated, sampled wavelet is shifted to an exactly zero sum at every scale.
// Throws BadScales (empty, non-positive or not strictly ascending) or LengthError.
CwtResult cwt_gaus2(const Eigen::VectorXd& x, const Eigen::VectorXd& times_ms, const Eigen::VectorXd& scales);
CwtResult cwt_gaus2(const VelocitySeries& series, const Eigen::VectorXd& scales);

// `count` log-spaced scales from min_frames to max_frames.
Eigen::VectorXd default_scales(double max_frames, int count = 32, double min_frames = 2.0);

struct PeakScaleMap {
  // Scale maximizing |W(a, b)| over interior entries; empty where undefined
  // (no interior entry, or an all-zero column).
  std::vector<std::optional<double>> scale;
  Eigen::VectorXd magnitude;  // the corresponding max |W|, 0 where undefined
  Eigen::VectorXd translations_ms;
};

PeakScaleMap peak_scale_map(const CwtResult& cwt);

// Contiguous runs of translations whose dominant magnitude is at least
// rel_threshold of the global maximum, as [first, last] index pairs.
std::vector<std::pair<Eigen::Index, Eigen::Index>> dominant_regions(const PeakScaleMap& map,
                                                                    double rel_threshold = 0.5);

// Row-major little-endian float64 matrix plus a JSON sidecar describing it.
void write_cwt(const CwtResult& cwt, const std::filesystem::path& matrix_path,
               const std::filesystem::path& sidecar_path);

}  // namespace reactkit
