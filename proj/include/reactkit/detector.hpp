#pragma once

// Per-participant Gaussian matched filter for reaction onsets.
//
// The kernel K(t) = amplitude * exp(-(t - mu)^2 / (2 sigma^2)) has duration D
// equal to the participant's baseline HAV reaction time, mu = D/2, sigma = D/8
// and unit amplitude. The velocity series is convolved with the kernel
// ("same" alignment: output sample i has the kernel center on input sample i),
// the argmax inside the post-warning search window gives t_max, and the
// reaction time is t_max - D/2.

#include <Eigen/Core>
#include <unsupported/Eigen/FFT>

#include <cmath>
#include <complex>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "reactkit/errors.hpp"
#include "reactkit/kinematics.hpp"

namespace reactkit {

template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar>
struct GaussianKernel {
  Scalar duration_ms{};
  Scalar mu_ms{};
  Scalar sigma_ms{};
  Scalar amplitude{1};
  Scalar frame_ms{};
  VectorX<Scalar> samples;

  Eigen::Index length() const { return samples.size(); }
  // Input offset aligned with the kernel center in "same" convolution.
  Eigen::Index center_index() const { return length() / 2; }

  // Time (ms, on [0, D]) of sample j. Samples are placed symmetrically about mu.
  Scalar sample_time(Eigen::Index j) const {
    return mu_ms + (static_cast<Scalar>(j) - static_cast<Scalar>(length() - 1) / 2) * frame_ms;
  }

  Scalar operator()(Scalar t_ms) const {
    const Scalar u = (t_ms - mu_ms) / sigma_ms;
    return amplitude * std::exp(Scalar(-0.5) * u * u);
  }
};

// Number of kernel samples for a duration at a frame spacing: round(D / frame) + 1.
inline Eigen::Index kernel_length(double duration_ms, double frame_ms) {
  return static_cast<Eigen::Index>(std::llround(duration_ms / frame_ms)) + 1;
}

template <typename Scalar = double>
GaussianKernel<Scalar> build_kernel(Scalar baseline_rt_ms, Scalar frame_ms) {
  if (!(frame_ms > 0) || !(baseline_rt_ms > 0)) {
    throw KernelTooShort("kernel duration and frame spacing must be positive");
  }
  const auto n = kernel_length(static_cast<double>(baseline_rt_ms), static_cast<double>(frame_ms));
  if (baseline_rt_ms < 3 * frame_ms || n < 3) {
    throw KernelTooShort("baseline " + std::to_string(static_cast<double>(baseline_rt_ms)) +
                         " ms spans fewer than 3 frames of " + std::to_string(static_cast<double>(frame_ms)) + " ms");
  }
  GaussianKernel<Scalar> k;
  k.duration_ms = baseline_rt_ms;
  k.mu_ms = baseline_rt_ms / 2;
  k.sigma_ms = baseline_rt_ms / 8;
  k.amplitude = Scalar(1);
  k.frame_ms = frame_ms;
  k.samples.resize(n);
  // Offsets are computed from the center so mirrored samples are bitwise equal.
  const Scalar half = static_cast<Scalar>(n - 1) / 2;
  for (Eigen::Index j = 0; j < n; ++j) {
    const Scalar u = (static_cast<Scalar>(j) - half) * frame_ms / k.sigma_ms;
    k.samples(j) = k.amplitude * std::exp(Scalar(-0.5) * u * u);
  }
  return k;
}

enum class ConvolutionMethod { direct, fft };

std::string to_string(ConvolutionMethod m);
ConvolutionMethod convolution_method_from_string(const std::string& s);

// y(i) = sum_j x(i + center - j) k(j), zero outside x. center defaults to len(k)/2.
template <typename DerivedX, typename DerivedK>
VectorX<typename DerivedX::Scalar> convolve_same(const Eigen::MatrixBase<DerivedX>& x,
                                                 const Eigen::MatrixBase<DerivedK>& k,
                                                 ConvolutionMethod method,
                                                 std::optional<Eigen::Index> center = std::nullopt) {
  using Scalar = typename DerivedX::Scalar;
  const Eigen::Index n = x.size();
  const Eigen::Index m = k.size();
  const Eigen::Index c = center.value_or(m / 2);
  VectorX<Scalar> y = VectorX<Scalar>::Zero(n);
  if (n == 0 || m == 0) return y;

  if (method == ConvolutionMethod::direct) {
    for (Eigen::Index i = 0; i < n; ++i) {
      Scalar acc{0};
      for (Eigen::Index j = 0; j < m; ++j) {
        const Eigen::Index src = i + c - j;
        if (src >= 0 && src < n) acc += x(src) * k(j);
      }
      y(i) = acc;
    }
    return y;
  }

  // Full linear convolution via zero-padded FFT, then the "same" slice.
  Eigen::Index size = 1;
  while (size < n + m - 1) size <<= 1;
  VectorX<Scalar> xp = VectorX<Scalar>::Zero(size);
  VectorX<Scalar> kp = VectorX<Scalar>::Zero(size);
  xp.head(n) = x;
  kp.head(m) = k;
  Eigen::FFT<Scalar> fft;
  Eigen::Matrix<std::complex<Scalar>, Eigen::Dynamic, 1> xf, kf;
  fft.fwd(xf, xp);
  fft.fwd(kf, kp);
  xf = xf.cwiseProduct(kf);
  VectorX<Scalar> full;
  fft.inv(full, xf);
  y = full.segment(c, n);
  return y;
}

// Cross-correlation with the same centering convention: y(i) = sum_j x(i - center' + j) k(j)
// where center' = len(k) - 1 - center. Equals convolve_same for symmetric kernels.
template <typename DerivedX, typename DerivedK>
VectorX<typename DerivedX::Scalar> correlate_same(const Eigen::MatrixBase<DerivedX>& x,
                                                  const Eigen::MatrixBase<DerivedK>& k) {
  using Scalar = typename DerivedX::Scalar;
  const Eigen::Index n = x.size();
  const Eigen::Index m = k.size();
  const Eigen::Index cc = m - 1 - m / 2;
  VectorX<Scalar> y = VectorX<Scalar>::Zero(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    Scalar acc{0};
    for (Eigen::Index j = 0; j < m; ++j) {
      const Eigen::Index src = i - cc + j;
      if (src >= 0 && src < n) acc += x(src) * k(j);
    }
    y(i) = acc;
  }
  return y;
}

struct SearchWindow {
  double start_ms = 0.0;  // warning delivery time on the series clock
  Eigen::Index length_frames = 30;
  double length_ms = 1000.0;
};

// length_ms = (mean + 3 sd) rounded up to a whole second;
// length_frames = round(length_ms / frame_ms).
SearchWindow default_window(double baseline_mean_ms, double baseline_sd_ms, double frame_ms,
                            double start_ms = 0.0);

struct ConvolutionSeries {
  Eigen::VectorXd t_ms;  // kernel-center time of each output sample
  Eigen::VectorXd y;
  std::vector<bool> gap;  // copied from the velocity series
  Eigen::Index kernel_length = 0;
  Eigen::Index kernel_center = 0;
  ConvolutionMethod method = ConvolutionMethod::fft;

  Eigen::Index size() const { return y.size(); }
};

// Throws LengthError when the series is shorter than the kernel.
ConvolutionSeries convolve(const VelocitySeries& series, const GaussianKernel<double>& kernel,
                           ConvolutionMethod method = ConvolutionMethod::fft);

struct Peak {
  Eigen::Index index = 0;         // into the convolution series
  Eigen::Index window_first = 0;  // first sample of the search window
  double t_max_ms = 0.0;   // relative to window.start_ms
  double value = 0.0;
};

// Argmax of the convolution over [start, start + length_frames] samples, earliest on ties.
// Throws WindowOutOfRange if the window (plus kernel support) leaves the series,
// GapInWindow if a frame gap falls inside it, FlatSignal if it is constant.
Peak locate_peak(const ConvolutionSeries& conv, const SearchWindow& window);

// t_max - D/2. Throws NegativeOnset if t_max < D/2.
double reaction_time(double t_max_ms, const GaussianKernel<double>& kernel);

struct BaselineStats {
  double mean_ms = 438.0;
  double sd_ms = 154.0;
};

struct DetectOptions {
  Dims dims = Dims::xyz;
  ConvolutionMethod method = ConvolutionMethod::fft;
};

struct ReactionEstimate {
  std::string source_id;
  double warning_ms = 0.0;
  double t_max_ms = 0.0;  // relative to warning
  double rt_ms = 0.0;
  double peak_value = 0.0;
  Eigen::Index peak_index = 0;
  Eigen::Index window_first = 0;
  GaussianKernel<double> kernel;
  SearchWindow window;
  // Audit trail; shared between estimates of the same stream.
  std::shared_ptr<const VelocitySeries> series;
  std::shared_ptr<const ConvolutionSeries> convolution;
};

// select_upper_body -> velocity_series -> build_kernel -> convolve -> locate_peak -> reaction_time
ReactionEstimate detect(const PoseStream& stream, double warning_ms, double baseline_rt_ms,
                        const BaselineStats& baseline_stats, const DetectOptions& options = {});

// Same pipeline for several warnings on one stream; the series and convolution are shared.
std::vector<ReactionEstimate> detect_all(const PoseStream& stream, const std::vector<double>& warnings_ms,
                                         double baseline_rt_ms, const BaselineStats& baseline_stats,
                                         const DetectOptions& options = {});

// Detection report for one participant.
std::string to_json(const std::vector<ReactionEstimate>& estimates, bool include_trace);

}  // namespace reactkit
