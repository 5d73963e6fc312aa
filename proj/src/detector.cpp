#include "reactkit/detector.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>

namespace reactkit {

std::string to_string(ConvolutionMethod m) { return m == ConvolutionMethod::direct ? "direct" : "fft"; }

ConvolutionMethod convolution_method_from_string(const std::string& s) {
  if (s == "direct") return ConvolutionMethod::direct;
  if (s == "fft") return ConvolutionMethod::fft;
  throw ConfigError("unknown convolution method '" + s + "' (expected direct or fft)");
}

SearchWindow default_window(double baseline_mean_ms, double baseline_sd_ms, double frame_ms, double start_ms) {
  SearchWindow w;
  w.start_ms = start_ms;
  w.length_ms = std::ceil((baseline_mean_ms + 3.0 * baseline_sd_ms) / 1000.0) * 1000.0;
  w.length_frames = static_cast<Eigen::Index>(std::llround(w.length_ms / frame_ms));
  return w;
}

ConvolutionSeries convolve(const VelocitySeries& series, const GaussianKernel<double>& kernel,
                           ConvolutionMethod method) {
  if (series.size() < kernel.length()) {
    throw LengthError("series of " + std::to_string(series.size()) + " samples is shorter than the " +
                      std::to_string(kernel.length()) + "-sample kernel");
  }
  ConvolutionSeries out;
  // y(i) is stamped with the time of the kernel center, which sits half a
  // frame after sample i when the kernel has an even number of samples.
  const double center_offset =
      (static_cast<double>(kernel.center_index()) - static_cast<double>(kernel.length() - 1) / 2.0) * kernel.frame_ms;
  out.t_ms = series.t_ms.array() + center_offset;
  out.gap = series.gap;
  out.kernel_length = kernel.length();
  out.kernel_center = kernel.center_index();
  out.method = method;
  out.y = convolve_same(series.v, kernel.samples, method, kernel.center_index());
  return out;
}

Peak locate_peak(const ConvolutionSeries& conv, const SearchWindow& window) {
  const Eigen::Index n = conv.size();
  if (n == 0) throw WindowOutOfRange("empty convolution series");
  // Half a millisecond of slack absorbs rounding in frame timestamps.
  const double* begin = conv.t_ms.data();
  const double* first = std::lower_bound(begin, begin + n, window.start_ms - 0.5);
  const Eigen::Index s = first - begin;
  const Eigen::Index e = s + window.length_frames;
  const Eigen::Index lo = s - conv.kernel_center;
  const Eigen::Index hi = e + (conv.kernel_length - 1 - conv.kernel_center);
  if (s >= n || e >= n || lo < 0 || hi >= n) {
    throw WindowOutOfRange("search window at " + std::to_string(window.start_ms) + " ms (" +
                           std::to_string(window.length_frames) + " frames) plus kernel support leaves the series");
  }
  for (Eigen::Index i = lo; i <= hi; ++i) {
    if (!conv.gap.empty() && conv.gap[static_cast<std::size_t>(i)]) {
      throw GapInWindow("frame gap at t = " + std::to_string(conv.t_ms(i)) + " ms inside the search window at " +
                        std::to_string(window.start_ms) + " ms");
    }
  }
  const auto seg = conv.y.segment(s, e - s + 1);
  const double max_v = seg.maxCoeff();
  const double min_v = seg.minCoeff();
  if (!(max_v > min_v)) {
    throw FlatSignal("convolution is constant over the search window at " + std::to_string(window.start_ms) + " ms");
  }
  Eigen::Index best = 0;
  for (Eigen::Index i = 1; i < seg.size(); ++i) {
    if (seg(i) > seg(best)) best = i;
  }
  Peak p;
  p.index = s + best;
  p.window_first = s;
  p.t_max_ms = conv.t_ms(p.index) - window.start_ms;
  p.value = seg(best);
  return p;
}

double reaction_time(double t_max_ms, const GaussianKernel<double>& kernel) {
  const double half = kernel.duration_ms / 2.0;
  if (t_max_ms < half) {
    throw NegativeOnset("t_max " + std::to_string(t_max_ms) + " ms precedes half the kernel duration (" +
                        std::to_string(half) + " ms)");
  }
  return t_max_ms - half;
}

std::vector<ReactionEstimate> detect_all(const PoseStream& stream, const std::vector<double>& warnings_ms,
                                         double baseline_rt_ms, const BaselineStats& baseline_stats,
                                         const DetectOptions& options) {
  const auto upper = select_upper_body(stream);
  auto series = std::make_shared<const VelocitySeries>(velocity_series(upper, options.dims, GapPolicy::flag));
  const double frame_ms = series->frame_ms();
  const auto kernel = build_kernel(baseline_rt_ms, frame_ms);
  auto conv = std::make_shared<const ConvolutionSeries>(convolve(*series, kernel, options.method));

  std::vector<ReactionEstimate> out;
  out.reserve(warnings_ms.size());
  for (double warning : warnings_ms) {
    const auto window = default_window(baseline_stats.mean_ms, baseline_stats.sd_ms, frame_ms, warning);
    if (window.length_frames + 1 < kernel.length()) {
      throw LengthError("search window of " + std::to_string(window.length_frames) +
                        " frames cannot hold the " + std::to_string(kernel.length()) + "-sample kernel");
    }
    const auto peak = locate_peak(*conv, window);
    ReactionEstimate est;
    est.source_id = stream.source_id;
    est.warning_ms = warning;
    est.t_max_ms = peak.t_max_ms;
    est.rt_ms = reaction_time(peak.t_max_ms, kernel);
    est.peak_value = peak.value;
    est.peak_index = peak.index;
    est.window_first = peak.window_first;
    est.kernel = kernel;
    est.window = window;
    est.series = series;
    est.convolution = conv;
    out.push_back(std::move(est));
  }
  return out;
}

ReactionEstimate detect(const PoseStream& stream, double warning_ms, double baseline_rt_ms,
                        const BaselineStats& baseline_stats, const DetectOptions& options) {
  return detect_all(stream, {warning_ms}, baseline_rt_ms, baseline_stats, options).front();
}

std::string to_json(const std::vector<ReactionEstimate>& estimates, bool include_trace) {
  using nlohmann::ordered_json;
  ordered_json j;
  j["source_id"] = estimates.empty() ? std::string{} : estimates.front().source_id;
  if (!estimates.empty()) {
    const auto& k = estimates.front().kernel;
    const auto& s = *estimates.front().series;
    j["kernel"] = {{"duration_ms", k.duration_ms},
                   {"mu_ms", k.mu_ms},
                   {"sigma_ms", k.sigma_ms},
                   {"amplitude", k.amplitude},
                   {"frame_ms", k.frame_ms},
                   {"length", k.length()},
                   {"center_index", k.center_index()},
                   {"samples", std::vector<double>(k.samples.data(), k.samples.data() + k.samples.size())}};
    j["dims"] = to_string(s.dims);
    j["method"] = to_string(estimates.front().convolution->method);
    j["formula"] = "rt_ms = t_max_ms - kernel.duration_ms / 2";
  }
  j["warnings"] = ordered_json::array();
  for (const auto& e : estimates) {
    ordered_json w;
    w["warning_ms"] = e.warning_ms;
    w["window"] = {{"start_ms", e.window.start_ms},
                   {"length_ms", e.window.length_ms},
                   {"length_frames", e.window.length_frames}};
    w["t_max_ms"] = e.t_max_ms;
    w["rt_ms"] = e.rt_ms;
    w["peak_value"] = e.peak_value;
    if (include_trace) {
      const auto& c = *e.convolution;
      const Eigen::Index lo = std::max<Eigen::Index>(0, e.window_first - c.kernel_length);
      const Eigen::Index hi =
          std::min<Eigen::Index>(c.size() - 1, e.window_first + e.window.length_frames + c.kernel_length);
      ordered_json trace = ordered_json::array();
      for (Eigen::Index i = lo; i <= hi; ++i) {
        trace.push_back({{"t_ms", c.t_ms(i)}, {"v", e.series->v(i)}, {"y", c.y(i)}});
      }
      w["trace"] = std::move(trace);
    }
    j["warnings"].push_back(std::move(w));
  }
  return j.dump(2) + "\n";
}

}  // namespace reactkit
