#include "reactkit/spectral.hpp"

#include <json.hpp>
#include <unsupported/Eigen/FFT>

#include <bit>
#include <cmath>
#include <cstring>
#include <numbers>
#include <ostream>

#include "reactkit/errors.hpp"
#include "reactkit/text.hpp"

namespace reactkit {

Eigen::VectorXcd dft(const Eigen::VectorXd& x) {
  if (x.size() < 2) return x.cast<std::complex<double>>();
  Eigen::FFT<double> fft;
  Eigen::VectorXcd out;
  fft.fwd(out, x);
  return out;
}

MagnitudeSpectrum fft_magnitude(const Eigen::VectorXd& x, double fps, bool remove_mean) {
  if (x.size() < 2) throw LengthError("spectrum needs at least 2 samples");
  Eigen::VectorXd centered = x;
  if (remove_mean) centered.array() -= x.mean();
  const auto full = dft(centered);
  const Eigen::Index n = x.size();
  const Eigen::Index bins = n / 2 + 1;
  MagnitudeSpectrum s;
  s.fps = fps;
  s.n = n;
  s.magnitude = full.head(bins).cwiseAbs();
  s.freq_hz = Eigen::VectorXd::LinSpaced(bins, 0.0, static_cast<double>(bins - 1)) * (fps / static_cast<double>(n));
  return s;
}

MagnitudeSpectrum fft_magnitude(const VelocitySeries& series, bool remove_mean) {
  if (series.has_gaps()) throw NonUniformSampling("series '" + series.source_id + "' contains frame gaps");
  if (series.size() >= 3) {
    const Eigen::Index n = series.size();
    const Eigen::VectorXd dt = series.t_ms.tail(n - 1) - series.t_ms.head(n - 1);
    const double mean = dt.mean();
    const double worst = (dt.array() - mean).abs().maxCoeff();
    if (worst > 0.05 * mean) {
      throw NonUniformSampling("frame spacing deviates by " + text::format_double(worst) + " ms from the mean " +
                               text::format_double(mean) + " ms");
    }
  }
  return fft_magnitude(series.v, series.fps, remove_mean);
}

double spectrum_energy(const MagnitudeSpectrum& s) {
  const Eigen::Index bins = s.magnitude.size();
  double e = 0.0;
  for (Eigen::Index k = 0; k < bins; ++k) {
    const double m2 = s.magnitude(k) * s.magnitude(k);
    const bool self_paired = k == 0 || (s.n % 2 == 0 && k == bins - 1);
    e += self_paired ? m2 : 2.0 * m2;
  }
  return e / static_cast<double>(s.n);
}

void write_spectrum_csv(std::ostream& out, const MagnitudeSpectrum& s) {
  out << "freq_hz,magnitude\n";
  for (Eigen::Index k = 0; k < s.magnitude.size(); ++k) {
    out << text::format_double(s.freq_hz(k)) << ',' << text::format_double(s.magnitude(k)) << '\n';
  }
}

double gaus2_normalization() { return 2.0 / (std::sqrt(3.0) * std::pow(std::numbers::pi, 0.25)); }

double gaus2(double t) {
  const double t2 = t * t;
  return gaus2_normalization() * (1.0 - t2) * std::exp(-0.5 * t2);
}

CwtResult cwt_gaus2(const Eigen::VectorXd& x, const Eigen::VectorXd& times_ms, const Eigen::VectorXd& scales) {
  if (scales.size() == 0) throw BadScales("scale list is empty");
  for (Eigen::Index i = 0; i < scales.size(); ++i) {
    if (!(std::isfinite(scales(i)) && scales(i) > 0.0)) throw BadScales("scales must be positive and finite");
    if (i > 0 && !(scales(i) > scales(i - 1))) throw BadScales("scales must be strictly ascending");
  }
  const Eigen::Index n = x.size();
  if (n < 3) throw LengthError("wavelet transform needs at least 3 samples");
  if (times_ms.size() != n) throw LengthError("times and samples differ in length");

  CwtResult r;
  r.scales = scales;
  r.translations_ms = times_ms;
  r.normalization = gaus2_normalization();
  r.coefficients = Eigen::MatrixXd::Zero(scales.size(), n);
  r.boundary.setConstant(scales.size(), n, false);

  for (Eigen::Index si = 0; si < scales.size(); ++si) {
    const double a = scales(si);
    const auto half = static_cast<Eigen::Index>(std::floor(kGaus2SupportHalfWidth * a));
    Eigen::VectorXd psi(2 * half + 1);
    for (Eigen::Index j = -half; j <= half; ++j) psi(j + half) = gaus2(static_cast<double>(j) / a);
    psi.array() -= psi.mean();
    psi /= std::sqrt(a);
    for (Eigen::Index b = 0; b < n; ++b) {
      const Eigen::Index lo = std::max<Eigen::Index>(0, b - half);
      const Eigen::Index hi = std::min<Eigen::Index>(n - 1, b + half);
      r.boundary(si, b) = (b - half < 0) || (b + half > n - 1);
      r.coefficients(si, b) = x.segment(lo, hi - lo + 1).dot(psi.segment(lo - b + half, hi - lo + 1));
    }
  }
  return r;
}

CwtResult cwt_gaus2(const VelocitySeries& series, const Eigen::VectorXd& scales) {
  return cwt_gaus2(series.v, series.t_ms, scales);
}

Eigen::VectorXd default_scales(double max_frames, int count, double min_frames) {
  if (count < 2 || !(max_frames > min_frames) || !(min_frames > 0.0)) {
    throw BadScales("default scale grid needs count >= 2 and 0 < min < max");
  }
  return Eigen::VectorXd::LinSpaced(count, std::log(min_frames), std::log(max_frames)).array().exp();
}

PeakScaleMap peak_scale_map(const CwtResult& cwt) {
  const Eigen::Index cols = cwt.coefficients.cols();
  PeakScaleMap m;
  m.scale.assign(static_cast<std::size_t>(cols), std::nullopt);
  m.magnitude = Eigen::VectorXd::Zero(cols);
  m.translations_ms = cwt.translations_ms;
  for (Eigen::Index b = 0; b < cols; ++b) {
    double best = 0.0;
    std::optional<double> scale;
    for (Eigen::Index si = 0; si < cwt.coefficients.rows(); ++si) {
      if (cwt.boundary(si, b)) continue;
      const double v = std::abs(cwt.coefficients(si, b));
      if (v > best) {
        best = v;
        scale = cwt.scales(si);
      }
    }
    m.scale[static_cast<std::size_t>(b)] = scale;
    m.magnitude(b) = best;
  }
  return m;
}

std::vector<std::pair<Eigen::Index, Eigen::Index>> dominant_regions(const PeakScaleMap& map, double rel_threshold) {
  std::vector<std::pair<Eigen::Index, Eigen::Index>> regions;
  if (map.magnitude.size() == 0) return regions;
  const double top = map.magnitude.maxCoeff();
  if (!(top > 0.0)) return regions;
  const double cut = rel_threshold * top;
  std::optional<Eigen::Index> open;
  for (Eigen::Index b = 0; b < map.magnitude.size(); ++b) {
    const bool in = map.scale[static_cast<std::size_t>(b)].has_value() && map.magnitude(b) >= cut;
    if (in && !open) open = b;
    if (!in && open) {
      regions.emplace_back(*open, b - 1);
      open.reset();
    }
  }
  if (open) regions.emplace_back(*open, map.magnitude.size() - 1);
  return regions;
}

void write_cwt(const CwtResult& cwt, const std::filesystem::path& matrix_path,
               const std::filesystem::path& sidecar_path) {
  static_assert(std::endian::native == std::endian::little, "CWT export assumes a little-endian host");
  const Eigen::Index rows = cwt.coefficients.rows();
  const Eigen::Index cols = cwt.coefficients.cols();
  std::string bytes(static_cast<std::size_t>(rows * cols) * sizeof(double), '\0');
  std::size_t off = 0;
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) {
      const double v = cwt.coefficients(r, c);
      std::memcpy(bytes.data() + off, &v, sizeof(double));
      off += sizeof(double);
    }
  }
  text::write_file_atomic(matrix_path, bytes);

  nlohmann::ordered_json j;
  j["wavelet"] = cwt.wavelet;
  j["normalization"] = cwt.normalization;
  j["formula"] = "psi(t) = C (1 - t^2) exp(-t^2/2); W(a,b) = a^-1/2 sum_n x_n psi((n-b)/a)";
  j["support_halfwidth_scales"] = kGaus2SupportHalfWidth;
  j["zero_mean_corrected"] = true;
  j["scale_unit"] = "samples";
  j["dtype"] = "float64-le";
  j["order"] = "row-major";
  j["rows"] = rows;
  j["cols"] = cols;
  j["matrix_file"] = matrix_path.filename().string();
  j["scales"] = std::vector<double>(cwt.scales.data(), cwt.scales.data() + rows);
  j["translations_ms"] = std::vector<double>(cwt.translations_ms.data(), cwt.translations_ms.data() + cols);
  text::write_file_atomic(sidecar_path, j.dump(2) + "\n");
}

}  // namespace reactkit
