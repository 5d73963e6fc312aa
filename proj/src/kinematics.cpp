#include "reactkit/kinematics.hpp"

#include <algorithm>
#include <ostream>

#include "reactkit/errors.hpp"
#include "reactkit/text.hpp"

namespace reactkit {

std::string to_string(Dims dims) { return dims == Dims::xy ? "xy" : "xyz"; }

Dims dims_from_string(const std::string& s) {
  if (s == "xy") return Dims::xy;
  if (s == "xyz") return Dims::xyz;
  throw ConfigError("unknown dims mode '" + s + "' (expected xy or xyz)");
}

bool VelocitySeries::has_gaps() const { return std::find(gap.begin(), gap.end(), true) != gap.end(); }

double frame_displacement(const PoseFrame& prev, const PoseFrame& curr, Dims dims) {
  const auto& a = prev.landmarks;
  const auto& b = curr.landmarks;
  const bool same_ids = a.size() == b.size() &&
                        std::equal(a.begin(), a.end(), b.begin(),
                                   [](const Landmark& l, const Landmark& r) { return l.id == r.id; });
  if (!same_ids) {
    throw MismatchedLandmarks("frames " + std::to_string(prev.frame_index) + " and " +
                              std::to_string(curr.frame_index) + " carry different landmark ids");
  }
  const Eigen::Index cols = dims == Dims::xy ? 2 : 3;
  const Eigen::Matrix<double, Eigen::Dynamic, 3> delta = curr.positions() - prev.positions();
  return delta.leftCols(cols).rowwise().norm().sum();
}

VelocitySeries velocity_series(const PoseStream& stream, Dims dims, GapPolicy policy) {
  const auto n = stream.frames.size();
  if (n < 2) throw LengthError("velocity series needs at least 2 frames, got " + std::to_string(n));

  VelocitySeries out;
  out.source_id = stream.source_id;
  out.nominal_fps = stream.nominal_fps;
  out.dims = dims;
  out.t_ms.resize(static_cast<Eigen::Index>(n - 1));
  out.v.resize(static_cast<Eigen::Index>(n - 1));
  out.frame_index.resize(n - 1);
  out.gap.assign(n - 1, false);

  const double frame_ms = stream.nominal_frame_ms();
  std::string gaps;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const auto& prev = stream.frames[i];
    const auto& curr = stream.frames[i + 1];
    const double dt = curr.timestamp_ms - prev.timestamp_ms;
    if (dt <= 0.0) {
      throw GapError("non-increasing timestamps between frames " + std::to_string(prev.frame_index) +
                     " and " + std::to_string(curr.frame_index));
    }
    if (is_gap(dt, frame_ms)) {
      out.gap[i] = true;
      if (!gaps.empty()) gaps += ", ";
      gaps += std::to_string(prev.frame_index) + "->" + std::to_string(curr.frame_index) + " (" +
              text::format_double(dt) + " ms)";
    }
    const auto k = static_cast<Eigen::Index>(i);
    out.t_ms(k) = curr.timestamp_ms;
    out.v(k) = frame_displacement(prev, curr, dims) / (dt / 1000.0);
    out.frame_index[i] = curr.frame_index;
  }
  if (!gaps.empty() && policy == GapPolicy::reject) {
    throw GapError("frame gaps in stream '" + stream.source_id + "': " + gaps);
  }
  const double span = stream.frames.back().timestamp_ms - stream.frames.front().timestamp_ms;
  out.fps = static_cast<double>(n - 1) * 1000.0 / span;
  return out;
}

void write_velocity_csv(std::ostream& out, const VelocitySeries& series) {
  out << "frame,t_ms,v\n";
  for (Eigen::Index i = 0; i < series.size(); ++i) {
    out << series.frame_index[static_cast<std::size_t>(i)] << ',' << text::format_double(series.t_ms(i)) << ','
        << text::format_double(series.v(i)) << '\n';
  }
}

}  // namespace reactkit
