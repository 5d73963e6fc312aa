#pragma once

// Cumulative upper-body movement speed: for each pair of consecutive frames,
// the summed Euclidean landmark displacement divided by the frame duration.
// Velocities are in input-units per second; v / fps recovers the per-frame value.

#include <Eigen/Core>

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "reactkit/pose.hpp"

namespace reactkit {

enum class Dims { xy, xyz };

std::string to_string(Dims dims);
Dims dims_from_string(const std::string& s);

struct VelocitySample {
  std::int64_t frame_index;
  double t_ms;
  double v;
};

struct VelocitySeries {
  Eigen::VectorXd t_ms;  // time of the later frame of each pair
  Eigen::VectorXd v;
  std::vector<std::int64_t> frame_index;
  // gap[i] is set when the interval ending at sample i exceeds the gap threshold.
  std::vector<bool> gap;
  std::string source_id;
  double fps = 30.0;          // effective rate over the whole series
  double nominal_fps = 30.0;  // rate the stream was declared at
  Dims dims = Dims::xyz;

  Eigen::Index size() const { return v.size(); }
  VelocitySample sample(Eigen::Index i) const {
    return {frame_index[static_cast<std::size_t>(i)], t_ms(i), v(i)};
  }
  double frame_ms() const { return 1000.0 / nominal_fps; }
  bool has_gaps() const;
};

// Sum over landmark ids of |curr - prev| restricted to `dims`.
// Throws MismatchedLandmarks if the frames carry different id sets.
double frame_displacement(const PoseFrame& prev, const PoseFrame& curr, Dims dims);

enum class GapPolicy { reject, flag };

// GapPolicy::reject throws GapError listing every over-long interval;
// GapPolicy::flag records them in VelocitySeries::gap so the detector can
// refuse only the windows that touch them.
VelocitySeries velocity_series(const PoseStream& stream, Dims dims = Dims::xyz,
                               GapPolicy policy = GapPolicy::reject);

void write_velocity_csv(std::ostream& out, const VelocitySeries& series);

}  // namespace reactkit
