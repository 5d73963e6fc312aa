#pragma once

// Pose-landmark streams: the 33-point body model, CSV / JSONL readers and
// writers, upper-body selection and temporal validation.

#include <Eigen/Core>

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace reactkit {

inline constexpr int kLandmarkCount = 33;
// Ids 0..24 form the upper body of the 33-point model.
inline constexpr int kUpperBodyLastId = 24;
inline constexpr int kUpperBodyCount = kUpperBodyLastId + 1;

struct Landmark {
  int id = 0;
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
  double visibility = 1.0;

  bool operator==(const Landmark&) const = default;
};

struct PoseFrame {
  std::int64_t frame_index = 0;
  double timestamp_ms = 0.0;
  std::vector<Landmark> landmarks;  // ordered by id

  // One row per landmark, columns x, y, z.
  Eigen::Matrix<double, Eigen::Dynamic, 3> positions() const;

  bool operator==(const PoseFrame&) const = default;
};

struct PoseStream {
  double nominal_fps = 30.0;
  std::vector<PoseFrame> frames;
  std::string source_id;
  // Set when the file carried no timestamps and they were derived from
  // frame_index * (1000 / nominal_fps).
  bool timestamps_synthesized = false;

  double nominal_frame_ms() const { return 1000.0 / nominal_fps; }
  std::size_t size() const { return frames.size(); }

  bool operator==(const PoseStream&) const = default;
};

enum class PoseFormat { csv, jsonl };

PoseFormat pose_format_from_path(const std::filesystem::path& path);

// Throws ParseError (bad row, with line number), SchemaError (landmark count
// or duplicate ids, naming the frame) or EmptyStream.
PoseStream parse_pose_stream(const std::filesystem::path& path, PoseFormat format,
                             double nominal_fps = 30.0);
PoseStream parse_pose_csv(std::istream& in, double nominal_fps = 30.0,
                          std::string source_id = {});
PoseStream parse_pose_jsonl(std::istream& in, double nominal_fps = 30.0,
                            std::string source_id = {});

void write_pose_stream(std::ostream& out, const PoseStream& stream, PoseFormat format);
std::string to_string(const PoseStream& stream, PoseFormat format);

// Keeps landmarks 0..24 of every frame; ordering and timestamps untouched.
PoseStream select_upper_body(const PoseStream& stream);

// Consecutive timestamp deltas beyond +50% of the nominal frame duration are gaps.
bool is_gap(double delta_ms, double nominal_frame_ms);

enum class FindingKind { gap, timestamp_anomaly, out_of_range, synthesized_timestamps };

struct Finding {
  FindingKind kind;
  std::int64_t frame_index = 0;  // frame at which the finding was raised
  std::size_t position = 0;      // index into stream.frames
  std::optional<int> landmark_id;
  std::string message;
};

struct ValidationReport {
  std::vector<Finding> findings;

  bool clean() const { return findings.empty(); }
  std::size_t count(FindingKind kind) const;
};

ValidationReport validate_stream(const PoseStream& stream);

std::string to_string(FindingKind kind);
std::string to_json(const ValidationReport& report);

}  // namespace reactkit
