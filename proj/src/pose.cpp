#include "reactkit/pose.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "reactkit/errors.hpp"
#include "reactkit/text.hpp"

namespace reactkit {

namespace {

constexpr const char* kCsvHeader = "frame,timestamp_ms,id,x,y,z,visibility";

// Accumulates landmarks for one frame and checks the 33-landmark schema.
struct FrameBuilder {
  PoseFrame frame;
  std::optional<double> timestamp;
  std::size_t first_line = 0;
};

PoseFrame finish_frame(FrameBuilder& b) {
  auto& lms = b.frame.landmarks;
  std::sort(lms.begin(), lms.end(), [](const Landmark& a, const Landmark& c) { return a.id < c.id; });
  for (std::size_t i = 1; i < lms.size(); ++i) {
    if (lms[i].id == lms[i - 1].id) {
      throw SchemaError("frame " + std::to_string(b.frame.frame_index) + " (line " +
                        std::to_string(b.first_line) + "): duplicate landmark id " +
                        std::to_string(lms[i].id));
    }
  }
  if (lms.size() != static_cast<std::size_t>(kLandmarkCount)) {
    throw SchemaError("frame " + std::to_string(b.frame.frame_index) + " (line " +
                      std::to_string(b.first_line) + "): expected " +
                      std::to_string(kLandmarkCount) + " landmarks, found " +
                      std::to_string(lms.size()));
  }
  return std::move(b.frame);
}

// Applies the all-or-none timestamp rule and synthesizes missing timestamps.
PoseStream assemble(std::vector<FrameBuilder> builders, double nominal_fps, std::string source_id) {
  if (builders.empty()) throw EmptyStream("pose stream has no frames");
  PoseStream stream;
  stream.nominal_fps = nominal_fps;
  stream.source_id = std::move(source_id);
  const bool any = std::any_of(builders.begin(), builders.end(), [](auto& b) { return b.timestamp.has_value(); });
  const bool all = std::all_of(builders.begin(), builders.end(), [](auto& b) { return b.timestamp.has_value(); });
  if (any && !all) {
    auto it = std::find_if(builders.begin(), builders.end(), [](auto& b) { return !b.timestamp.has_value(); });
    throw ParseError("frame " + std::to_string(it->frame.frame_index) +
                         " has no timestamp while others do",
                     it->first_line);
  }
  stream.timestamps_synthesized = !all;
  const double frame_ms = 1000.0 / nominal_fps;
  stream.frames.reserve(builders.size());
  for (auto& b : builders) {
    b.frame.timestamp_ms = all ? *b.timestamp : static_cast<double>(b.frame.frame_index) * frame_ms;
    stream.frames.push_back(finish_frame(b));
  }
  return stream;
}

double require_double(std::string_view field, const char* name, std::size_t line) {
  double v = 0.0;
  if (!text::parse_double(field, v) || !std::isfinite(v)) {
    throw ParseError(std::string("bad ") + name + " value '" + std::string(field) + "'", line);
  }
  return v;
}

void write_number(std::ostream& out, double v) { out << text::format_double(v); }

}  // namespace

Eigen::Matrix<double, Eigen::Dynamic, 3> PoseFrame::positions() const {
  Eigen::Matrix<double, Eigen::Dynamic, 3> p(static_cast<Eigen::Index>(landmarks.size()), 3);
  for (std::size_t i = 0; i < landmarks.size(); ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    p(r, 0) = landmarks[i].x;
    p(r, 1) = landmarks[i].y;
    p(r, 2) = landmarks[i].z;
  }
  return p;
}

PoseFormat pose_format_from_path(const std::filesystem::path& path) {
  const auto ext = path.extension().string();
  if (ext == ".jsonl" || ext == ".ndjson") return PoseFormat::jsonl;
  return PoseFormat::csv;
}

PoseStream parse_pose_csv(std::istream& in, double nominal_fps, std::string source_id) {
  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(in, line)) throw EmptyStream("pose CSV is empty");
  ++line_no;
  if (text::trim(line) != kCsvHeader) {
    throw ParseError(std::string("expected header '") + kCsvHeader + "'", line_no);
  }

  std::vector<FrameBuilder> builders;
  while (std::getline(in, line)) {
    ++line_no;
    if (text::trim(line).empty()) continue;
    const auto fields = text::split(text::trim(line), ',');
    if (fields.size() != 7) {
      throw ParseError("expected 7 fields, found " + std::to_string(fields.size()), line_no);
    }
    long long frame = 0;
    long long id = 0;
    if (!text::parse_int(fields[0], frame) || frame < 0) throw ParseError("bad frame index", line_no);
    if (!text::parse_int(fields[2], id)) throw ParseError("bad landmark id", line_no);
    if (id < 0 || id >= kLandmarkCount) {
      throw ParseError("landmark id " + std::to_string(id) + " outside 0..32", line_no);
    }
    std::optional<double> ts;
    if (!text::trim(fields[1]).empty()) ts = require_double(fields[1], "timestamp_ms", line_no);

    Landmark lm;
    lm.id = static_cast<int>(id);
    lm.x = require_double(fields[3], "x", line_no);
    lm.y = require_double(fields[4], "y", line_no);
    lm.z = require_double(fields[5], "z", line_no);
    if (!text::trim(fields[6]).empty()) lm.visibility = require_double(fields[6], "visibility", line_no);

    if (builders.empty() || builders.back().frame.frame_index != frame) {
      for (const auto& b : builders) {
        if (b.frame.frame_index == frame) {
          throw ParseError("rows of frame " + std::to_string(frame) + " are not contiguous", line_no);
        }
      }
      FrameBuilder b;
      b.frame.frame_index = frame;
      b.timestamp = ts;
      b.first_line = line_no;
      builders.push_back(std::move(b));
    } else if (builders.back().timestamp != ts) {
      throw ParseError("timestamp differs from earlier rows of frame " + std::to_string(frame), line_no);
    }
    builders.back().frame.landmarks.push_back(lm);
  }
  return assemble(std::move(builders), nominal_fps, std::move(source_id));
}

PoseStream parse_pose_jsonl(std::istream& in, double nominal_fps, std::string source_id) {
  using nlohmann::json;
  std::string line;
  std::size_t line_no = 0;
  std::vector<FrameBuilder> builders;
  while (std::getline(in, line)) {
    ++line_no;
    if (text::trim(line).empty()) continue;
    json obj;
    try {
      obj = json::parse(line);
    } catch (const json::parse_error& e) {
      throw ParseError(std::string("invalid JSON: ") + e.what(), line_no);
    }
    try {
      FrameBuilder b;
      b.first_line = line_no;
      b.frame.frame_index = obj.at("frame").get<std::int64_t>();
      if (b.frame.frame_index < 0) throw ParseError("negative frame index", line_no);
      if (obj.contains("timestamp_ms") && !obj["timestamp_ms"].is_null()) {
        b.timestamp = obj["timestamp_ms"].get<double>();
      }
      for (const auto& item : obj.at("landmarks")) {
        Landmark lm;
        lm.id = item.at("id").get<int>();
        if (lm.id < 0 || lm.id >= kLandmarkCount) {
          throw ParseError("landmark id " + std::to_string(lm.id) + " outside 0..32", line_no);
        }
        lm.x = item.at("x").get<double>();
        lm.y = item.at("y").get<double>();
        lm.z = item.at("z").get<double>();
        if (item.contains("v") && !item["v"].is_null()) lm.visibility = item["v"].get<double>();
        b.frame.landmarks.push_back(lm);
      }
      if (!builders.empty() && builders.back().frame.frame_index == b.frame.frame_index) {
        throw ParseError("frame " + std::to_string(b.frame.frame_index) + " repeated", line_no);
      }
      builders.push_back(std::move(b));
    } catch (const json::exception& e) {
      throw ParseError(std::string("bad frame object: ") + e.what(), line_no);
    }
  }
  return assemble(std::move(builders), nominal_fps, std::move(source_id));
}

PoseStream parse_pose_stream(const std::filesystem::path& path, PoseFormat format, double nominal_fps) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open pose file: " + path.string());
  auto id = path.stem().string();
  return format == PoseFormat::csv ? parse_pose_csv(in, nominal_fps, std::move(id))
                                   : parse_pose_jsonl(in, nominal_fps, std::move(id));
}

void write_pose_stream(std::ostream& out, const PoseStream& stream, PoseFormat format) {
  if (format == PoseFormat::csv) {
    out << kCsvHeader << '\n';
    for (const auto& f : stream.frames) {
      for (const auto& lm : f.landmarks) {
        out << f.frame_index << ',';
        if (!stream.timestamps_synthesized) write_number(out, f.timestamp_ms);
        out << ',' << lm.id << ',';
        write_number(out, lm.x);
        out << ',';
        write_number(out, lm.y);
        out << ',';
        write_number(out, lm.z);
        out << ',';
        write_number(out, lm.visibility);
        out << '\n';
      }
    }
    return;
  }
  // JSONL; numbers are emitted with the shortest round-trip form as well.
  for (const auto& f : stream.frames) {
    out << "{\"frame\":" << f.frame_index << ",\"timestamp_ms\":";
    if (stream.timestamps_synthesized) {
      out << "null";
    } else {
      write_number(out, f.timestamp_ms);
    }
    out << ",\"landmarks\":[";
    for (std::size_t i = 0; i < f.landmarks.size(); ++i) {
      const auto& lm = f.landmarks[i];
      if (i) out << ',';
      out << "{\"id\":" << lm.id << ",\"x\":";
      write_number(out, lm.x);
      out << ",\"y\":";
      write_number(out, lm.y);
      out << ",\"z\":";
      write_number(out, lm.z);
      out << ",\"v\":";
      write_number(out, lm.visibility);
      out << '}';
    }
    out << "]}\n";
  }
}

std::string to_string(const PoseStream& stream, PoseFormat format) {
  std::ostringstream ss;
  write_pose_stream(ss, stream, format);
  return ss.str();
}

PoseStream select_upper_body(const PoseStream& stream) {
  PoseStream out;
  out.nominal_fps = stream.nominal_fps;
  out.source_id = stream.source_id;
  out.timestamps_synthesized = stream.timestamps_synthesized;
  out.frames.reserve(stream.frames.size());
  for (const auto& f : stream.frames) {
    PoseFrame g;
    g.frame_index = f.frame_index;
    g.timestamp_ms = f.timestamp_ms;
    std::copy_if(f.landmarks.begin(), f.landmarks.end(), std::back_inserter(g.landmarks),
                 [](const Landmark& lm) { return lm.id >= 0 && lm.id <= kUpperBodyLastId; });
    out.frames.push_back(std::move(g));
  }
  return out;
}

bool is_gap(double delta_ms, double nominal_frame_ms) { return delta_ms > 1.5 * nominal_frame_ms; }

std::size_t ValidationReport::count(FindingKind kind) const {
  return static_cast<std::size_t>(
      std::count_if(findings.begin(), findings.end(), [kind](const Finding& f) { return f.kind == kind; }));
}

ValidationReport validate_stream(const PoseStream& stream) {
  ValidationReport report;
  if (stream.timestamps_synthesized) {
    report.findings.push_back({FindingKind::synthesized_timestamps, 0, 0, std::nullopt,
                               "timestamps absent from input; synthesized from frame index"});
  }
  const double frame_ms = stream.nominal_frame_ms();
  for (std::size_t i = 0; i < stream.frames.size(); ++i) {
    const auto& f = stream.frames[i];
    if (i > 0) {
      const auto& p = stream.frames[i - 1];
      const double delta = f.timestamp_ms - p.timestamp_ms;
      if (f.frame_index <= p.frame_index) {
        report.findings.push_back({FindingKind::timestamp_anomaly, f.frame_index, i, std::nullopt,
                                   "frame index not strictly increasing"});
      }
      if (delta <= 0.0) {
        report.findings.push_back({FindingKind::timestamp_anomaly, f.frame_index, i, std::nullopt,
                                   "timestamp not strictly increasing (delta " + text::format_double(delta) + " ms)"});
      } else if (is_gap(delta, frame_ms)) {
        report.findings.push_back({FindingKind::gap, f.frame_index, i, std::nullopt,
                                   "gap of " + text::format_double(delta) + " ms before frame"});
      } else if (delta < 0.5 * frame_ms) {
        report.findings.push_back({FindingKind::timestamp_anomaly, f.frame_index, i, std::nullopt,
                                   "short frame interval " + text::format_double(delta) + " ms"});
      }
    }
    for (const auto& lm : f.landmarks) {
      if (!(lm.visibility >= 0.0 && lm.visibility <= 1.0)) {
        report.findings.push_back({FindingKind::out_of_range, f.frame_index, i, lm.id,
                                   "visibility " + text::format_double(lm.visibility) + " outside [0, 1]"});
      }
      if (!std::isfinite(lm.x) || !std::isfinite(lm.y) || !std::isfinite(lm.z)) {
        report.findings.push_back({FindingKind::out_of_range, f.frame_index, i, lm.id, "non-finite coordinate"});
      }
    }
  }
  return report;
}

std::string to_string(FindingKind kind) {
  switch (kind) {
    case FindingKind::gap: return "gap";
    case FindingKind::timestamp_anomaly: return "timestamp_anomaly";
    case FindingKind::out_of_range: return "out_of_range";
    case FindingKind::synthesized_timestamps: return "synthesized_timestamps";
  }
  return "unknown";
}

std::string to_json(const ValidationReport& report) {
  nlohmann::ordered_json j;
  j["clean"] = report.clean();
  j["findings"] = nlohmann::ordered_json::array();
  for (const auto& f : report.findings) {
    nlohmann::ordered_json e;
    e["kind"] = to_string(f.kind);
    e["frame"] = f.frame_index;
    if (f.landmark_id) e["landmark"] = *f.landmark_id;
    e["message"] = f.message;
    j["findings"].push_back(std::move(e));
  }
  return j.dump(2) + "\n";
}

}  // namespace reactkit
