#pragma once

// Fixtures shared by the unit tests.

#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <sstream>
#include <string>

#include "reactkit/pose.hpp"

namespace reactkit::testing {

// Every landmark parked at a distinct fixed position; timestamps exact multiples of the frame.
inline PoseStream static_stream(int frames, double fps = 30.0, std::string id = "static") {
  PoseStream s;
  s.nominal_fps = fps;
  s.source_id = std::move(id);
  for (int i = 0; i < frames; ++i) {
    PoseFrame f;
    f.frame_index = i;
    f.timestamp_ms = i * 1000.0 / fps;
    for (int k = 0; k < kLandmarkCount; ++k) {
      f.landmarks.push_back({k, 0.1 + 0.02 * k, 0.9 - 0.015 * k, 0.001 * k, 1.0});
    }
    s.frames.push_back(std::move(f));
  }
  return s;
}

// Random walk on every coordinate.
inline PoseStream random_stream(int frames, std::uint64_t seed, double fps = 30.0) {
  auto s = static_stream(frames, fps, "random");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0.0, 0.01);
  for (std::size_t i = 1; i < s.frames.size(); ++i) {
    for (std::size_t k = 0; k < s.frames[i].landmarks.size(); ++k) {
      auto& lm = s.frames[i].landmarks[k];
      const auto& prev = s.frames[i - 1].landmarks[k];
      lm.x = prev.x + n(rng);
      lm.y = prev.y + n(rng);
      lm.z = prev.z + n(rng);
    }
  }
  return s;
}

inline std::filesystem::path fresh_dir(const std::string& name) {
  const char* base = std::getenv("REACTKIT_TEST_TMP");
  auto dir = std::filesystem::path(base ? base : std::filesystem::temp_directory_path().string()) /
             ("reactkit_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

// Relative path -> file bytes, for every regular file under dir.
inline std::map<std::string, std::string> snapshot(const std::filesystem::path& dir) {
  std::map<std::string, std::string> out;
  for (const auto& e : std::filesystem::recursive_directory_iterator(dir)) {
    if (e.is_regular_file()) out[std::filesystem::relative(e.path(), dir).generic_string()] = slurp(e.path());
  }
  return out;
}

}  // namespace reactkit::testing
