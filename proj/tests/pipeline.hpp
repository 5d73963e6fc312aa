#pragma once

// synth -> detect -> stats through the in-process CLI.

#include <filesystem>
#include <sstream>
#include <string>
#include <vector>

#include "cli.hpp"

namespace reactkit::testing {

struct CliResult {
  int code = 0;
  std::string out;
  std::string err;
};

inline CliResult run_cli(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  CliResult r;
  r.code = cli::run(args, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

// Returns the first failing step, or a zero-code result.
inline CliResult run_pipeline(const std::filesystem::path& root, std::uint64_t seed, int participants) {
  const auto synth = (root / "synth").string();
  const auto det = (root / "detect").string();
  const auto st = (root / "stats").string();
  auto r = run_cli({"--seed", std::to_string(seed), "--out", synth, "synth", "--kind", "session", "--participants",
                    std::to_string(participants)});
  if (r.code != 0) return r;
  r = run_cli({"--out", det, "detect", "--pose", synth + "/poses", "--baselines", synth + "/baselines.csv"});
  if (r.code != 0) return r;
  return run_cli({"--out", st, "stats", "--records", synth + "/srt_records.csv", det + "/vision_records.csv"});
}

}  // namespace reactkit::testing
