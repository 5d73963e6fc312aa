#include "cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "reactkit/detector.hpp"
#include "reactkit/errors.hpp"
#include "reactkit/kinematics.hpp"
#include "reactkit/pose.hpp"
#include "reactkit/spectral.hpp"
#include "reactkit/stats.hpp"
#include "reactkit/synth.hpp"
#include "reactkit/text.hpp"
#include "reactkit/woz.hpp"

namespace reactkit::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

struct RunConfig {
  // global
  std::optional<std::uint64_t> seed;
  std::string out = ".";
  double fps = 30.0;

  // shared by ingest / detect / spectral
  std::vector<std::string> pose;
  std::string format = "auto";
  std::string dims = "xyz";

  // detect
  std::string baselines;
  std::vector<double> warnings{25000.0, 45000.0};
  double baseline_mean = 438.0;
  double baseline_sd = 154.0;
  std::string method = "fft";
  bool emit_trace = false;

  // spectral
  double scale_min = 2.0;
  double scale_max = 0.0;  // 0: the search-window length in frames
  int scale_count = 32;
  bool remove_mean = false;

  // scenario
  std::vector<std::string> scripts;
  std::string clock = "sim";
  std::string transport = "stream";
  double delay_ms = 0.0;
  std::string tcp;
  bool expect_ack = false;
  bool randomize = false;

  // srt
  std::vector<std::string> logs;
  std::string participant = "P01";
  std::string setting = "Baseline";
  double miss_ms = kDefaultMissThresholdMs;

  // stats
  std::vector<std::string> records;
  std::string variant = "welch";

  // synth
  std::string kind = "session";
  double duration_ms = 60000.0;
  std::vector<double> onsets{400.0};
  double kernel_ms = 438.0;
  double burst_sigma_ms = 0.0;  // 0: kernel_ms / 8
  double amplitude = 1.0;
  double snr = 10.0;
  double noise_sigma = -1.0;  // < 0: derived from snr
  int participants = 21;
  double rho = 0.5;
  double sigma_mismatch = 0.25;
  std::string source = "synth";
};

std::uint64_t require_seed(const RunConfig& cfg, const std::string& what) {
  if (!cfg.seed) throw ConfigError(what + " needs an explicit --seed");
  return *cfg.seed;
}

PoseFormat resolve_format(const std::string& format, const fs::path& path) {
  if (format == "csv") return PoseFormat::csv;
  if (format == "jsonl") return PoseFormat::jsonl;
  return pose_format_from_path(path);
}

// Files named directly, or every .csv / .jsonl inside a named directory, sorted.
std::vector<fs::path> expand_pose_inputs(const std::vector<std::string>& inputs) {
  std::vector<fs::path> files;
  for (const auto& in : inputs) {
    const fs::path p(in);
    if (fs::is_directory(p)) {
      std::vector<fs::path> found;
      for (const auto& e : fs::directory_iterator(p)) {
        const auto ext = e.path().extension();
        if (e.is_regular_file() && (ext == ".csv" || ext == ".jsonl")) found.push_back(e.path());
      }
      std::sort(found.begin(), found.end());
      files.insert(files.end(), found.begin(), found.end());
    } else if (fs::is_regular_file(p)) {
      files.push_back(p);
    } else {
      throw ConfigError("no such input: " + in);
    }
  }
  if (files.empty()) throw ConfigError("no pose files given");
  return files;
}

void check_file(const std::string& path, const std::string& what) {
  if (path.empty()) throw ConfigError(what + " is required");
  if (!fs::is_regular_file(path)) throw ConfigError(what + " not found: " + path);
}

std::string to_text(const auto& writer_arg, auto writer) {
  std::ostringstream os;
  writer(os, writer_arg);
  return os.str();
}

// Global keys plus those of the subcommand that ran.
void echo_config(const fs::path& out_dir, const std::string& effective, const std::string& sub) {
  std::istringstream in(effective);
  std::string kept;
  for (std::string line; std::getline(in, line);) {
    const auto eq = line.find('=');
    const auto key = line.substr(0, eq);
    if (key.find('.') == std::string::npos || key.rfind(sub + ".", 0) == 0) kept += line + '\n';
  }
  text::write_file_atomic(out_dir / "effective_config.toml", kept);
}

// ---------------------------------------------------------------- ingest

void cmd_ingest(const RunConfig& cfg, const fs::path& out_dir, std::ostream& out) {
  const auto dims = dims_from_string(cfg.dims);
  for (const auto& path : expand_pose_inputs(cfg.pose)) {
    const auto stream = parse_pose_stream(path, resolve_format(cfg.format, path), cfg.fps);
    const auto report = validate_stream(stream);
    const auto upper = select_upper_body(stream);
    const auto series = velocity_series(upper, dims, GapPolicy::flag);
    const auto stem = stream.source_id;
    text::write_file_atomic(out_dir / (stem + ".validation.json"), to_json(report));
    text::write_file_atomic(out_dir / (stem + ".velocity.csv"), to_text(series, [](std::ostream& os, const auto& s) {
                              write_velocity_csv(os, s);
                            }));
    out << stem << ": " << stream.size() << " frames, " << report.findings.size() << " findings\n";
  }
}

// ---------------------------------------------------------------- detect

// Either `participant,baseline_rt_ms`, or a records CSV from which each
// participant's mean VR-WT HAV SRT is taken.
std::map<std::string, double> read_baselines(const fs::path& path) {
  const auto content = text::read_file(path);
  std::istringstream in(content);
  std::string header;
  std::getline(in, header);
  if (!header.empty() && header.back() == '\r') header.pop_back();
  std::map<std::string, double> out;
  if (header == "participant,baseline_rt_ms") {
    std::string line;
    std::size_t n = 1;
    while (std::getline(in, line)) {
      ++n;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (text::trim(line).empty()) continue;
      const auto f = text::split(line, ',');
      double v = 0.0;
      if (f.size() != 2 || !text::parse_double(text::trim(f[1]), v) || !(v > 0.0)) {
        throw ParseError("expected participant,baseline_rt_ms with a positive value", n);
      }
      out[std::string(text::trim(f[0]))] = v;
    }
    return out;
  }
  std::istringstream again(content);
  const auto records = read_records_csv(again);
  std::map<std::string, std::pair<double, int>> acc;
  for (const auto& r : records) {
    if (r.setting == Setting::VR_WT && r.modality == Modality::HAV && r.method == Method::SRT) {
      acc[r.participant].first += r.rt_ms;
      acc[r.participant].second += 1;
    }
  }
  for (const auto& [p, s] : acc) out[p] = s.first / s.second;
  return out;
}

void cmd_detect(const RunConfig& cfg, const fs::path& out_dir, std::ostream& out) {
  check_file(cfg.baselines, "--baselines");
  if (cfg.warnings.empty()) throw ConfigError("--warnings must name at least one warning time");
  const auto baselines = read_baselines(cfg.baselines);
  const BaselineStats stats{cfg.baseline_mean, cfg.baseline_sd};
  DetectOptions options;
  options.dims = dims_from_string(cfg.dims);
  options.method = convolution_method_from_string(cfg.method);

  const auto files = expand_pose_inputs(cfg.pose);
  // Check every participant before any work starts.
  std::vector<std::string> missing;
  for (const auto& f : files) {
    if (!baselines.count(f.stem().string())) missing.push_back(f.stem().string());
  }
  if (!missing.empty()) {
    std::string names;
    for (const auto& m : missing) names += (names.empty() ? "" : ", ") + m;
    throw ConfigError("no baseline reaction time for participant(s): " + names);
  }

  std::ostringstream summary;
  summary << "participant,warning_index,warning_ms,kernel_duration_ms,t_max_ms,rt_ms,peak_value\n";
  std::vector<ReactionRecord> vision;
  for (const auto& path : files) {
    const auto stream = parse_pose_stream(path, resolve_format(cfg.format, path), cfg.fps);
    const auto id = stream.source_id;
    std::vector<ReactionEstimate> estimates;
    try {
      estimates = detect_all(stream, cfg.warnings, baselines.at(id), stats, options);
    } catch (const Error& e) {
      throw Error(e.kind(), path.string() + ": " + e.what());
    }
    text::write_file_atomic(out_dir / (id + ".detection.json"), to_json(estimates, cfg.emit_trace));
    for (std::size_t k = 0; k < estimates.size(); ++k) {
      const auto& e = estimates[k];
      summary << id << ',' << k + 1 << ',' << text::format_double(e.warning_ms) << ','
              << text::format_double(e.kernel.duration_ms) << ',' << text::format_double(e.t_max_ms) << ','
              << text::format_double(e.rt_ms) << ',' << text::format_double(e.peak_value) << '\n';
      vision.push_back({id, Setting::VisionE, Modality::HAV, Method::Vision, e.rt_ms});
      if (cfg.emit_trace) {
        const auto& c = *e.convolution;
        std::ostringstream tr;
        tr << "t_ms,t_rel_ms,v,y,in_window\n";
        const Eigen::Index lo = std::max<Eigen::Index>(0, e.window_first - c.kernel_length);
        const Eigen::Index hi =
            std::min<Eigen::Index>(c.size() - 1, e.window_first + e.window.length_frames + c.kernel_length);
        for (Eigen::Index i = lo; i <= hi; ++i) {
          const bool inside = i >= e.window_first && i <= e.window_first + e.window.length_frames;
          tr << text::format_double(c.t_ms(i)) << ',' << text::format_double(c.t_ms(i) - e.warning_ms) << ','
             << text::format_double(e.series->v(i)) << ',' << text::format_double(c.y(i)) << ','
             << (inside ? 1 : 0) << '\n';
        }
        text::write_file_atomic(out_dir / (id + ".w" + std::to_string(k + 1) + ".trace.csv"), tr.str());
      }
    }
    out << id << ":";
    for (const auto& e : estimates) out << " rt=" << text::format_double(e.rt_ms) << "ms";
    out << '\n';
  }
  text::write_file_atomic(out_dir / "summary.csv", summary.str());
  std::ostringstream rec;
  write_records_csv(rec, vision);
  text::write_file_atomic(out_dir / "vision_records.csv", rec.str());
}

// ---------------------------------------------------------------- spectral

void cmd_spectral(const RunConfig& cfg, const fs::path& out_dir, std::ostream& out) {
  const auto dims = dims_from_string(cfg.dims);
  for (const auto& path : expand_pose_inputs(cfg.pose)) {
    const auto stream = parse_pose_stream(path, resolve_format(cfg.format, path), cfg.fps);
    const auto id = stream.source_id;
    const auto series = velocity_series(select_upper_body(stream), dims, GapPolicy::flag);
    const auto spectrum = fft_magnitude(series, cfg.remove_mean);
    std::ostringstream sp;
    write_spectrum_csv(sp, spectrum);
    text::write_file_atomic(out_dir / (id + ".spectrum.csv"), sp.str());

    double max_scale = cfg.scale_max;
    if (!(max_scale > 0.0)) {
      max_scale = static_cast<double>(
          default_window(cfg.baseline_mean, cfg.baseline_sd, series.frame_ms()).length_frames);
    }
    const auto scales = default_scales(max_scale, cfg.scale_count, cfg.scale_min);
    const auto cwt = cwt_gaus2(series, scales);
    write_cwt(cwt, out_dir / (id + ".cwt.f64"), out_dir / (id + ".cwt.json"));
    const auto map = peak_scale_map(cwt);
    std::ostringstream ps;
    ps << "t_ms,scale,magnitude\n";
    for (std::size_t i = 0; i < map.scale.size(); ++i) {
      const auto idx = static_cast<Eigen::Index>(i);
      ps << text::format_double(map.translations_ms(idx)) << ','
         << (map.scale[i] ? text::format_double(*map.scale[i]) : std::string{}) << ','
         << text::format_double(map.magnitude(idx)) << '\n';
    }
    text::write_file_atomic(out_dir / (id + ".peak_scale.csv"), ps.str());
    const auto regions = dominant_regions(map);
    out << id << ": " << spectrum.n << "-point spectrum, " << cwt.scales.size() << " scales, " << regions.size()
        << " dominant region(s)\n";
  }
}

// ---------------------------------------------------------------- scenario

void cmd_scenario(const RunConfig& cfg, const fs::path& out_dir, std::ostream& out) {
  if (cfg.scripts.empty()) throw ConfigError("--script is required");
  std::vector<ScenarioScript> scripts;
  for (const auto& s : cfg.scripts) scripts.push_back(resolve_script(s));
  if (cfg.randomize) scripts = randomize_session(std::move(scripts), require_seed(cfg, "--randomize"));

  std::unique_ptr<Clock> clock;
  if (cfg.clock == "sim") {
    clock = std::make_unique<SimulatedClock>();
  } else if (cfg.clock == "wall") {
    clock = std::make_unique<WallClock>();
  } else {
    throw ConfigError("--clock must be sim or wall");
  }

  std::ostringstream discard;
  std::unique_ptr<TriggerSink> sink;
  if (cfg.transport == "stream") {
    sink = std::make_unique<StreamSink>(discard);
  } else if (cfg.transport == "sim") {
    const double d = cfg.delay_ms;
    sink = std::make_unique<SimulatedTransport>([d](const TriggerEvent&) { return d; });
  } else if (cfg.transport == "tcp") {
    const auto colon = cfg.tcp.rfind(':');
    unsigned long long port = 0;
    if (colon == std::string::npos || !text::parse_uint(cfg.tcp.substr(colon + 1), port) || port == 0 ||
        port > 65535) {
      throw ConfigError("--tcp expects host:port");
    }
    sink = std::make_unique<TcpSink>(cfg.tcp.substr(0, colon), static_cast<std::uint16_t>(port), cfg.expect_ack);
  } else {
    throw ConfigError("--transport must be stream, sim or tcp");
  }

  ordered_json session;
  session["clock"] = cfg.clock;
  session["transport"] = cfg.transport;
  session["runs"] = ordered_json::array();
  for (std::size_t k = 0; k < scripts.size(); ++k) {
    ScenarioRun run;
    const auto name = std::to_string(k + 1) + "-" + scripts[k].name + ".log";
    try {
      run = run_scenario(scripts[k], *clock, *sink);
    } catch (const TransportError& e) {
      text::write_file_atomic(out_dir / name, event_log_text(e.partial()));
      throw;
    }
    const auto log = event_log_text(run);
    text::write_file_atomic(out_dir / name, log);
    out << log;

    ordered_json r;
    r["script"] = run.script;
    r["log"] = name;
    r["triggers"] = run.events.size();
    const auto jitter = jitter_summary(run.events);
    r["jitter_ms"] = {{"p50", jitter.p50_ms}, {"p99", jitter.p99_ms}, {"max", jitter.max_ms}};
    if (!run.acks.empty()) {
      const auto lat = latency_budget_check(run.events, run.acks);
      r["latency"] = {{"budget_ms", lat.budget_ms},
                      {"p99_ms", lat.p99_ms},
                      {"max_ms", lat.max_ms},
                      {"all_pass", lat.all_pass},
                      {"missing_acks", lat.missing_acks}};
    }
    session["runs"].push_back(std::move(r));
  }
  text::write_file_atomic(out_dir / "session.json", session.dump(2) + "\n");
}

// ---------------------------------------------------------------- srt

void cmd_srt(const RunConfig& cfg, const fs::path& out_dir, std::ostream& out) {
  if (cfg.logs.empty()) throw ConfigError("--log is required");
  const auto setting = setting_from_string(cfg.setting);
  std::vector<ReactionRecord> records;
  std::ostringstream events;
  events << "log,seq,modality,trigger_ms,response_ms,rt_ms,miss\n";
  std::size_t misses = 0;
  std::size_t orphans = 0;
  for (const auto& path : cfg.logs) {
    check_file(path, "--log");
    const auto log = parse_event_log(fs::path(path), cfg.miss_ms);
    const auto name = fs::path(path).filename().string();
    for (const auto& e : log.srt) {
      events << name << ',' << e.trigger_seq << ',' << to_string(e.modality) << ','
             << text::format_double(e.trigger_ms) << ',' << text::format_double(e.response_ms) << ','
             << text::format_double(e.rt_ms) << ',' << (e.miss ? 1 : 0) << '\n';
      if (e.miss) {
        ++misses;
        continue;
      }
      records.push_back({cfg.participant, setting, e.modality, Method::SRT, e.rt_ms});
    }
    misses += log.unanswered.size();
    orphans += log.orphans.size() + log.premature.size();
  }
  std::ostringstream rec;
  write_records_csv(rec, records);
  text::write_file_atomic(out_dir / "srt_records.csv", rec.str());
  text::write_file_atomic(out_dir / "srt_events.csv", events.str());
  out << records.size() << " reaction(s), " << misses << " miss(es), " << orphans << " unpaired response(s)\n";
}

// ---------------------------------------------------------------- stats

void cmd_stats(const RunConfig& cfg, const fs::path& out_dir, std::ostream& out) {
  if (cfg.records.empty()) throw ConfigError("--records is required");
  std::vector<ReactionRecord> records;
  for (const auto& path : cfg.records) {
    check_file(path, "--records");
    auto part = read_records_csv(fs::path(path));
    records.insert(records.end(), part.begin(), part.end());
  }
  if (records.empty()) throw InvalidRecord("no reaction records in the given files");
  const auto variant = cfg.variant == "welch"     ? TTestVariant::welch
                       : cfg.variant == "student" ? TTestVariant::student
                                                  : throw ConfigError("--variant must be welch or student");

  std::ostringstream summary;
  write_summary_csv(summary, records);
  const auto grid = significance_grid(records, variant);
  std::ostringstream settings, modalities, ttests;
  write_setting_grid_csv(settings, grid);
  write_modality_grid_csv(modalities, grid);
  write_ttests_csv(ttests, grid);
  text::write_file_atomic(out_dir / "cell_summary.csv", summary.str());
  text::write_file_atomic(out_dir / "settings_grid.csv", settings.str());
  text::write_file_atomic(out_dir / "modalities_grid.csv", modalities.str());
  text::write_file_atomic(out_dir / "ttests.csv", ttests.str());
  std::size_t files = 4;
  const bool has_vision = std::any_of(records.begin(), records.end(),
                                      [](const ReactionRecord& r) { return r.setting == Setting::VisionE; });
  if (has_vision) {
    std::ostringstream paired;
    write_paired_csv(paired, vision_paired_report(records));
    text::write_file_atomic(out_dir / "paired_tests.csv", paired.str());
    ++files;
  }
  out << records.size() << " records, " << files << " report files\n";
}

// ---------------------------------------------------------------- synth

ordered_json truth_json(const SyntheticPose& pose) {
  ordered_json a = ordered_json::array();
  for (const auto& t : pose.truth) {
    a.push_back({{"warning_ms", t.warning_ms},
                 {"onset_ms", t.onset_ms},
                 {"peak_ms", t.peak_ms},
                 {"burst_sigma_ms", t.burst_sigma_ms},
                 {"amplitude", t.amplitude}});
  }
  return a;
}

ordered_json cells_json(const std::vector<SrtCell>& cells) {
  ordered_json a = ordered_json::array();
  for (const auto& c : cells) {
    a.push_back({{"setting", to_string(c.setting)},
                 {"modality", to_string(c.modality)},
                 {"method", to_string(c.method)},
                 {"mean_ms", c.mean_ms},
                 {"sd_ms", c.sd_ms},
                 {"n", c.n}});
  }
  return a;
}

void cmd_synth(const RunConfig& cfg, const fs::path& out_dir, std::ostream& out) {
  const auto seed = require_seed(cfg, "synth");
  ordered_json truth;
  truth["kind"] = cfg.kind;
  truth["seed"] = seed;
  if (cfg.kind == "pose") {
    if (cfg.onsets.empty()) throw ConfigError("--onsets must name at least one onset");
    if (cfg.onsets.size() != 1 && cfg.onsets.size() != cfg.warnings.size()) {
      throw ConfigError("--onsets needs one value, or one per warning");
    }
    const double sigma = cfg.burst_sigma_ms > 0.0 ? cfg.burst_sigma_ms : cfg.kernel_ms / 8.0;
    std::vector<WarningBursts> warnings;
    for (std::size_t k = 0; k < cfg.warnings.size(); ++k) {
      BurstSpec b;
      b.onset_ms = cfg.onsets.size() == 1 ? cfg.onsets[0] : cfg.onsets[k];
      b.burst_sigma_ms = sigma;
      b.amplitude = cfg.amplitude;
      b.peak_lead_ms = cfg.kernel_ms / 2.0;
      warnings.push_back({cfg.warnings[k], {b}});
    }
    const double noise_sigma =
        cfg.noise_sigma >= 0.0 ? cfg.noise_sigma : noise_sigma_for_snr(cfg.amplitude, cfg.snr, cfg.fps);
    const auto pose = gen_pose_stream(cfg.duration_ms, cfg.fps, warnings, NoiseSpec{noise_sigma, seed + 1}, seed,
                                      cfg.source);
    const auto fmt = resolve_format(cfg.format == "auto" ? "csv" : cfg.format, {});
    text::write_file_atomic(out_dir / (cfg.source + (fmt == PoseFormat::csv ? ".csv" : ".jsonl")),
                            to_string(pose.stream, fmt));
    truth["fps"] = cfg.fps;
    truth["duration_ms"] = cfg.duration_ms;
    truth["kernel_ms"] = cfg.kernel_ms;
    truth["noise_sigma"] = noise_sigma;
    truth["onsets"] = truth_json(pose);
    out << cfg.source << ": " << pose.stream.size() << " frames, " << pose.truth.size() << " burst(s)\n";
  } else if (cfg.kind == "srt") {
    auto cells = srt_cells();
    const auto vc = vision_cells();
    cells.insert(cells.end(), vc.begin(), vc.end());
    const auto records = gen_srt_dataset(cells, seed, cfg.rho);
    std::ostringstream rec;
    write_records_csv(rec, records);
    text::write_file_atomic(out_dir / "records.csv", rec.str());
    truth["rho"] = cfg.rho;
    truth["cells"] = cells_json(cells);
    out << records.size() << " records\n";
  } else if (cfg.kind == "session") {
    SessionSpec spec;
    spec.participants = cfg.participants;
    spec.fps = cfg.fps;
    spec.duration_ms = cfg.duration_ms;
    spec.warnings_ms = cfg.warnings;
    spec.snr = cfg.snr;
    spec.amplitude = cfg.amplitude;
    spec.sigma_mismatch = cfg.sigma_mismatch;
    spec.rho = cfg.rho;
    spec.window_ms = default_window(cfg.baseline_mean, cfg.baseline_sd, 1000.0 / cfg.fps).length_ms;
    const auto session = gen_session(spec, seed);
    fs::create_directories(out_dir / "poses");
    ordered_json parts = ordered_json::array();
    for (const auto& pose : session.poses) {
      text::write_file_atomic(out_dir / "poses" / (pose.stream.source_id + ".csv"),
                              to_string(pose.stream, PoseFormat::csv));
      parts.push_back({{"participant", pose.stream.source_id},
                       {"baseline_rt_ms", session.baseline_rt_ms.at(pose.stream.source_id)},
                       {"onsets", truth_json(pose)}});
    }
    std::ostringstream base;
    base << "participant,baseline_rt_ms\n";
    for (const auto& [p, d] : session.baseline_rt_ms) base << p << ',' << text::format_double(d) << '\n';
    text::write_file_atomic(out_dir / "baselines.csv", base.str());
    std::ostringstream rec;
    write_records_csv(rec, session.srt_records);
    text::write_file_atomic(out_dir / "srt_records.csv", rec.str());
    truth["fps"] = cfg.fps;
    truth["snr"] = cfg.snr;
    truth["noise_sigma"] = noise_sigma_for_snr(cfg.amplitude, cfg.snr, cfg.fps);
    truth["rho"] = cfg.rho;
    truth["cells"] = cells_json(srt_cells());
    truth["participants"] = std::move(parts);
    out << session.poses.size() << " participant stream(s), " << session.srt_records.size() << " SRT records\n";
  } else {
    throw ConfigError("--kind must be pose, srt or session");
  }
  text::write_file_atomic(out_dir / "truth.json", truth.dump(2) + "\n");
}

void add_pose_options(CLI::App* sub, RunConfig& cfg) {
  sub->add_option("--pose", cfg.pose, "Pose files (.csv/.jsonl) or directories holding them")->required();
  sub->add_option("--format", cfg.format, "Pose format")->check(CLI::IsMember({"auto", "csv", "jsonl"}));
  sub->add_option("--dims", cfg.dims, "Displacement norm")->check(CLI::IsMember({"xy", "xyz"}));
}

void add_baseline_stats(CLI::App* sub, RunConfig& cfg) {
  sub->add_option("--baseline-mean", cfg.baseline_mean, "Population baseline mean (ms) for the search window");
  sub->add_option("--baseline-sd", cfg.baseline_sd, "Population baseline SD (ms) for the search window");
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  RunConfig cfg;
  CLI::App app{"Reaction-time toolkit: pose ingest, matched-filter detection, spectra, WOZ scenarios, statistics",
               "reactkit"};
  app.option_defaults()->always_capture_default();
  app.set_config("--config", "", "TOML config file; flags override it");
  app.add_option("--seed", cfg.seed, "Seed for every randomized step");
  app.add_option("--out", cfg.out, "Output directory");
  app.add_option("--fps", cfg.fps, "Nominal frame rate")->check(CLI::PositiveNumber);
  app.require_subcommand(1);
  app.fallthrough();

  auto* ingest = app.add_subcommand("ingest", "Validate pose files and export velocity series");
  add_pose_options(ingest, cfg);

  auto* detect = app.add_subcommand("detect", "Matched-filter reaction times per participant");
  add_pose_options(detect, cfg);
  detect->add_option("--baselines", cfg.baselines, "participant,baseline_rt_ms CSV, or a records CSV")->required();
  detect->add_option("--warnings", cfg.warnings, "Warning times (ms)")->delimiter(',');
  detect->add_option("--method", cfg.method, "Convolution method")->check(CLI::IsMember({"fft", "direct"}));
  detect->add_flag("--emit-trace", cfg.emit_trace, "Write convolution traces per warning");
  add_baseline_stats(detect, cfg);

  auto* spectral = app.add_subcommand("spectral", "FFT magnitude spectrum and gaus2 CWT of velocity series");
  add_pose_options(spectral, cfg);
  spectral->add_option("--scale-min", cfg.scale_min, "Smallest CWT scale (frames)");
  spectral->add_option("--scale-max", cfg.scale_max, "Largest CWT scale (frames); 0 = search-window length");
  spectral->add_option("--scale-count", cfg.scale_count, "Number of log-spaced scales");
  spectral->add_flag("--remove-mean", cfg.remove_mean, "Subtract the mean before the FFT");
  add_baseline_stats(spectral, cfg);

  auto* scenario = app.add_subcommand("scenario", "Run WOZ warning scripts");
  scenario->add_option("--script", cfg.scripts, "Builtin script name or JSON script path")->required();
  scenario->add_option("--clock", cfg.clock, "Clock")->check(CLI::IsMember({"sim", "wall"}));
  scenario->add_option("--transport", cfg.transport, "Trigger transport")
      ->check(CLI::IsMember({"stream", "sim", "tcp"}));
  scenario->add_option("--delay-ms", cfg.delay_ms, "Ack delay of the simulated transport");
  scenario->add_option("--tcp", cfg.tcp, "host:port of a TCP trigger endpoint");
  scenario->add_flag("--expect-ack", cfg.expect_ack, "Wait for an ACK line per trigger over TCP");
  scenario->add_flag("--randomize", cfg.randomize, "Shuffle the scripts (needs --seed)");

  auto* srt = app.add_subcommand("srt", "Pair triggers and responses from event logs into SRT records");
  srt->add_option("--log", cfg.logs, "Event log files")->required();
  srt->add_option("--participant", cfg.participant, "Participant label of the records");
  srt->add_option("--setting", cfg.setting, "Setting of the records");
  srt->add_option("--miss-ms", cfg.miss_ms, "Reaction times above this are misses");

  auto* stats = app.add_subcommand("stats", "Summary, significance grids and paired tests");
  stats->add_option("--records", cfg.records, "Records CSV files")->required();
  stats->add_option("--variant", cfg.variant, "Unpaired t-test")->check(CLI::IsMember({"welch", "student"}));

  auto* synth = app.add_subcommand("synth", "Seeded synthetic pose streams and SRT datasets");
  synth->add_option("--kind", cfg.kind, "What to generate")->check(CLI::IsMember({"pose", "srt", "session"}));
  synth->add_option("--duration-ms", cfg.duration_ms, "Recording length");
  synth->add_option("--warnings", cfg.warnings, "Warning times (ms)")->delimiter(',');
  synth->add_option("--onsets", cfg.onsets, "Onset after each warning (ms); one value applies to all")
      ->delimiter(',');
  synth->add_option("--kernel-ms", cfg.kernel_ms, "Reaction duration D the bursts are shaped after");
  synth->add_option("--burst-sigma-ms", cfg.burst_sigma_ms, "Burst sigma; 0 = D/8");
  synth->add_option("--amplitude", cfg.amplitude, "Peak speed of each moving landmark (units/s)");
  synth->add_option("--snr", cfg.snr, "Amplitude over per-axis velocity noise");
  synth->add_option("--noise-sigma", cfg.noise_sigma, "Positional noise sigma; overrides --snr");
  synth->add_option("--participants", cfg.participants, "Participants in a session");
  synth->add_option("--rho", cfg.rho, "Shared participant effect weight");
  synth->add_option("--sigma-mismatch", cfg.sigma_mismatch, "Burst sigma spread around D/8 (fraction)");
  synth->add_option("--format", cfg.format, "Pose format")->check(CLI::IsMember({"auto", "csv", "jsonl"}));
  synth->add_option("--source", cfg.source, "Stream label and file stem for --kind pose");
  add_baseline_stats(synth, cfg);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  try {
    const fs::path out_dir(cfg.out);
    fs::create_directories(out_dir);
    echo_config(out_dir, app.config_to_str(true, false), app.get_subcommands().front()->get_name());
    if (ingest->parsed()) cmd_ingest(cfg, out_dir, out);
    if (detect->parsed()) cmd_detect(cfg, out_dir, out);
    if (spectral->parsed()) cmd_spectral(cfg, out_dir, out);
    if (scenario->parsed()) cmd_scenario(cfg, out_dir, out);
    if (srt->parsed()) cmd_srt(cfg, out_dir, out);
    if (stats->parsed()) cmd_stats(cfg, out_dir, out);
    if (synth->parsed()) cmd_synth(cfg, out_dir, out);
  } catch (const Error& e) {
    err << "error: " << e.kind() << ": " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    err << "error: IOError: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run(args, out, err);
}

}  // namespace reactkit::cli
