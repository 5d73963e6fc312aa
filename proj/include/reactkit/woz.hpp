#pragma once

// Scripted Wizard-of-Oz warning scenarios: schedules, clocks, trigger
// transports, the line-delimited trigger/ack/response log and SRT pairing.
//
// Wire format, one message per line:
//   TRIG <seq> <modality> <scheduled_ms> <dispatched_ms>
//   ACK <seq> <recv_ms>
//   RESP <seq> <response_ms>
// Event-log files carry the same lines after a "# reactkit-woz-log v1" header.

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "reactkit/errors.hpp"
#include "reactkit/modality.hpp"

namespace reactkit {

inline constexpr const char* kWozLogHeader = "# reactkit-woz-log v1";

struct ScheduledTrigger {
  double t_ms = 0.0;
  Modality modality = Modality::V;

  bool operator==(const ScheduledTrigger&) const = default;
};

struct ScenarioScript {
  std::string name;
  double duration_ms = 0.0;
  std::vector<ScheduledTrigger> triggers;

  // Throws SpecError unless trigger times are strictly increasing and < duration.
  void validate() const;
  bool operator==(const ScenarioScript&) const = default;
};

// V, HV, AV, HAV (45 s, five triggers each) and ExpE (60 s, HAV at 25 s and 45 s).
std::vector<ScenarioScript> builtin_scripts();
// Builtin by name, else a JSON script file; throws UnknownScript.
ScenarioScript resolve_script(const std::string& name_or_path);
ScenarioScript parse_script_json(const std::string& json_text);

// Seeded Fisher-Yates permutation; identical seeds give identical orders on every platform.
std::vector<ScenarioScript> randomize_session(std::vector<ScenarioScript> scripts, std::uint64_t seed);

class Clock {
 public:
  virtual ~Clock() = default;
  virtual double now_ms() = 0;
  // Returns no earlier than t_ms.
  virtual void wait_until(double t_ms) = 0;
};

// Time advances only when waited on.
class SimulatedClock final : public Clock {
 public:
  explicit SimulatedClock(double start_ms = 0.0) : now_(start_ms) {}
  double now_ms() override { return now_; }
  void wait_until(double t_ms) override {
    if (t_ms > now_) now_ = t_ms;
  }
  void advance(double ms) { now_ += ms; }

 private:
  double now_;
};

class WallClock final : public Clock {
 public:
  WallClock() : origin_(std::chrono::steady_clock::now()) {}
  double now_ms() override;
  void wait_until(double t_ms) override;

 private:
  std::chrono::steady_clock::time_point origin_;
};

struct TriggerEvent {
  std::uint64_t seq = 0;
  double scheduled_ms = 0.0;
  double dispatched_ms = 0.0;
  Modality modality = Modality::V;

  double jitter_ms() const { return dispatched_ms - scheduled_ms; }
  bool operator==(const TriggerEvent&) const = default;
};

struct Ack {
  std::uint64_t seq = 0;
  double recv_ms = 0.0;

  bool operator==(const Ack&) const = default;
};

std::string format_trigger(const TriggerEvent& e);
std::string format_ack(const Ack& a);
std::string format_response(std::uint64_t seq, double response_ms);

class TransportError;

// Receives each trigger once at dispatch time. May return the endpoint's ack.
class TriggerSink {
 public:
  virtual ~TriggerSink() = default;
  // Throws TransportError on delivery failure.
  virtual std::optional<Ack> dispatch(const TriggerEvent& event) = 0;
};

// Writes TRIG lines to a stream; no acks.
class StreamSink final : public TriggerSink {
 public:
  explicit StreamSink(std::ostream& out) : out_(out) {}
  std::optional<Ack> dispatch(const TriggerEvent& event) override;

 private:
  std::ostream& out_;
};

// In-process endpoint that acknowledges after delay_ms(event) on the dispatch clock.
class SimulatedTransport final : public TriggerSink {
 public:
  using DelayFn = std::function<double(const TriggerEvent&)>;
  explicit SimulatedTransport(DelayFn delay_ms) : delay_(std::move(delay_ms)) {}
  std::optional<Ack> dispatch(const TriggerEvent& event) override;
  const std::vector<TriggerEvent>& received() const { return received_; }

 private:
  DelayFn delay_;
  std::vector<TriggerEvent> received_;
};

// Line-delimited TRIG messages over a TCP connection; reads one ACK line per trigger
// when expect_ack is set.
class TcpSink final : public TriggerSink {
 public:
  TcpSink(const std::string& host, std::uint16_t port, bool expect_ack);
  ~TcpSink() override;
  TcpSink(const TcpSink&) = delete;
  TcpSink& operator=(const TcpSink&) = delete;
  std::optional<Ack> dispatch(const TriggerEvent& event) override;

 private:
  int fd_ = -1;
  bool expect_ack_;
  std::string buffer_;
};

struct ScenarioRun {
  std::string script;
  std::vector<TriggerEvent> events;
  std::vector<Ack> acks;
};

class TransportError : public Error {
 public:
  TransportError(const std::string& message, ScenarioRun partial = {})
      : Error("TransportError", message), partial_(std::move(partial)) {}
  const ScenarioRun& partial() const noexcept { return partial_; }

 private:
  ScenarioRun partial_;
};

// Dispatches every trigger at its scheduled offset from the clock reading at entry.
// On failure the TransportError carries the events dispatched before it.
ScenarioRun run_scenario(const ScenarioScript& script, Clock& clock, TriggerSink& sink);

// Header plus TRIG/ACK lines in dispatch order.
void write_event_log(std::ostream& out, const ScenarioRun& run);
std::string event_log_text(const ScenarioRun& run);

struct SrtEvent {
  std::uint64_t trigger_seq = 0;
  double trigger_ms = 0.0;   // dispatched time
  double response_ms = 0.0;
  double rt_ms = 0.0;        // response_ms - trigger_ms
  Modality modality = Modality::V;
  bool miss = false;         // rt_ms beyond the miss threshold
};

struct Response {
  std::uint64_t seq = 0;
  double response_ms = 0.0;
  std::size_t line = 0;
};

struct EventLog {
  std::vector<TriggerEvent> triggers;
  std::vector<Ack> acks;
  std::vector<SrtEvent> srt;               // one per answered trigger
  std::vector<std::uint64_t> unanswered;   // triggers without a response (misses)
  std::vector<Response> orphans;           // responses with no prior trigger, or repeats
  std::vector<Response> premature;         // responses not after their trigger
};

inline constexpr double kDefaultMissThresholdMs = 5000.0;

// Throws ParseError with the offending line number.
EventLog parse_event_log(std::istream& in, double miss_threshold_ms = kDefaultMissThresholdMs);
EventLog parse_event_log(const std::filesystem::path& path, double miss_threshold_ms = kDefaultMissThresholdMs);

inline constexpr double kLatencyBudgetMs = 10.0;

struct LatencyEntry {
  std::uint64_t seq = 0;
  double latency_ms = 0.0;
  bool pass = false;
};

struct LatencyReport {
  std::vector<LatencyEntry> entries;
  std::vector<std::uint64_t> missing_acks;
  double budget_ms = kLatencyBudgetMs;
  double p99_ms = 0.0;  // nearest-rank
  double max_ms = 0.0;
  bool all_pass = false;
};

// Per-event transport latency (ack receive time minus dispatch time) against the budget.
LatencyReport latency_budget_check(const std::vector<TriggerEvent>& events, const std::vector<Ack>& acks,
                                   double budget_ms = kLatencyBudgetMs);

struct JitterSummary {
  double p50_ms = 0.0;
  double p99_ms = 0.0;
  double max_ms = 0.0;
};

JitterSummary jitter_summary(const std::vector<TriggerEvent>& events);

// Nearest-rank percentile of an unsorted sample, q in (0, 100].
double percentile_nearest_rank(std::vector<double> values, double q);

}  // namespace reactkit
