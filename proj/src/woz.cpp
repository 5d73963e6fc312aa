#include "reactkit/woz.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <random>
#include <set>
#include <sstream>
#include <thread>

#include <arpa/inet.h>
#include <netdb.h>
#include <sys/socket.h>
#include <unistd.h>

#include "reactkit/text.hpp"

namespace reactkit {

std::string to_string(Modality m) {
  switch (m) {
    case Modality::V: return "V";
    case Modality::AV: return "AV";
    case Modality::HV: return "HV";
    case Modality::HAV: return "HAV";
  }
  return "?";
}

Modality modality_from_string(std::string_view s) {
  if (s == "V") return Modality::V;
  if (s == "AV") return Modality::AV;
  if (s == "HV") return Modality::HV;
  if (s == "HAV") return Modality::HAV;
  throw ConfigError("unknown modality '" + std::string(s) + "'");
}

void ScenarioScript::validate() const {
  if (!(duration_ms > 0.0)) throw SpecError("script '" + name + "' has non-positive duration");
  for (std::size_t i = 0; i < triggers.size(); ++i) {
    const double t = triggers[i].t_ms;
    if (!(t >= 0.0) || !(t < duration_ms)) {
      throw SpecError("script '" + name + "': trigger " + std::to_string(i + 1) + " at " + text::format_double(t) +
                      " ms outside [0, duration)");
    }
    if (i > 0 && !(t > triggers[i - 1].t_ms)) {
      throw SpecError("script '" + name + "': trigger times not strictly increasing");
    }
  }
}

namespace {

ScenarioScript make_script(std::string name, double duration_s, Modality m, std::initializer_list<double> seconds) {
  ScenarioScript s;
  s.name = std::move(name);
  s.duration_ms = duration_s * 1000.0;
  for (double t : seconds) s.triggers.push_back({t * 1000.0, m});
  return s;
}

// Unbiased draw in [0, bound) from a 64-bit engine by rejection.
std::uint64_t bounded(std::mt19937_64& rng, std::uint64_t bound) {
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % bound;
  std::uint64_t r;
  do {
    r = rng();
  } while (r >= limit);
  return r % bound;
}

}  // namespace

std::vector<ScenarioScript> builtin_scripts() {
  return {
      make_script("V", 45, Modality::V, {10, 20, 28, 33, 36}),
      make_script("HV", 45, Modality::HV, {15, 25, 28, 33, 36}),
      make_script("AV", 45, Modality::AV, {17, 21, 28, 35, 38}),
      make_script("HAV", 45, Modality::HAV, {12, 17, 22, 24, 27}),
      make_script("ExpE", 60, Modality::HAV, {25, 45}),
  };
}

ScenarioScript parse_script_json(const std::string& json_text) {
  try {
    const auto j = nlohmann::json::parse(json_text);
    ScenarioScript s;
    s.name = j.at("name").get<std::string>();
    s.duration_ms = j.at("duration_ms").get<double>();
    for (const auto& t : j.at("triggers")) {
      s.triggers.push_back({t.at("t_ms").get<double>(), modality_from_string(t.at("modality").get<std::string>())});
    }
    s.validate();
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw SpecError(std::string("bad script JSON: ") + e.what());
  }
}

ScenarioScript resolve_script(const std::string& name_or_path) {
  for (auto& s : builtin_scripts()) {
    if (s.name == name_or_path) return s;
  }
  std::error_code ec;
  if (std::filesystem::is_regular_file(name_or_path, ec)) return parse_script_json(text::read_file(name_or_path));
  throw UnknownScript("unknown script '" + name_or_path + "' (builtins: V, HV, AV, HAV, ExpE; or a JSON file)");
}

std::vector<ScenarioScript> randomize_session(std::vector<ScenarioScript> scripts, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  for (std::size_t i = scripts.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(bounded(rng, i));
    std::swap(scripts[i - 1], scripts[j]);
  }
  return scripts;
}

double WallClock::now_ms() {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - origin_).count();
}

void WallClock::wait_until(double t_ms) {
  const auto target = origin_ + std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                                    std::chrono::duration<double, std::milli>(t_ms));
  std::this_thread::sleep_until(target);
  while (now_ms() < t_ms) std::this_thread::yield();
}

std::string format_trigger(const TriggerEvent& e) {
  return "TRIG " + std::to_string(e.seq) + ' ' + to_string(e.modality) + ' ' + text::format_double(e.scheduled_ms) +
         ' ' + text::format_double(e.dispatched_ms);
}

std::string format_ack(const Ack& a) { return "ACK " + std::to_string(a.seq) + ' ' + text::format_double(a.recv_ms); }

std::string format_response(std::uint64_t seq, double response_ms) {
  return "RESP " + std::to_string(seq) + ' ' + text::format_double(response_ms);
}

std::optional<Ack> StreamSink::dispatch(const TriggerEvent& event) {
  out_ << format_trigger(event) << '\n';
  out_.flush();
  if (!out_) throw TransportError("stream sink write failed at trigger " + std::to_string(event.seq));
  return std::nullopt;
}

std::optional<Ack> SimulatedTransport::dispatch(const TriggerEvent& event) {
  received_.push_back(event);
  return Ack{event.seq, event.dispatched_ms + delay_(event)};
}

TcpSink::TcpSink(const std::string& host, std::uint16_t port, bool expect_ack) : expect_ack_(expect_ack) {
  addrinfo hints{};
  hints.ai_family = AF_UNSPEC;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* res = nullptr;
  if (getaddrinfo(host.c_str(), std::to_string(port).c_str(), &hints, &res) != 0 || res == nullptr) {
    throw TransportError("cannot resolve " + host);
  }
  for (addrinfo* p = res; p != nullptr; p = p->ai_next) {
    fd_ = ::socket(p->ai_family, p->ai_socktype, p->ai_protocol);
    if (fd_ < 0) continue;
    if (::connect(fd_, p->ai_addr, p->ai_addrlen) == 0) break;
    ::close(fd_);
    fd_ = -1;
  }
  freeaddrinfo(res);
  if (fd_ < 0) throw TransportError("cannot connect to " + host + ":" + std::to_string(port));
}

TcpSink::~TcpSink() {
  if (fd_ >= 0) ::close(fd_);
}

std::optional<Ack> TcpSink::dispatch(const TriggerEvent& event) {
  const std::string line = format_trigger(event) + "\n";
  std::size_t sent = 0;
  while (sent < line.size()) {
    const auto n = ::send(fd_, line.data() + sent, line.size() - sent, MSG_NOSIGNAL);
    if (n <= 0) throw TransportError("send failed at trigger " + std::to_string(event.seq));
    sent += static_cast<std::size_t>(n);
  }
  if (!expect_ack_) return std::nullopt;
  while (buffer_.find('\n') == std::string::npos) {
    char chunk[256];
    const auto n = ::recv(fd_, chunk, sizeof(chunk), 0);
    if (n <= 0) throw TransportError("connection closed awaiting ACK " + std::to_string(event.seq));
    buffer_.append(chunk, static_cast<std::size_t>(n));
  }
  const auto pos = buffer_.find('\n');
  const std::string ack_line(text::trim(std::string_view(buffer_).substr(0, pos)));
  buffer_.erase(0, pos + 1);
  const auto f = text::split(ack_line, ' ');
  unsigned long long seq = 0;
  double recv = 0.0;
  if (f.size() != 3 || f[0] != "ACK" || !text::parse_uint(f[1], seq) || !text::parse_double(f[2], recv)) {
    throw TransportError("malformed ack '" + ack_line + "'");
  }
  if (seq != event.seq) throw TransportError("ack for " + std::to_string(seq) + " while awaiting " + std::to_string(event.seq));
  return Ack{seq, recv};
}

ScenarioRun run_scenario(const ScenarioScript& script, Clock& clock, TriggerSink& sink) {
  script.validate();
  ScenarioRun run;
  run.script = script.name;
  const double origin = clock.now_ms();
  std::uint64_t seq = 0;
  for (const auto& trig : script.triggers) {
    clock.wait_until(origin + trig.t_ms);
    TriggerEvent e;
    e.seq = ++seq;
    e.scheduled_ms = trig.t_ms;
    e.dispatched_ms = std::max(trig.t_ms, clock.now_ms() - origin);
    e.modality = trig.modality;
    std::optional<Ack> ack;
    try {
      ack = sink.dispatch(e);
    } catch (const TransportError& err) {
      throw TransportError(err.what(), std::move(run));
    }
    run.events.push_back(e);
    if (ack) run.acks.push_back(*ack);
  }
  clock.wait_until(origin + script.duration_ms);
  return run;
}

void write_event_log(std::ostream& out, const ScenarioRun& run) {
  out << kWozLogHeader << " script=" << run.script << '\n';
  std::map<std::uint64_t, const Ack*> acks;
  for (const auto& a : run.acks) acks[a.seq] = &a;
  for (const auto& e : run.events) {
    out << format_trigger(e) << '\n';
    if (auto it = acks.find(e.seq); it != acks.end()) out << format_ack(*it->second) << '\n';
  }
}

std::string event_log_text(const ScenarioRun& run) {
  std::ostringstream ss;
  write_event_log(ss, run);
  return ss.str();
}

EventLog parse_event_log(std::istream& in, double miss_threshold_ms) {
  EventLog log;
  std::map<std::uint64_t, std::size_t> trig_index;
  std::set<std::uint64_t> answered;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto body = text::trim(line);
    if (body.empty()) continue;
    if (body.front() == '#') {
      if (body.rfind("# reactkit-woz-log", 0) == 0 && body.rfind(kWozLogHeader, 0) != 0) {
        throw ParseError("unsupported log version: " + std::string(body), line_no);
      }
      continue;
    }
    const auto f = text::split(body, ' ');
    unsigned long long seq = 0;
    if (f.size() < 2 || !text::parse_uint(f[1], seq)) throw ParseError("bad message '" + std::string(body) + "'", line_no);
    if (f[0] == "TRIG") {
      TriggerEvent e;
      e.seq = seq;
      if (f.size() != 5 || !text::parse_double(f[3], e.scheduled_ms) || !text::parse_double(f[4], e.dispatched_ms)) {
        throw ParseError("expected 'TRIG <seq> <modality> <scheduled_ms> <dispatched_ms>'", line_no);
      }
      try {
        e.modality = modality_from_string(f[2]);
      } catch (const ConfigError&) {
        throw ParseError("unknown modality '" + std::string(f[2]) + "'", line_no);
      }
      if (trig_index.count(seq)) throw ParseError("duplicate trigger seq " + std::to_string(seq), line_no);
      trig_index[seq] = log.triggers.size();
      log.triggers.push_back(e);
    } else if (f[0] == "ACK") {
      Ack a;
      a.seq = seq;
      if (f.size() != 3 || !text::parse_double(f[2], a.recv_ms)) throw ParseError("expected 'ACK <seq> <recv_ms>'", line_no);
      log.acks.push_back(a);
    } else if (f[0] == "RESP") {
      Response r;
      r.seq = seq;
      r.line = line_no;
      if (f.size() != 3 || !text::parse_double(f[2], r.response_ms)) {
        throw ParseError("expected 'RESP <seq> <response_ms>'", line_no);
      }
      const auto it = trig_index.find(seq);
      if (it == trig_index.end() || answered.count(seq)) {
        log.orphans.push_back(r);
        continue;
      }
      const auto& trig = log.triggers[it->second];
      if (!(r.response_ms > trig.dispatched_ms)) {
        log.premature.push_back(r);
        continue;
      }
      answered.insert(seq);
      SrtEvent s;
      s.trigger_seq = seq;
      s.trigger_ms = trig.dispatched_ms;
      s.response_ms = r.response_ms;
      s.rt_ms = r.response_ms - trig.dispatched_ms;
      s.modality = trig.modality;
      s.miss = s.rt_ms > miss_threshold_ms;
      log.srt.push_back(s);
    } else {
      throw ParseError("unknown message type '" + std::string(f[0]) + "'", line_no);
    }
  }
  for (const auto& t : log.triggers) {
    if (!answered.count(t.seq)) log.unanswered.push_back(t.seq);
  }
  return log;
}

EventLog parse_event_log(const std::filesystem::path& path, double miss_threshold_ms) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open event log: " + path.string());
  return parse_event_log(in, miss_threshold_ms);
}

double percentile_nearest_rank(std::vector<double> values, double q) {
  if (values.empty()) return 0.0;
  std::sort(values.begin(), values.end());
  const auto rank = static_cast<std::size_t>(std::ceil(q / 100.0 * static_cast<double>(values.size())));
  return values[std::clamp<std::size_t>(rank, 1, values.size()) - 1];
}

LatencyReport latency_budget_check(const std::vector<TriggerEvent>& events, const std::vector<Ack>& acks,
                                   double budget_ms) {
  LatencyReport rep;
  rep.budget_ms = budget_ms;
  std::map<std::uint64_t, double> recv;
  for (const auto& a : acks) recv.emplace(a.seq, a.recv_ms);
  std::vector<double> lat;
  for (const auto& e : events) {
    const auto it = recv.find(e.seq);
    if (it == recv.end()) {
      rep.missing_acks.push_back(e.seq);
      continue;
    }
    LatencyEntry entry{e.seq, it->second - e.dispatched_ms, false};
    entry.pass = entry.latency_ms >= 0.0 && entry.latency_ms < budget_ms;
    lat.push_back(entry.latency_ms);
    rep.entries.push_back(entry);
  }
  rep.p99_ms = percentile_nearest_rank(lat, 99.0);
  rep.max_ms = lat.empty() ? 0.0 : *std::max_element(lat.begin(), lat.end());
  rep.all_pass = rep.missing_acks.empty() && !rep.entries.empty() &&
                 std::all_of(rep.entries.begin(), rep.entries.end(), [](const LatencyEntry& e) { return e.pass; });
  return rep;
}

JitterSummary jitter_summary(const std::vector<TriggerEvent>& events) {
  std::vector<double> j;
  j.reserve(events.size());
  for (const auto& e : events) j.push_back(e.jitter_ms());
  JitterSummary s;
  s.p50_ms = percentile_nearest_rank(j, 50.0);
  s.p99_ms = percentile_nearest_rank(j, 99.0);
  s.max_ms = j.empty() ? 0.0 : *std::max_element(j.begin(), j.end());
  return s;
}

}  // namespace reactkit
