#include "reactkit/stats.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <limits>
#include <map>
#include <numeric>
#include <ostream>
#include <set>
#include <tuple>

#include "reactkit/errors.hpp"
#include "reactkit/text.hpp"

namespace reactkit {

std::string to_string(Setting s) {
  switch (s) {
    case Setting::Baseline: return "Baseline";
    case Setting::AR: return "AR";
    case Setting::VR_WOT: return "VR-WOT";
    case Setting::VR_WT: return "VR-WT";
    case Setting::VisionE: return "VisionE";
  }
  return "?";
}

std::string to_string(Method m) { return m == Method::SRT ? "SRT" : "Vision"; }

Setting setting_from_string(std::string_view s) {
  if (s == "Baseline") return Setting::Baseline;
  if (s == "AR") return Setting::AR;
  if (s == "VR-WOT" || s == "VR_WOT") return Setting::VR_WOT;
  if (s == "VR-WT" || s == "VR_WT") return Setting::VR_WT;
  if (s == "VisionE") return Setting::VisionE;
  throw ConfigError("unknown setting '" + std::string(s) + "'");
}

Method method_from_string(std::string_view s) {
  if (s == "SRT") return Method::SRT;
  if (s == "Vision") return Method::Vision;
  throw ConfigError("unknown method '" + std::string(s) + "'");
}

std::string to_string(TTestVariant v) {
  switch (v) {
    case TTestVariant::welch: return "welch";
    case TTestVariant::student: return "student";
    case TTestVariant::student_paired: return "student_paired";
  }
  return "?";
}

void validate(const ReactionRecord& r) {
  if (!(r.rt_ms > 0.0) || !std::isfinite(r.rt_ms)) {
    throw InvalidRecord("participant " + r.participant + ": rt_ms must be positive");
  }
  if (r.setting == Setting::VisionE && (r.method != Method::Vision || r.modality != Modality::HAV)) {
    throw InvalidRecord("participant " + r.participant + ": VisionE records must be Vision / HAV");
  }
}

std::vector<ReactionRecord> read_records_csv(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(in, line)) throw EmptyStream("records CSV is empty");
  ++line_no;
  if (text::trim(line) != "participant,setting,modality,method,rt_ms") {
    throw ParseError("expected header 'participant,setting,modality,method,rt_ms'", line_no);
  }
  std::vector<ReactionRecord> out;
  while (std::getline(in, line)) {
    ++line_no;
    if (text::trim(line).empty()) continue;
    const auto f = text::split(text::trim(line), ',');
    if (f.size() != 5) throw ParseError("expected 5 fields", line_no);
    ReactionRecord r;
    r.participant = std::string(text::trim(f[0]));
    try {
      r.setting = setting_from_string(text::trim(f[1]));
      r.modality = modality_from_string(text::trim(f[2]));
      r.method = method_from_string(text::trim(f[3]));
    } catch (const ConfigError& e) {
      throw ParseError(e.what(), line_no);
    }
    if (!text::parse_double(f[4], r.rt_ms)) throw ParseError("bad rt_ms", line_no);
    try {
      validate(r);
    } catch (const InvalidRecord& e) {
      throw ParseError(e.what(), line_no);
    }
    out.push_back(std::move(r));
  }
  if (out.empty()) throw EmptyStream("records CSV holds no records");
  return out;
}

std::vector<ReactionRecord> read_records_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open records file: " + path.string());
  return read_records_csv(in);
}

void write_records_csv(std::ostream& out, const std::vector<ReactionRecord>& records) {
  out << "participant,setting,modality,method,rt_ms\n";
  for (const auto& r : records) {
    out << r.participant << ',' << to_string(r.setting) << ',' << to_string(r.modality) << ',' << to_string(r.method)
        << ',' << text::format_double(r.rt_ms) << '\n';
  }
}

std::vector<double> select_rt(const std::vector<ReactionRecord>& records, Setting setting, Modality modality,
                              std::optional<Method> method) {
  std::vector<double> out;
  for (const auto& r : records) {
    if (r.setting == setting && r.modality == modality && (!method || r.method == *method)) out.push_back(r.rt_ms);
  }
  return out;
}

namespace {

double mean_of(std::span<const double> v) { return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size()); }

// Sample variance, two-pass.
double variance_of(std::span<const double> v, double mean) {
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return ss / static_cast<double>(v.size() - 1);
}

// Continued fraction for I_x(a, b) (modified Lentz), valid for x < (a + 1) / (a + b + 2).
double beta_continued_fraction(double a, double b, double x) {
  constexpr double tiny = 1e-300;
  constexpr double eps = 1e-16;
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < tiny) d = tiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= 100000; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < tiny) d = tiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < tiny) d = tiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < eps) return h;
  }
  return h;
}

// I_x(a, b) given both x and 1 - x, so callers can pass an exact complement.
double incomplete_beta_split(double a, double b, double x, double one_minus_x) {
  if (x <= 0.0) return 0.0;
  if (one_minus_x <= 0.0) return 1.0;
  const double log_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) +
                           b * std::log(one_minus_x);
  const double front = std::exp(log_front);
  if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_continued_fraction(a, b, x) / a;
  return 1.0 - front * beta_continued_fraction(b, a, one_minus_x) / b;
}

TTestResult finish(double t, double df, TTestVariant variant, std::size_t na, std::size_t nb) {
  TTestResult r;
  r.t = t;
  r.df = df;
  r.p = student_t_two_sided_p(t, df);
  r.variant = variant;
  r.paired = variant == TTestVariant::student_paired;
  r.n_a = na;
  r.n_b = nb;
  return r;
}

void require_two(std::span<const double> a, std::span<const double> b) {
  if (a.size() < 2 || b.size() < 2) {
    throw DegenerateSample("t-test needs at least 2 values per sample (got " + std::to_string(a.size()) + " and " +
                           std::to_string(b.size()) + ")");
  }
}

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

constexpr std::array<std::pair<int, int>, 6> kLowerTriangle{{{1, 0}, {2, 0}, {2, 1}, {3, 0}, {3, 1}, {3, 2}}};

}  // namespace

SampleSummary summarize(std::span<const double> values) {
  SampleSummary s;
  s.n = values.size();
  if (values.empty()) return s;
  s.mean_ms = mean_of(values);
  if (values.size() >= 2) s.sd_ms = std::sqrt(variance_of(values, s.mean_ms));
  return s;
}

double incomplete_beta(double a, double b, double x) {
  if (!(a > 0.0) || !(b > 0.0)) throw BadParams("incomplete beta needs a, b > 0");
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  return incomplete_beta_split(a, b, x, 1.0 - x);
}

double student_t_two_sided_p(double t, double df) {
  if (std::isnan(t) || !(df > 0.0)) return std::numeric_limits<double>::quiet_NaN();
  if (std::isinf(t)) return 0.0;
  const double t2 = t * t;
  // P(|T| >= |t|) = I_{df / (df + t^2)}(df / 2, 1 / 2)
  const double x = df / (df + t2);
  const double one_minus_x = t2 / (df + t2);
  return std::clamp(incomplete_beta_split(df / 2.0, 0.5, x, one_minus_x), 0.0, 1.0);
}

double student_t_cdf(double t, double df) {
  const double tail = 0.5 * student_t_two_sided_p(t, df);
  return t >= 0.0 ? 1.0 - tail : tail;
}

TTestResult welch_ttest(std::span<const double> a, std::span<const double> b) {
  require_two(a, b);
  const double ma = mean_of(a);
  const double mb = mean_of(b);
  const double va = variance_of(a, ma);
  const double vb = variance_of(b, mb);
  if ((va == 0.0 || vb == 0.0) && ma == mb) {
    throw DegenerateSample("zero variance with equal means; t is undefined");
  }
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  const double qa = va / na;
  const double qb = vb / nb;
  const double se2 = qa + qb;
  if (se2 == 0.0) {
    return finish(ma > mb ? std::numeric_limits<double>::infinity() : -std::numeric_limits<double>::infinity(),
                  na + nb - 2.0, TTestVariant::welch, a.size(), b.size());
  }
  const double t = (ma - mb) / std::sqrt(se2);
  const double df = se2 * se2 / (qa * qa / (na - 1.0) + qb * qb / (nb - 1.0));
  return finish(t, df, TTestVariant::welch, a.size(), b.size());
}

TTestResult student_ttest(std::span<const double> a, std::span<const double> b) {
  require_two(a, b);
  const double ma = mean_of(a);
  const double mb = mean_of(b);
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  const double df = na + nb - 2.0;
  const double pooled = ((na - 1.0) * variance_of(a, ma) + (nb - 1.0) * variance_of(b, mb)) / df;
  if (pooled == 0.0) {
    if (ma == mb) throw DegenerateSample("zero variance with equal means; t is undefined");
    return finish(ma > mb ? std::numeric_limits<double>::infinity() : -std::numeric_limits<double>::infinity(), df,
                  TTestVariant::student, a.size(), b.size());
  }
  const double t = (ma - mb) / std::sqrt(pooled * (1.0 / na + 1.0 / nb));
  return finish(t, df, TTestVariant::student, a.size(), b.size());
}

TTestResult unpaired_ttest(std::span<const double> a, std::span<const double> b, TTestVariant variant) {
  return variant == TTestVariant::student ? student_ttest(a, b) : welch_ttest(a, b);
}

TTestResult paired_ttest(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw PairingError("paired samples differ in length (" + std::to_string(a.size()) + " vs " +
                       std::to_string(b.size()) + ")");
  }
  if (a.size() < 2) throw DegenerateSample("paired t-test needs at least 2 pairs");
  std::vector<double> d(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) d[i] = a[i] - b[i];
  const double n = static_cast<double>(d.size());
  const double md = mean_of(d);
  const double vd = variance_of(d, md);
  double t = 0.0;
  if (vd == 0.0) {
    if (md != 0.0) t = md > 0 ? std::numeric_limits<double>::infinity() : -std::numeric_limits<double>::infinity();
  } else {
    t = md / std::sqrt(vd / n);
  }
  return finish(t, n - 1.0, TTestVariant::student_paired, a.size(), b.size());
}

TTestResult paired_ttest(const std::vector<ParticipantValue>& a, const std::vector<ParticipantValue>& b) {
  std::map<std::string, double> bm;
  for (const auto& pv : b) {
    if (!bm.emplace(pv.participant, pv.value).second) throw PairingError("participant " + pv.participant + " repeated");
  }
  std::set<std::string> seen;
  std::vector<double> xa, xb;
  std::string missing;
  for (const auto& pv : a) {
    if (!seen.insert(pv.participant).second) throw PairingError("participant " + pv.participant + " repeated");
    const auto it = bm.find(pv.participant);
    if (it == bm.end()) {
      missing += (missing.empty() ? "" : ", ") + pv.participant;
      continue;
    }
    xa.push_back(pv.value);
    xb.push_back(it->second);
  }
  for (const auto& [p, v] : bm) {
    if (!seen.count(p)) missing += (missing.empty() ? "" : ", ") + p;
  }
  if (!missing.empty()) throw PairingError("unpaired participants: " + missing);
  return paired_ttest(xa, xb);
}

const TTestResult& SignificanceGrid::setting_test(Modality m, Setting a, Setting b) const {
  for (const auto& c : across_settings) {
    if (c.modality == m && ((c.row == a && c.col == b) || (c.row == b && c.col == a))) return c.result;
  }
  throw MissingCell("no comparison " + to_string(a) + " vs " + to_string(b) + " for " + to_string(m));
}

const TTestResult& SignificanceGrid::modality_test(Setting s, Modality a, Modality b) const {
  for (const auto& c : across_modalities) {
    if (c.setting == s && ((c.row == a && c.col == b) || (c.row == b && c.col == a))) return c.result;
  }
  throw MissingCell("no comparison " + to_string(a) + " vs " + to_string(b) + " in " + to_string(s));
}

SignificanceGrid significance_grid(const std::vector<ReactionRecord>& records, TTestVariant variant) {
  std::map<std::pair<Setting, Modality>, std::vector<double>> cells;
  for (const auto& r : records) {
    if (r.method == Method::SRT && r.setting != Setting::VisionE) cells[{r.setting, r.modality}].push_back(r.rt_ms);
  }
  std::string missing;
  for (Setting s : kSrtSettings) {
    for (Modality m : kAllModalities) {
      const auto it = cells.find({s, m});
      if (it == cells.end() || it->second.size() < 2) {
        missing += (missing.empty() ? "" : ", ") + std::string("(") + to_string(s) + ", " + to_string(m) + ")";
      }
    }
  }
  if (!missing.empty()) throw MissingCell("missing setting x modality cells: " + missing);

  SignificanceGrid g;
  for (Modality m : kAllModalities) {
    for (auto [r, c] : kLowerTriangle) {
      const auto& a = cells[{kSrtSettings[r], m}];
      const auto& b = cells[{kSrtSettings[c], m}];
      g.across_settings.push_back({m, kSrtSettings[r], kSrtSettings[c], unpaired_ttest(a, b, variant)});
    }
  }
  for (Setting s : kSrtSettings) {
    for (auto [r, c] : kLowerTriangle) {
      const auto& a = cells[{s, kAllModalities[r]}];
      const auto& b = cells[{s, kAllModalities[c]}];
      g.across_modalities.push_back({s, kAllModalities[r], kAllModalities[c], unpaired_ttest(a, b, variant)});
    }
  }
  return g;
}

std::vector<PairedReportRow> vision_paired_report(const std::vector<ReactionRecord>& records) {
  std::map<std::string, std::vector<double>> baseline;
  std::vector<std::string> order;
  std::map<std::string, std::vector<double>> vision;
  for (const auto& r : records) {
    if (r.method == Method::SRT && r.setting == Setting::VR_WT && r.modality == Modality::HAV) {
      baseline[r.participant].push_back(r.rt_ms);
    } else if (r.setting == Setting::VisionE) {
      if (!vision.count(r.participant)) order.push_back(r.participant);
      vision[r.participant].push_back(r.rt_ms);
    }
  }
  std::vector<PairedReportRow> rows;
  if (order.empty()) return rows;
  std::string missing;
  for (const auto& p : order) {
    if (!baseline.count(p)) missing += (missing.empty() ? "" : ", ") + p;
  }
  if (!missing.empty()) throw PairingError("vision participants without a VR-WT HAV baseline: " + missing);

  std::size_t warnings = 0;
  for (const auto& [p, v] : vision) warnings = std::max(warnings, v.size());

  auto make_row = [](std::string label, const std::vector<double>& a, const std::vector<double>& b) {
    PairedReportRow row;
    row.label = std::move(label);
    row.n = a.size();
    row.a = summarize(a);
    row.b = summarize(b);
    row.test = paired_ttest(a, b);
    return row;
  };

  for (std::size_t w = 0; w < warnings; ++w) {
    std::vector<double> a, b;
    for (const auto& p : order) {
      const auto& v = vision[p];
      if (w >= v.size()) continue;
      a.push_back(v[w]);
      b.push_back(summarize(baseline[p]).mean_ms);
    }
    if (a.size() >= 2) {
      rows.push_back(make_row("vision_w" + std::to_string(w + 1) + " vs VR-WT HAV", a, b));
    }
  }
  if (warnings >= 2) {
    std::vector<double> a, b;
    for (const auto& p : order) {
      const auto& v = vision[p];
      if (v.size() < 2) continue;
      a.push_back(v[0]);
      b.push_back(v[1]);
    }
    if (a.size() >= 2) rows.push_back(make_row("vision_w1 vs vision_w2", a, b));
  }
  return rows;
}

void write_summary_csv(std::ostream& out, const std::vector<ReactionRecord>& records) {
  std::map<std::tuple<Setting, Modality, Method>, std::vector<double>> cells;
  for (const auto& r : records) cells[{r.setting, r.modality, r.method}].push_back(r.rt_ms);
  out << "setting,modality,method,n,mean_ms,sd_ms\n";
  for (const auto& [key, values] : cells) {
    const auto s = summarize(values);
    out << to_string(std::get<0>(key)) << ',' << to_string(std::get<1>(key)) << ',' << to_string(std::get<2>(key))
        << ',' << s.n << ',' << fixed(s.mean_ms, 3) << ',' << (s.sd_ms ? fixed(*s.sd_ms, 3) : "") << '\n';
  }
}

void write_setting_grid_csv(std::ostream& out, const SignificanceGrid& grid) {
  out << "modality,setting";
  for (int c = 0; c < 3; ++c) out << ',' << to_string(kSrtSettings[static_cast<std::size_t>(c)]);
  out << '\n';
  for (Modality m : kAllModalities) {
    for (std::size_t r = 1; r < kSrtSettings.size(); ++r) {
      out << to_string(m) << ',' << to_string(kSrtSettings[r]);
      for (std::size_t c = 0; c < 3; ++c) {
        out << ',';
        if (c < r) out << fixed(grid.setting_test(m, kSrtSettings[r], kSrtSettings[c]).p, 3);
      }
      out << '\n';
    }
  }
}

void write_modality_grid_csv(std::ostream& out, const SignificanceGrid& grid) {
  out << "setting,modality";
  for (int c = 0; c < 3; ++c) out << ',' << to_string(kAllModalities[static_cast<std::size_t>(c)]);
  out << '\n';
  for (Setting s : kSrtSettings) {
    for (std::size_t r = 1; r < kAllModalities.size(); ++r) {
      out << to_string(s) << ',' << to_string(kAllModalities[r]);
      for (std::size_t c = 0; c < 3; ++c) {
        out << ',';
        if (c < r) out << fixed(grid.modality_test(s, kAllModalities[r], kAllModalities[c]).p, 3);
      }
      out << '\n';
    }
  }
}

void write_ttests_csv(std::ostream& out, const SignificanceGrid& grid) {
  out << "grid,group,a,b,n_a,n_b,variant,t,df,p\n";
  auto row = [&](const char* name, const std::string& group, const std::string& a, const std::string& b,
                 const TTestResult& r) {
    out << name << ',' << group << ',' << a << ',' << b << ',' << r.n_a << ',' << r.n_b << ',' << to_string(r.variant)
        << ',' << text::format_double(r.t) << ',' << text::format_double(r.df) << ',' << text::format_double(r.p)
        << '\n';
  };
  for (const auto& c : grid.across_settings) {
    row("settings", to_string(c.modality), to_string(c.row), to_string(c.col), c.result);
  }
  for (const auto& c : grid.across_modalities) {
    row("modalities", to_string(c.setting), to_string(c.row), to_string(c.col), c.result);
  }
}

void write_paired_csv(std::ostream& out, const std::vector<PairedReportRow>& rows) {
  out << "comparison,n,mean_a_ms,sd_a_ms,mean_b_ms,sd_b_ms,t,df,p\n";
  for (const auto& r : rows) {
    out << r.label << ',' << r.n << ',' << fixed(r.a.mean_ms, 3) << ',' << (r.a.sd_ms ? fixed(*r.a.sd_ms, 3) : "")
        << ',' << fixed(r.b.mean_ms, 3) << ',' << (r.b.sd_ms ? fixed(*r.b.sd_ms, 3) : "") << ','
        << text::format_double(r.test.t) << ',' << text::format_double(r.test.df) << ','
        << text::format_double(r.test.p) << '\n';
  }
}

}  // namespace reactkit
