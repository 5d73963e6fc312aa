#pragma once

// Reaction-time summaries and t-tests: per setting x modality means and SDs,
// Welch tests across settings and across modalities, Student paired tests for
// the vision-based metric against SRT baselines.

#include <array>
#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "reactkit/modality.hpp"

namespace reactkit {

enum class Setting { Baseline, AR, VR_WOT, VR_WT, VisionE };
enum class Method { SRT, Vision };

// Settings compared in the significance grids, in table order.
inline constexpr std::array<Setting, 4> kSrtSettings{Setting::Baseline, Setting::AR, Setting::VR_WOT, Setting::VR_WT};

std::string to_string(Setting s);   // "Baseline", "AR", "VR-WOT", "VR-WT", "VisionE"
std::string to_string(Method m);    // "SRT", "Vision"
Setting setting_from_string(std::string_view s);  // also accepts VR_WOT / VR_WT
Method method_from_string(std::string_view s);

struct ReactionRecord {
  std::string participant;
  Setting setting = Setting::Baseline;
  Modality modality = Modality::V;
  Method method = Method::SRT;
  double rt_ms = 0.0;

  bool operator==(const ReactionRecord&) const = default;
};

// Throws InvalidRecord unless rt_ms > 0 and VisionE records are Vision/HAV.
void validate(const ReactionRecord& r);

std::vector<ReactionRecord> read_records_csv(std::istream& in);
std::vector<ReactionRecord> read_records_csv(const std::filesystem::path& path);
void write_records_csv(std::ostream& out, const std::vector<ReactionRecord>& records);

std::vector<double> select_rt(const std::vector<ReactionRecord>& records, Setting setting, Modality modality,
                              std::optional<Method> method = std::nullopt);

struct SampleSummary {
  std::size_t n = 0;
  double mean_ms = 0.0;
  std::optional<double> sd_ms;  // sample SD (n - 1); absent when n < 2
};

SampleSummary summarize(std::span<const double> values);

enum class TTestVariant { welch, student, student_paired };

std::string to_string(TTestVariant v);

struct TTestResult {
  double t = 0.0;
  double df = 0.0;
  double p = 1.0;  // two-sided
  bool paired = false;
  TTestVariant variant = TTestVariant::welch;
  std::size_t n_a = 0;
  std::size_t n_b = 0;
};

// Regularized incomplete beta I_x(a, b).
double incomplete_beta(double a, double b, double x);
// Two-sided tail probability P(|T| >= |t|) for Student's t with df degrees of freedom.
double student_t_two_sided_p(double t, double df);
double student_t_cdf(double t, double df);

// Welch statistic with Welch-Satterthwaite df. Throws DegenerateSample when
// either sample has fewer than 2 values, or a variance is zero and the means are equal.
TTestResult welch_ttest(std::span<const double> a, std::span<const double> b);
// Pooled-variance Student test, kept for sensitivity checks.
TTestResult student_ttest(std::span<const double> a, std::span<const double> b);
TTestResult unpaired_ttest(std::span<const double> a, std::span<const double> b, TTestVariant variant);

// Paired test on a[i] - b[i]; df = n - 1. All-zero differences give t = 0, p = 1.
TTestResult paired_ttest(std::span<const double> a, std::span<const double> b);

struct ParticipantValue {
  std::string participant;
  double value = 0.0;
};

// Pairs by participant label; throws PairingError unless both sides carry the same set.
TTestResult paired_ttest(const std::vector<ParticipantValue>& a, const std::vector<ParticipantValue>& b);

struct SettingComparison {
  Modality modality;
  Setting row;  // sample a
  Setting col;  // sample b
  TTestResult result;
};

struct ModalityComparison {
  Setting setting;
  Modality row;
  Modality col;
  TTestResult result;
};

struct SignificanceGrid {
  std::vector<SettingComparison> across_settings;     // 4 modalities x 6 setting pairs
  std::vector<ModalityComparison> across_modalities;  // 4 settings x 6 modality pairs

  const TTestResult& setting_test(Modality m, Setting a, Setting b) const;
  const TTestResult& modality_test(Setting s, Modality a, Modality b) const;
};

// SRT records only. Throws MissingCell naming every (setting, modality) with fewer than 2 records.
SignificanceGrid significance_grid(const std::vector<ReactionRecord>& records,
                                   TTestVariant variant = TTestVariant::welch);

struct PairedReportRow {
  std::string label;
  std::size_t n = 0;
  SampleSummary a;
  SampleSummary b;
  TTestResult test;
};

// Vision-based (VisionE) records against each participant's mean VR-WT HAV SRT,
// per warning, plus first vs second warning. The k-th VisionE record of a
// participant belongs to warning k. Throws PairingError for vision
// participants without a baseline.
std::vector<PairedReportRow> vision_paired_report(const std::vector<ReactionRecord>& records);

void write_summary_csv(std::ostream& out, const std::vector<ReactionRecord>& records);
void write_setting_grid_csv(std::ostream& out, const SignificanceGrid& grid);
void write_modality_grid_csv(std::ostream& out, const SignificanceGrid& grid);
void write_ttests_csv(std::ostream& out, const SignificanceGrid& grid);
void write_paired_csv(std::ostream& out, const std::vector<PairedReportRow>& rows);

}  // namespace reactkit
