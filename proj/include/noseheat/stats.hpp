#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "noseheat/metrics.hpp"

namespace noseheat {

// Regularized incomplete beta I_x(a, b), continued-fraction evaluation.
double incomplete_beta(double a, double b, double x);

// P(F > f) for an F(d1, d2) variate.
double f_upper_tail(double f, double d1, double d2);

// P(|T| > |t|) for a Student-t variate with df degrees of freedom.
double t_two_sided(double t, double df);

double pearson(std::span<const double> x, std::span<const double> y);

struct AnovaResult {
  double F = 0.0;
  int df_effect = 0;
  int df_error = 0;
  double p = 1.0;
  double partial_eta_sq = 0.0;
  double ss_effect = 0.0;
  double ss_subjects = 0.0;
  double ss_error = 0.0;
};

// One-way repeated-measures ANOVA. table[i][j] is participant i under
// condition j. No sphericity correction is applied.
AnovaResult rm_anova(const std::vector<std::vector<double>>& table);

struct TTestResult {
  double t = 0.0;
  int df = 0;
  double p = 1.0;
};

// Two-sided paired t-test on x - y.
TTestResult paired_t(std::span<const double> x, std::span<const double> y);

// min(1, p * m) per entry.
std::vector<double> bonferroni(std::span<const double> p_values, std::size_t m);

struct Summary {
  std::size_t n = 0;
  double mean = 0.0;
  double sd = 0.0;
  double median = 0.0;
  double min = 0.0;
  double max = 0.0;
};

Summary describe(std::span<const double> values);

inline constexpr double kVasMin = 0.0;
inline constexpr double kVasMax = 10.0;

struct SessionRecord {
  std::string participant_id;
  std::string session_label;
  MetricSet metrics;
  std::optional<double> self_report;
};

struct PosthocRow {
  std::string session_a;
  std::string session_b;
  std::optional<TTestResult> test;  // empty when the differences have no variance
  double p_adjusted = 1.0;
};

struct CompareRow {
  std::string metric;
  std::optional<AnovaResult> anova;  // empty when the error variance vanishes
  std::string stars;
  std::vector<PosthocRow> posthoc;
  std::vector<Summary> per_session;
};

struct CompareReport {
  std::vector<std::string> participants;
  std::vector<std::string> sessions;
  std::vector<CompareRow> rows;
};

// "***" p < .001, "**" p < .01, "*" p < .05, "+" p < .10, else "".
std::string significance_stars(double p);

// Builds the per-metric ANOVA table with Bonferroni-adjusted pairwise paired
// t-tests. Sessions appear in first-seen order unless session_order is given.
// A "VAS" row is appended when every record carries a self-report.
// Throws IncompleteTable unless every participant has exactly one record per
// session, with at least 2 participants and 2 sessions.
CompareReport compare_sessions(const std::vector<SessionRecord>& records,
                               std::vector<std::string> session_order = {});

}  // namespace noseheat
