#include "noseheat/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

#include "noseheat/error.hpp"

namespace noseheat {

namespace {

// Modified Lentz evaluation of the incomplete beta continued fraction.
double beta_continued_fraction(double a, double b, double x) {
  constexpr int kMaxIter = 20000;
  constexpr double kEps = 1e-16;
  constexpr double kTiny = 1e-300;
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < kEps) break;
  }
  return h;
}

void require_same_length(std::span<const double> x, std::span<const double> y, std::size_t min_n) {
  if (x.size() != y.size())
    fail(ErrorCode::LengthMismatch, "series lengths differ (" + std::to_string(x.size()) + " vs " +
                                        std::to_string(y.size()) + ")");
  if (x.size() < min_n)
    fail(ErrorCode::TooShort, "need at least " + std::to_string(min_n) + " paired values");
}

}  // namespace

double incomplete_beta(double a, double b, double x) {
  if (!(a > 0.0) || !(b > 0.0) || std::isnan(x))
    fail(ErrorCode::InvalidArgument, "incomplete beta needs a, b > 0");
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double log_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                           a * std::log(x) + b * std::log1p(-x);
  const double front = std::exp(log_front);
  if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_continued_fraction(a, b, x) / a;
  return 1.0 - front * beta_continued_fraction(b, a, 1.0 - x) / b;
}

double f_upper_tail(double f, double d1, double d2) {
  if (!(f > 0.0)) return 1.0;
  if (std::isinf(f)) return 0.0;
  return incomplete_beta(d2 / 2.0, d1 / 2.0, d2 / (d2 + d1 * f));
}

double t_two_sided(double t, double df) {
  if (std::isinf(t)) return 0.0;
  return incomplete_beta(df / 2.0, 0.5, df / (df + t * t));
}

double pearson(std::span<const double> x, std::span<const double> y) {
  require_same_length(x, y, 3);
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxx = 0.0;
  double syy = 0.0;
  double sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxx += dx * dx;
    syy += dy * dy;
    sxy += dx * dy;
  }
  if (!(sxx > 0.0) || !(syy > 0.0)) fail(ErrorCode::ConstantSeries, "series has zero variance");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

AnovaResult rm_anova(const std::vector<std::vector<double>>& table) {
  const std::size_t n = table.size();
  if (n < 2) fail(ErrorCode::IncompleteTable, "repeated-measures ANOVA needs >= 2 participants");
  const std::size_t k = table.front().size();
  if (k < 2) fail(ErrorCode::IncompleteTable, "repeated-measures ANOVA needs >= 2 conditions");
  for (const auto& row : table) {
    if (row.size() != k) fail(ErrorCode::IncompleteTable, "participants have unequal conditions");
    for (double v : row)
      if (!std::isfinite(v)) fail(ErrorCode::IncompleteTable, "table holds a non-finite value");
  }

  std::vector<double> subj_mean(n, 0.0);
  std::vector<double> cond_mean(k, 0.0);
  double grand = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < k; ++j) {
      subj_mean[i] += table[i][j];
      cond_mean[j] += table[i][j];
      grand += table[i][j];
    }
  }
  for (auto& v : subj_mean) v /= static_cast<double>(k);
  for (auto& v : cond_mean) v /= static_cast<double>(n);
  grand /= static_cast<double>(n * k);

  AnovaResult r;
  double ss_total = 0.0;
  for (std::size_t j = 0; j < k; ++j) r.ss_effect += (cond_mean[j] - grand) * (cond_mean[j] - grand);
  r.ss_effect *= static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) r.ss_subjects += (subj_mean[i] - grand) * (subj_mean[i] - grand);
  r.ss_subjects *= static_cast<double>(k);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < k; ++j) {
      const double resid = table[i][j] - subj_mean[i] - cond_mean[j] + grand;
      r.ss_error += resid * resid;
      ss_total += (table[i][j] - grand) * (table[i][j] - grand);
    }
  }

  r.df_effect = static_cast<int>(k - 1);
  r.df_error = static_cast<int>((k - 1) * (n - 1));
  if (!(r.ss_error > 1e-14 * ss_total) || ss_total == 0.0)
    fail(ErrorCode::DegenerateVariance, "error mean square is zero");

  const double ms_effect = r.ss_effect / r.df_effect;
  const double ms_error = r.ss_error / r.df_error;
  r.F = ms_effect / ms_error;
  r.p = f_upper_tail(r.F, r.df_effect, r.df_error);
  r.partial_eta_sq = r.ss_effect / (r.ss_effect + r.ss_error);
  return r;
}

TTestResult paired_t(std::span<const double> x, std::span<const double> y) {
  require_same_length(x, y, 2);
  const std::size_t n = x.size();
  std::vector<double> d(n);
  for (std::size_t i = 0; i < n; ++i) d[i] = x[i] - y[i];
  const double ref = d.front();
  double mean_dev = 0.0;
  for (double v : d) mean_dev += v - ref;
  mean_dev /= static_cast<double>(n);
  double ss = 0.0;
  for (double v : d) ss += (v - ref - mean_dev) * (v - ref - mean_dev);
  const double mean = ref + mean_dev;
  const double sd = std::sqrt(ss / static_cast<double>(n - 1));
  if (!(sd > 1e-15 * std::fabs(mean)) || sd == 0.0)
    fail(ErrorCode::ZeroVariance, "paired differences have zero variance");

  TTestResult r;
  r.df = static_cast<int>(n - 1);
  r.t = mean / (sd / std::sqrt(static_cast<double>(n)));
  r.p = t_two_sided(r.t, r.df);
  return r;
}

std::vector<double> bonferroni(std::span<const double> p_values, std::size_t m) {
  if (m < p_values.size())
    fail(ErrorCode::InvalidArgument, "comparison count is smaller than the number of p-values");
  std::vector<double> out;
  out.reserve(p_values.size());
  for (double p : p_values) {
    if (!(p >= 0.0 && p <= 1.0)) fail(ErrorCode::InvalidArgument, "p-value outside [0, 1]");
    out.push_back(std::min(1.0, p * static_cast<double>(m)));
  }
  return out;
}

Summary describe(std::span<const double> values) {
  if (values.empty()) fail(ErrorCode::TooShort, "describe needs at least one value");
  Summary s;
  s.n = values.size();
  std::vector<double> v(values.begin(), values.end());
  std::sort(v.begin(), v.end());
  s.min = v.front();
  s.max = v.back();
  s.median = v.size() % 2 ? v[v.size() / 2] : 0.5 * (v[v.size() / 2 - 1] + v[v.size() / 2]);
  s.mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(s.n);
  if (s.n > 1) {
    double ss = 0.0;
    for (double x : v) ss += (x - s.mean) * (x - s.mean);
    s.sd = std::sqrt(ss / static_cast<double>(s.n - 1));
  }
  return s;
}

std::string significance_stars(double p) {
  if (p < 0.001) return "***";
  if (p < 0.01) return "**";
  if (p < 0.05) return "*";
  if (p < 0.10) return "+";
  return "";
}

namespace {

CompareRow compare_one(const std::string& name, const std::vector<std::vector<double>>& table,
                       const std::vector<std::string>& sessions) {
  CompareRow row;
  row.metric = name;
  try {
    row.anova = rm_anova(table);
    row.stars = significance_stars(row.anova->p);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::DegenerateVariance) throw;
  }

  const std::size_t k = sessions.size();
  const std::size_t pairs = k * (k - 1) / 2;
  for (std::size_t a = 0; a < k; ++a) {
    std::vector<double> col_a;
    for (const auto& r : table) col_a.push_back(r[a]);
    row.per_session.push_back(describe(col_a));
    for (std::size_t b = a + 1; b < k; ++b) {
      std::vector<double> col_b;
      for (const auto& r : table) col_b.push_back(r[b]);
      PosthocRow ph{sessions[a], sessions[b], std::nullopt, 1.0};
      try {
        ph.test = paired_t(col_a, col_b);
        const double p = ph.test->p;
        ph.p_adjusted = bonferroni(std::span(&p, 1), pairs).front();
      } catch (const Error& e) {
        if (e.code() != ErrorCode::ZeroVariance) throw;
      }
      row.posthoc.push_back(std::move(ph));
    }
  }
  return row;
}

}  // namespace

CompareReport compare_sessions(const std::vector<SessionRecord>& records,
                               std::vector<std::string> session_order) {
  CompareReport report;
  std::map<std::string, std::size_t> p_index;
  for (const auto& r : records) {
    if (r.self_report && !(*r.self_report >= kVasMin && *r.self_report <= kVasMax))
      fail(ErrorCode::InvalidArgument, "self-report outside [0, 10] for " + r.participant_id);
    if (!p_index.count(r.participant_id)) {
      p_index[r.participant_id] = report.participants.size();
      report.participants.push_back(r.participant_id);
    }
  }
  if (session_order.empty()) {
    for (const auto& r : records)
      if (std::find(session_order.begin(), session_order.end(), r.session_label) == session_order.end())
        session_order.push_back(r.session_label);
  }
  report.sessions = session_order;
  const std::size_t n = report.participants.size();
  const std::size_t k = report.sessions.size();
  if (n < 2) fail(ErrorCode::IncompleteTable, "need at least 2 participants, got " + std::to_string(n));
  if (k < 2) fail(ErrorCode::IncompleteTable, "need at least 2 sessions, got " + std::to_string(k));

  std::vector<std::vector<const SessionRecord*>> grid(n, std::vector<const SessionRecord*>(k, nullptr));
  for (const auto& r : records) {
    auto it = std::find(report.sessions.begin(), report.sessions.end(), r.session_label);
    if (it == report.sessions.end())
      fail(ErrorCode::IncompleteTable, "session '" + r.session_label + "' not in session order");
    auto& slot = grid[p_index[r.participant_id]][static_cast<std::size_t>(it - report.sessions.begin())];
    if (slot)
      fail(ErrorCode::IncompleteTable,
           "duplicate record for " + r.participant_id + " / " + r.session_label);
    slot = &r;
  }
  bool all_vas = true;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < k; ++j) {
      if (!grid[i][j])
        fail(ErrorCode::IncompleteTable,
             report.participants[i] + " has no '" + report.sessions[j] + "' session");
      all_vas = all_vas && grid[i][j]->self_report.has_value();
    }
  }

  std::vector<std::vector<double>> table(n, std::vector<double>(k));
  for (std::size_t m = 0; m < kMetricCount; ++m) {
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < k; ++j) table[i][j] = grid[i][j]->metrics.values[m];
    report.rows.push_back(compare_one(std::string(kMetricNames[m]), table, report.sessions));
  }
  if (all_vas) {
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < k; ++j) table[i][j] = *grid[i][j]->self_report;
    report.rows.push_back(compare_one("VAS", table, report.sessions));
  }
  return report;
}

}  // namespace noseheat
