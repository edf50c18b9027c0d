#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <random>

#include "noseheat/error.hpp"
#include "noseheat/metrics.hpp"
#include "noseheat/stats.hpp"
#include "noseheat/synth.hpp"
#include "oracles.hpp"

using namespace noseheat;

namespace {

const std::vector<std::vector<double>> kToy = {{4, 6, 9}, {3, 5, 5.5}, {6, 7.5, 10}, {5, 5, 8}};
const std::vector<double> kPairX = {30.1, 30.8, 29.9, 31.2, 30.5, 30.0};
const std::vector<double> kPairY = {30.4, 31.5, 30.1, 31.9, 30.6, 30.9};

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::InvalidArgument;
}

// t statistic of x - y straight from the definition.
double t_oracle(const std::vector<double>& x, const std::vector<double>& y) {
  std::vector<double> d;
  for (std::size_t i = 0; i < x.size(); ++i) d.push_back(x[i] - y[i]);
  return oracle::mean(d) / (oracle::sample_sd(d) / std::sqrt(static_cast<double>(d.size())));
}

}  // namespace

TEST(IncompleteBeta, ReferenceValues) {
  EXPECT_NEAR(incomplete_beta(2, 3, 0.3), 0.3483, 1e-12);
  EXPECT_NEAR(incomplete_beta(0.5, 0.5, 0.9), 0.7951672353008665, 1e-12);
  EXPECT_NEAR(incomplete_beta(10, 1, 0.01), 1e-20, 1e-30);
  EXPECT_NEAR(incomplete_beta(200, 300, 0.5), 0.9999964565197356, 1e-11);
  EXPECT_EQ(incomplete_beta(2, 3, 0.0), 0.0);
  EXPECT_EQ(incomplete_beta(2, 3, 1.0), 1.0);
  // Symmetry I_x(a, b) = 1 - I_{1-x}(b, a).
  for (double x : {0.05, 0.3, 0.77})
    EXPECT_NEAR(incomplete_beta(3.5, 1.25, x), 1.0 - incomplete_beta(1.25, 3.5, 1.0 - x), 1e-13);
}

TEST(Distributions, TwoSidedT) {
  EXPECT_NEAR(t_two_sided(2.0, 5), 0.10193947882985828, 1e-12);
  EXPECT_NEAR(t_two_sided(-2.0, 5), 0.10193947882985828, 1e-12);
  EXPECT_NEAR(t_two_sided(0.5, 3), 0.651447964848151, 1e-12);
  EXPECT_NEAR(t_two_sided(10, 30), 4.5752514082296097e-11, 1e-20);
  EXPECT_NEAR(t_two_sided(1.3, 200), 0.19509718930885642, 1e-12);
  EXPECT_NEAR(t_two_sided(3.1, 1000), 0.0019893455311220942, 1e-13);
  EXPECT_EQ(t_two_sided(0.0, 10), 1.0);
}

TEST(Distributions, FUpperTail) {
  EXPECT_NEAR(f_upper_tail(7.053, 2, 22), 0.004298098193419474, 1e-13);
  EXPECT_NEAR(f_upper_tail(25, 3, 900), 1.5316878099590826e-15, 1e-24);
  EXPECT_EQ(f_upper_tail(0.0, 2, 22), 1.0);
}

// Reference F(2, 22) values with their p and partial
// eta squared columns.
TEST(Distributions, ReferenceFTableRows) {
  struct Row {
    double F, p, eta;
  };
  for (const Row& r : {Row{7.053, .004, .391}, Row{1.456, .255, .117}, Row{3.24, .058, .228},
                       Row{0.14, .870, .013}, Row{3.619, .044, .248}, Row{5.575, .011, .336},
                       Row{3.362, .053, .234}}) {
    EXPECT_NEAR(f_upper_tail(r.F, 2, 22), r.p, 0.0005) << r.F;
    EXPECT_NEAR(2 * r.F / (2 * r.F + 22), r.eta, 0.0005) << r.F;
  }
}

TEST(Distributions, MonotoneInStatistic) {
  double prev_t = 1.0, prev_f = 1.0;
  for (double s = 0.1; s < 8.0; s += 0.1) {
    const double pt = t_two_sided(s, 11), pf = f_upper_tail(s, 2, 22);
    EXPECT_LT(pt, prev_t);
    EXPECT_LT(pf, prev_f);
    prev_t = pt;
    prev_f = pf;
  }
}

TEST(Pearson, Basics) {
  const std::vector<double> x = {1, 2, 4, 7, 11, 16};
  std::vector<double> neg;
  for (double v : x) neg.push_back(-2 * v + 7);
  EXPECT_NEAR(pearson(x, x), 1.0, 1e-15);
  EXPECT_NEAR(pearson(x, neg), -1.0, 1e-15);
  EXPECT_EQ(code_of([&] { pearson(std::vector<double>{1, 2}, std::vector<double>{1, 2}); }), ErrorCode::TooShort);
  EXPECT_EQ(code_of([&] { pearson(x, std::vector<double>{1, 2, 3}); }), ErrorCode::LengthMismatch);
  EXPECT_EQ(code_of([&] { pearson(x, std::vector<double>(6, 3.0)); }), ErrorCode::ConstantSeries);
}

TEST(Pearson, SymmetricAndAffineInvariant) {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> z;
  std::uniform_real_distribution<double> a(0.1, 30.0), b(-40.0, 40.0);
  for (int i = 0; i < 200; ++i) {
    std::vector<double> x(50), y(50);
    for (std::size_t k = 0; k < 50; ++k) {
      x[k] = z(rng);
      y[k] = 0.5 * x[k] + z(rng);
    }
    const double r = pearson(x, y);
    EXPECT_NEAR(pearson(y, x), r, 1e-12);
    auto xt = x, yt = y;
    const double ax = a(rng), bx = b(rng), ay = a(rng), by = b(rng);
    for (auto& v : xt) v = ax * v + bx;
    for (auto& v : yt) v = ay * v + by;
    EXPECT_NEAR(pearson(xt, yt), r, 1e-9);
    EXPECT_LE(std::abs(r), 1.0);
  }
}

TEST(RmAnova, ToyTableMatchesOracle) {
  const auto res = rm_anova(kToy);
  const auto ref = oracle::rm_sums(kToy);
  EXPECT_NEAR(res.F, ref.F, 1e-9);
  EXPECT_NEAR(res.ss_effect, ref.conditions, 1e-9);
  EXPECT_NEAR(res.ss_subjects, ref.subjects, 1e-9);
  EXPECT_NEAR(res.ss_error, ref.error, 1e-9);
  EXPECT_NEAR(res.partial_eta_sq, ref.eta, 1e-9);
  EXPECT_NEAR(res.p, f_upper_tail(ref.F, 2, 6), 1e-12);
  EXPECT_EQ(res.df_effect, 2);
  EXPECT_EQ(res.df_error, 6);
  // Frozen values from an established statistics package.
  EXPECT_NEAR(res.F, 22.694117647058793, 1e-9);
  EXPECT_NEAR(res.p, 0.0015917052150693223, 1e-12);
  EXPECT_NEAR(res.partial_eta_sq, 0.8832417582417581, 1e-12);
}

TEST(RmAnova, RandomTablesMatchOracle) {
  std::mt19937_64 rng(10);
  std::normal_distribution<double> z;
  for (int i = 0; i < 100; ++i) {
    const std::size_t n = 2 + rng() % 15, k = 2 + rng() % 4;
    std::vector<std::vector<double>> t(n, std::vector<double>(k));
    for (auto& row : t)
      for (auto& v : row) v = 30.0 + z(rng);
    const auto res = rm_anova(t);
    const auto ref = oracle::rm_sums(t);
    EXPECT_NEAR(res.F, ref.F, 1e-9 * std::max(1.0, ref.F));
    EXPECT_NEAR(res.partial_eta_sq, ref.eta, 1e-9);
    EXPECT_EQ(res.df_effect, static_cast<int>(k - 1));
    EXPECT_EQ(res.df_error, static_cast<int>((k - 1) * (n - 1)));
    EXPECT_GE(res.p, 0.0);
    EXPECT_LE(res.p, 1.0);
  }
}

TEST(RmAnova, TwelveByThreeDegreesOfFreedom) {
  std::mt19937_64 rng(12);
  std::normal_distribution<double> z;
  std::vector<std::vector<double>> t(12, std::vector<double>(3));
  for (auto& row : t)
    for (auto& v : row) v = z(rng);
  const auto res = rm_anova(t);
  EXPECT_EQ(res.df_effect, 2);
  EXPECT_EQ(res.df_error, 22);
}

TEST(RmAnova, SubjectAndGlobalOffsetsLeaveFUnchanged) {
  auto t = kToy;
  const double f0 = rm_anova(t).F;
  for (std::size_t i = 0; i < t.size(); ++i)
    for (auto& v : t[i]) v += 10.0 * static_cast<double>(i) - 3.0;
  EXPECT_NEAR(rm_anova(t).F, f0, 1e-9);
  for (auto& row : t)
    for (auto& v : row) v += 1000.0;
  EXPECT_NEAR(rm_anova(t).F, f0, 1e-7);
}

TEST(RmAnova, DegenerateAndIncomplete) {
  // Every participant flat across conditions: no error variance either.
  const std::vector<std::vector<double>> same = {{1, 1, 1}, {2, 2, 2}, {5, 5, 5}};
  EXPECT_EQ(code_of([&] { rm_anova(same); }), ErrorCode::DegenerateVariance);
  // Equal condition means with residual spread: F = 0.
  const std::vector<std::vector<double>> balanced = {{1, 2, 3}, {3, 2, 1}, {2, 2, 2}};
  const auto r = rm_anova(balanced);
  EXPECT_NEAR(r.F, 0.0, 1e-12);
  EXPECT_NEAR(r.p, 1.0, 1e-12);
  EXPECT_EQ(code_of([&] { rm_anova({{1, 2, 3}}); }), ErrorCode::IncompleteTable);
  EXPECT_EQ(code_of([&] { rm_anova({{1}, {2}}); }), ErrorCode::IncompleteTable);
  EXPECT_EQ(code_of([&] { rm_anova({{1, 2}, {2, 3, 4}}); }), ErrorCode::IncompleteTable);
}

TEST(PairedT, ToyDataMatchesOracle) {
  const auto r = paired_t(kPairX, kPairY);
  EXPECT_NEAR(r.t, t_oracle(kPairX, kPairY), 1e-9);
  EXPECT_EQ(r.df, 5);
  EXPECT_NEAR(r.t, -3.642112604949141, 1e-9);
  EXPECT_NEAR(r.p, 0.014870537183664795, 1e-12);
  EXPECT_NEAR(r.p, t_two_sided(t_oracle(kPairX, kPairY), 5), 1e-12);
}

TEST(PairedT, Errors) {
  EXPECT_EQ(code_of([] { paired_t(kPairX, kPairX); }), ErrorCode::ZeroVariance);
  const std::vector<double> a = {2, 3, 4, 5}, b = {1, 2, 3, 4};
  EXPECT_EQ(code_of([&] { paired_t(a, b); }), ErrorCode::ZeroVariance);
  EXPECT_EQ(code_of([&] { paired_t(a, kPairX); }), ErrorCode::LengthMismatch);
  EXPECT_EQ(code_of([] { paired_t(std::vector<double>{1}, std::vector<double>{2}); }), ErrorCode::TooShort);
}

TEST(Bonferroni, Examples) {
  EXPECT_NEAR(bonferroni(std::vector<double>{0.01}, 3)[0], 0.03, 1e-15);
  EXPECT_EQ(bonferroni(std::vector<double>{0.5}, 3)[0], 1.0);
  EXPECT_THROW(bonferroni(std::vector<double>{0.1, 0.2}, 1), Error);
  EXPECT_THROW(bonferroni(std::vector<double>{1.2}, 3), Error);
}

TEST(Bonferroni, MonotoneAndBounded) {
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 100; ++i) {
    std::vector<double> p(3);
    for (auto& v : p) v = u(rng) * (i % 2 ? 0.01 : 1.0);
    const auto adj = bonferroni(p, 3);
    for (std::size_t a = 0; a < 3; ++a) {
      EXPECT_GE(adj[a], p[a]);
      EXPECT_LE(adj[a], 1.0);
      for (std::size_t b = 0; b < 3; ++b)
        if (p[a] < p[b]) EXPECT_LE(adj[a], adj[b]);
    }
  }
}

TEST(Describe, Summary) {
  const auto s = describe(std::vector<double>{4, 1, 3, 2});
  EXPECT_EQ(s.n, 4u);
  EXPECT_DOUBLE_EQ(s.mean, 2.5);
  EXPECT_DOUBLE_EQ(s.median, 2.5);
  EXPECT_DOUBLE_EQ(s.min, 1.0);
  EXPECT_DOUBLE_EQ(s.max, 4.0);
  EXPECT_NEAR(s.sd, std::sqrt(5.0 / 3.0), 1e-15);
}

TEST(Stars, Thresholds) {
  EXPECT_EQ(significance_stars(0.0005), "***");
  EXPECT_EQ(significance_stars(0.004), "**");
  EXPECT_EQ(significance_stars(0.046), "*");
  EXPECT_EQ(significance_stars(0.058), "+");
  EXPECT_EQ(significance_stars(0.255), "");
}

namespace {

std::vector<SessionRecord> toy_records(bool with_vas) {
  const char* sessions[] = {"Rest", "MathEasy", "MathHard"};
  std::vector<SessionRecord> out;
  for (std::size_t i = 0; i < kToy.size(); ++i) {
    for (std::size_t j = 0; j < 3; ++j) {
      SessionRecord r;
      r.participant_id = "P0" + std::to_string(i + 1);
      r.session_label = sessions[j];
      for (std::size_t m = 0; m < kMetricCount; ++m) r.metrics.values[m] = kToy[i][j] * (1.0 + 0.1 * m) + 0.3 * (m % 3) * j * i;
      if (with_vas) r.self_report = 2.0 + j * 2.5 + 0.5 * static_cast<double>(i % 2) + 0.1 * i * j;
      out.push_back(r);
    }
  }
  return out;
}

std::vector<std::vector<double>> column(const std::vector<SessionRecord>& recs, std::size_t metric) {
  std::vector<std::vector<double>> t(kToy.size(), std::vector<double>(3));
  for (std::size_t i = 0; i < recs.size(); ++i) t[i / 3][i % 3] = recs[i].metrics.values[metric];
  return t;
}

}  // namespace

TEST(Compare, RowsEqualStandaloneStatistics) {
  const auto recs = toy_records(false);
  const auto rep = compare_sessions(recs);
  ASSERT_EQ(rep.rows.size(), kMetricCount);
  EXPECT_EQ(rep.sessions, (std::vector<std::string>{"Rest", "MathEasy", "MathHard"}));
  EXPECT_EQ(rep.participants.size(), 4u);
  for (std::size_t m = 0; m < kMetricCount; ++m) {
    const auto& row = rep.rows[m];
    EXPECT_EQ(row.metric, kMetricNames[m]);
    const auto t = column(recs, m);
    const auto ref = oracle::rm_sums(t);
    ASSERT_TRUE(row.anova.has_value());
    EXPECT_NEAR(row.anova->F, ref.F, 1e-9 * ref.F);
    EXPECT_EQ(row.stars, significance_stars(row.anova->p));
    ASSERT_EQ(row.posthoc.size(), 3u);
    const std::pair<int, int> pairs[] = {{0, 1}, {0, 2}, {1, 2}};
    for (std::size_t k = 0; k < 3; ++k) {
      std::vector<double> a, b;
      for (const auto& r : t) {
        a.push_back(r[pairs[k].first]);
        b.push_back(r[pairs[k].second]);
      }
      const auto& ph = row.posthoc[k];
      EXPECT_EQ(ph.session_a, rep.sessions[pairs[k].first]);
      EXPECT_EQ(ph.session_b, rep.sessions[pairs[k].second]);
      ASSERT_TRUE(ph.test.has_value());
      EXPECT_NEAR(ph.test->t, t_oracle(a, b), 1e-9);
      EXPECT_NEAR(ph.p_adjusted, std::min(1.0, 3.0 * ph.test->p), 1e-15);
    }
    EXPECT_EQ(row.per_session.size(), 3u);
  }
  EXPECT_NEAR(rep.rows[0].anova->F, 22.694117647058793, 1e-9);
}

TEST(Compare, SessionOrderAndVasRow) {
  const auto recs = toy_records(true);
  const auto rep = compare_sessions(recs, {"MathHard", "Rest", "MathEasy"});
  EXPECT_EQ(rep.sessions.front(), "MathHard");
  ASSERT_EQ(rep.rows.size(), kMetricCount + 1);
  EXPECT_EQ(rep.rows.back().metric, "VAS");
  auto partial = recs;
  partial[4].self_report.reset();
  EXPECT_EQ(compare_sessions(partial).rows.size(), kMetricCount);
}

TEST(Compare, TableShapeErrors) {
  auto recs = toy_records(false);
  std::vector<SessionRecord> one(recs.begin(), recs.begin() + 3);
  EXPECT_EQ(code_of([&] { compare_sessions(one); }), ErrorCode::IncompleteTable);
  auto missing = recs;
  missing.pop_back();
  EXPECT_EQ(code_of([&] { compare_sessions(missing); }), ErrorCode::IncompleteTable);
  auto dup = recs;
  dup.push_back(recs.front());
  EXPECT_EQ(code_of([&] { compare_sessions(dup); }), ErrorCode::IncompleteTable);
  auto bad_vas = toy_records(true);
  bad_vas[0].self_report = 11.0;
  EXPECT_THROW(compare_sessions(bad_vas), Error);
}

TEST(Compare, SdstvHasLargestNonfilteredFOnCohorts) {
  const std::string nonfiltered[] = {"TD", "STV", "SDSTV", "SDTV", "TD_n", "STV_n", "SDSTV_n", "SDTV_n"};
  int wins = 0;
  for (std::uint64_t c = 0; c < 100; ++c) {
    CohortSpec cs;
    cs.seed = 7000 + c;
    std::map<std::string, std::vector<ThermalSignal>> per;
    for (const auto& s : gen_cohort(cs)) per[s.participant].push_back(reject_outliers(s.data.signal));
    std::vector<SessionRecord> recs;
    for (const auto& [p, sigs] : per) {
      const auto ctx = person_context(sigs);
      const char* names[] = {"Rest", "MathEasy", "MathHard"};
      for (std::size_t i = 0; i < 3; ++i) recs.push_back({p, names[i], metric_set(sigs[i], ctx), std::nullopt});
    }
    const auto rep = compare_sessions(recs);
    std::string best;
    double best_f = -1.0;
    for (const auto& row : rep.rows)
      if (row.anova && std::find(std::begin(nonfiltered), std::end(nonfiltered), row.metric) != std::end(nonfiltered) &&
          row.anova->F > best_f) {
        best_f = row.anova->F;
        best = row.metric;
      }
    wins += best == "SDSTV";
  }
  EXPECT_GE(wins, 90);
}
