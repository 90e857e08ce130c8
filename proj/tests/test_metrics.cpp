#include <gtest/gtest.h>

#include <cmath>

#include "hidsq/csv.hpp"
#include "hidsq/metrics.hpp"
#include "hidsq/rng.hpp"
#include "support.hpp"

using namespace hidsq;

namespace {

const std::vector<Label> kY = {1, 0, 1, 0};
const std::vector<double> kS = {0.9, 0.8, 0.7, 0.1};

MetricsReport report(std::string ds, std::string prov, std::string model, double recall, double fpr,
                     std::size_t n_neg = 100) {
  MetricsReport r;
  r.dataset = std::move(ds);
  r.provenance = std::move(prov);
  r.model = std::move(model);
  r.rates.recall = recall;
  r.rates.fpr = fpr;
  r.n_neg = n_neg;
  r.n_pos = n_neg;
  return r;
}

}  // namespace

TEST(Confusion, HandCount) {
  const std::vector<Label> t = {1, 1, 1, 1, 0, 0, 0, 0, 0, 0};
  const std::vector<Label> p = {1, 1, 1, 0, 1, 1, 0, 0, 0, 0};
  EXPECT_EQ(confusion(t, p), (ConfusionMatrix{3, 1, 2, 4}));
  const auto same = confusion(t, t);
  EXPECT_EQ(same.fn + same.fp, 0u);
  std::vector<Label> inv(t.size());
  for (std::size_t i = 0; i < t.size(); ++i) inv[i] = 1 - t[i];
  const auto opp = confusion(t, inv);
  EXPECT_EQ(opp.tp + opp.tn, 0u);
  EXPECT_THROW(confusion(t, std::vector<Label>{1}), std::invalid_argument);
}

TEST(Rates, HandEvaluation) {
  const auto r = classification_metrics({3, 1, 2, 4});
  EXPECT_DOUBLE_EQ(r.accuracy, 0.7);
  EXPECT_DOUBLE_EQ(r.precision, 0.6);
  EXPECT_DOUBLE_EQ(r.recall, 0.75);
  EXPECT_NEAR(r.fpr, 1.0 / 3.0, 1e-15);
  // F1(pos) = 2*.6*.75/1.35, F1(neg): precision 4/5, recall 4/6
  const double f1p = 2 * 0.6 * 0.75 / 1.35;
  const double f1n = 2 * 0.8 * (4.0 / 6) / (0.8 + 4.0 / 6);
  EXPECT_NEAR(r.macro_f1, (f1p + f1n) / 2, 1e-15);
  EXPECT_FALSE(r.undefined_ratio);

  const auto perfect = classification_metrics({5, 0, 0, 5});
  EXPECT_EQ(perfect.accuracy, 1.0);
  EXPECT_EQ(perfect.fpr, 0.0);

  const auto none = classification_metrics({0, 4, 0, 6});
  EXPECT_EQ(none.precision, 0.0);
  EXPECT_TRUE(none.undefined_ratio);
  EXPECT_FALSE(none.warnings.empty());
  EXPECT_THROW(classification_metrics({}), std::invalid_argument);
}

TEST(Rates, AccuracyIdentityOnRandomMatrices) {
  Rng rng(2);
  for (int i = 0; i < 500; ++i) {
    ConfusionMatrix cm{rng.below(20), rng.below(20), rng.below(20), rng.below(20) + 1};
    const auto r = classification_metrics(cm);
    EXPECT_EQ(r.accuracy, static_cast<double>(cm.tp + cm.tn) / static_cast<double>(cm.total()));
    for (double v : {r.accuracy, r.precision, r.recall, r.fpr, r.macro_f1}) {
      EXPECT_GE(v, 0.0);
      EXPECT_LE(v, 1.0);
    }
  }
}

TEST(Roc, HandSweep) {
  const auto c = roc_curve(kY, kS);
  const std::vector<std::pair<double, double>> want = {{0, 0}, {0, .5}, {.5, .5}, {.5, 1}, {1, 1}};
  ASSERT_EQ(c.points.size(), want.size());
  for (std::size_t i = 0; i < want.size(); ++i) {
    EXPECT_EQ(c.points[i].fpr, want[i].first);
    EXPECT_EQ(c.points[i].tpr, want[i].second);
  }
  EXPECT_TRUE(std::isinf(c.thresholds[0]));
  EXPECT_EQ(c.thresholds[1], 0.9);
}

TEST(Roc, ConstantScoresCollapse) {
  const std::vector<double> s(4, 0.3);
  const auto c = roc_curve(kY, s);
  ASSERT_EQ(c.points.size(), 2u);
  EXPECT_EQ(c.points[1].fpr, 1.0);
  EXPECT_EQ(c.points[1].tpr, 1.0);
  EXPECT_DOUBLE_EQ(auc(kY, s), 0.5);
}

TEST(Roc, SeparatedPassesThroughTopLeft) {
  const std::vector<Label> y = {0, 1, 0, 1};
  const std::vector<double> s = {0.1, 0.9, 0.2, 0.8};
  const auto c = roc_curve(y, s);
  bool corner = false;
  for (auto p : c.points) corner |= (p.fpr == 0.0 && p.tpr == 1.0);
  EXPECT_TRUE(corner);
  EXPECT_EQ(auc(y, s), 1.0);
  EXPECT_THROW(roc_curve(std::vector<Label>{1, 1}, std::vector<double>{0.1, 0.2}), std::invalid_argument);
  EXPECT_THROW(auc(std::vector<Label>{0, 0}, std::vector<double>{0.1, 0.2}), std::invalid_argument);
}

TEST(Auc, HandExampleAndInversion) {
  EXPECT_DOUBLE_EQ(auc(kY, kS), 0.75);
  std::vector<double> neg(kS.size());
  for (std::size_t i = 0; i < kS.size(); ++i) neg[i] = -kS[i];
  EXPECT_DOUBLE_EQ(auc(kY, neg), 0.25);
}

TEST(Auc, MatchesPairCountingAndIsRankInvariant) {
  Rng rng(77);
  for (int rep = 0; rep < 300; ++rep) {
    const std::size_t n = 4 + rng.below(100);
    std::vector<Label> y(n);
    std::vector<double> s(n);
    for (std::size_t i = 0; i < n; ++i) {
      y[i] = static_cast<Label>(rng.below(2));
      s[i] = static_cast<double>(rng.below(8)) / 8.0;
    }
    y[0] = 0;
    y[1] = 1;
    const double a = auc(y, s);
    EXPECT_NEAR(a, hidsq::testing::pair_count_auc(y, s), 1e-12);
    std::vector<double> t(n);
    for (std::size_t i = 0; i < n; ++i) t[i] = std::exp(3 * s[i]) - 7;
    EXPECT_NEAR(auc(y, t), a, 1e-12);
    const auto c = roc_curve(y, s);
    EXPECT_EQ(c.points.front().fpr, 0.0);
    EXPECT_EQ(c.points.front().tpr, 0.0);
    EXPECT_EQ(c.points.back().fpr, 1.0);
    EXPECT_EQ(c.points.back().tpr, 1.0);
    for (std::size_t i = 1; i < c.points.size(); ++i) {
      EXPECT_GE(c.points[i].fpr, c.points[i - 1].fpr);
      EXPECT_GE(c.points[i].tpr, c.points[i - 1].tpr);
    }
  }
}

TEST(LogRatio, Examples) {
  EXPECT_NEAR(log_ratio(1.0, 0.01, 1000).value, 2.0, 1e-12);
  EXPECT_EQ(log_ratio(0.4, 0.4, 10).value, 0.0);
  const auto f = log_ratio(1.0, 0.0, 50);
  EXPECT_NEAR(f.value, 2.0, 1e-12);
  EXPECT_DOUBLE_EQ(f.epsilon, 0.01);
}

TEST(LogRatio, Monotone) {
  Rng rng(4);
  for (int i = 0; i < 300; ++i) {
    const double r1 = rng.uniform(), r2 = rng.uniform(), f = rng.uniform();
    const auto lo = std::min(r1, r2), hi = std::max(r1, r2);
    EXPECT_LE(log_ratio(lo, f, 40).value, log_ratio(hi, f, 40).value);
    EXPECT_GE(log_ratio(f, lo, 40).value, log_ratio(f, hi, 40).value);
  }
}

TEST(Evaluate, FillsReport) {
  const std::vector<Label> pred = {1, 1, 0, 0};
  const auto r = evaluate(kY, kS, pred);
  EXPECT_EQ(r.cm, (ConfusionMatrix{1, 1, 1, 1}));
  EXPECT_DOUBLE_EQ(r.auc, 0.75);
  EXPECT_EQ(r.n_pos, 2u);
  EXPECT_EQ(r.n_neg, 2u);
  EXPECT_DOUBLE_EQ(r.epsilon, 0.25);
  EXPECT_DOUBLE_EQ(r.log_ratio, 0.0);
}

TEST(Aggregate, MeansAndRatios) {
  std::vector<MetricsReport> rs = {report("live", "original", "knn", 0.5, 0.644),
                                   report("live", "original", "dtree", 1.0, 0.644),
                                   report("live", "processed", "knn", 0.5, 0.116),
                                   report("live", "processed", "dtree", 1.0, 0.116)};
  const auto rows = aggregate(rs, GroupBy::provenance);
  bool saw_mean = false, saw_fpr_ratio = false;
  for (const auto& r : rows) {
    if (r.kind == "mean" && r.key == "original" && r.metric == "recall") {
      EXPECT_DOUBLE_EQ(r.value, 0.75);
      EXPECT_EQ(r.count, 2u);
      saw_mean = true;
    }
    if (r.kind == "ratio" && r.key == "live" && r.metric == "fpr_ratio") {
      EXPECT_NEAR(r.value, 0.644 / 0.116, 1e-12);
      EXPECT_NEAR(r.value, 5.55, 0.01);
      saw_fpr_ratio = true;
    }
  }
  EXPECT_TRUE(saw_mean);
  EXPECT_TRUE(saw_fpr_ratio);

  std::vector<MetricsReport> one = {report("d", "processed", "gnb", 0.3, 0.2)};
  for (const auto& r : aggregate(one, GroupBy::model))
    if (r.kind == "mean" && r.metric == "fpr") {
      EXPECT_EQ(r.value, 0.2);
    }
  EXPECT_THROW(aggregate(std::span<const MetricsReport>{}, GroupBy::model), std::invalid_argument);
}

TEST(Aggregate, ZeroProcessedFprUsesEpsilonFloor) {
  std::vector<MetricsReport> rs = {report("d", "original", "m", 1.0, 0.2, 50),
                                   report("d", "processed", "m", 1.0, 0.0, 50)};
  for (const auto& r : aggregate(rs, GroupBy::dataset))
    if (r.metric == "fpr_ratio") {
      EXPECT_NEAR(r.value, 0.2 / ratio_epsilon(50), 1e-12);
    }
  EXPECT_DOUBLE_EQ(ratio_epsilon(50), 0.01);
}

TEST(MetricsCsv, SchemaLineAndParsable) {
  auto r = evaluate(kY, kS, std::vector<Label>{1, 0, 1, 0});
  r.dataset = "d";
  r.provenance = "processed";
  r.model = "knn";
  r.params = "k=3;seed=1";
  std::ostringstream out;
  write_metrics_csv(std::span<const MetricsReport>(&r, 1), out);
  const auto t = parse_csv(out.str());
  ASSERT_EQ(t.comments.size(), 1u);
  EXPECT_EQ(t.comments[0], kMetricsSchema);
  ASSERT_EQ(t.rows.size(), 1u);
  EXPECT_EQ(t.at(0, "params"), "k=3;seed=1");
  EXPECT_EQ(t.number(0, "recall"), 1.0);
  EXPECT_EQ(t.at(0, "auc"), "0.750000");

  std::ostringstream roc;
  write_roc_csv(roc_curve(kY, kS), roc);
  const auto rt = parse_csv(roc.str());
  EXPECT_EQ(rt.rows.size(), 5u);
  EXPECT_TRUE(std::isinf(rt.number(0, "threshold")));
}
