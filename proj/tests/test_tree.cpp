#include <gtest/gtest.h>

#include <numeric>

#include "hidsq/models.hpp"
#include "hidsq/models/tree.hpp"
#include "hidsq/rng.hpp"
#include "support.hpp"

using namespace hidsq;

namespace {

LabeledMatrix random_set(Rng& rng, std::size_t rows, std::size_t d, std::uint64_t levels) {
  LabeledMatrix m;
  m.x = FeatureMatrix(rows, d);
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < d; ++j) m.x(i, j) = static_cast<double>(rng.below(levels));
    m.y.push_back(static_cast<Label>(rng.below(2)));
  }
  return m;
}

std::vector<std::size_t> iota(std::size_t n) {
  std::vector<std::size_t> v(n);
  std::iota(v.begin(), v.end(), 0);
  return v;
}

}  // namespace

TEST(Gini, Examples) {
  EXPECT_DOUBLE_EQ(gini_impurity(5, 5), 0.5);
  EXPECT_EQ(gini_impurity(8, 0), 0.0);
  EXPECT_DOUBLE_EQ(gini_impurity(3, 1), 0.375);
  EXPECT_THROW(gini_impurity(0, 0), std::invalid_argument);
}

TEST(Split, MatchesExhaustiveSearch) {
  Rng rng(123);
  for (int rep = 0; rep < 60; ++rep) {
    const std::size_t rows = 10 + rng.below(100);
    const auto m = random_set(rng, rows, 6, 2 + rng.below(12));
    const auto rr = iota(rows);
    const auto ff = iota(6);
    const auto got = find_best_split(m.x, m.y, rr, ff, 5);
    const auto want = hidsq::testing::brute_force_split(m.x, m.y, 5);
    ASSERT_EQ(got.has_value(), want.found);
    if (!want.found) continue;
    EXPECT_EQ(got->feature, want.feature);
    EXPECT_EQ(got->threshold, want.threshold);
    EXPECT_EQ(got->n_left + got->n_right, rows);
    EXPECT_GE(got->n_left, 5u);
    EXPECT_GE(got->n_right, 5u);
  }
}

TEST(Split, TiesPreferLowerFeatureThenThreshold) {
  // features 0 and 1 are identical copies; both candidate thresholds on a
  // symmetric layout give the same impurity
  FeatureMatrix x(4, 2, {0, 0, 1, 1, 2, 2, 3, 3});
  std::vector<Label> y = {0, 1, 1, 0};
  const auto rr = iota(4);
  const auto ff = iota(2);
  const auto s = find_best_split(x, y, rr, ff, 1);
  ASSERT_TRUE(s);
  EXPECT_EQ(s->feature, 0u);
  EXPECT_EQ(s->threshold, 0.5);
}

TEST(Split, NoAdmissibleCandidate) {
  FeatureMatrix x(4, 1, {1, 1, 1, 1});
  std::vector<Label> y = {0, 1, 0, 1};
  const auto rr = iota(4);
  const auto ff = iota(1);
  EXPECT_FALSE(find_best_split(x, y, rr, ff, 1));
  FeatureMatrix z(4, 1, {1, 2, 3, 4});
  EXPECT_FALSE(find_best_split(z, y, rr, ff, 3));
}

TEST(DTree, SeparableOneFeatureTrainsPerfectly) {
  FeatureMatrix x(50, 1);
  std::vector<Label> y(50);
  for (std::size_t i = 0; i < 50; ++i) {
    x(i, 0) = static_cast<double>(i);
    y[i] = i >= 25;
  }
  const auto fm = fit(ModelSpec::defaults(ModelKind::dtree, 1), x, y);
  EXPECT_EQ(fm.predict(x), y);
  const auto* t = fm.as<TreeModel>();
  ASSERT_NE(t, nullptr);
  EXPECT_EQ(t->tree().nodes()[0].threshold, 24.5);
  EXPECT_EQ(t->tree().depth(), 1u);
}

TEST(DTree, LeavesRespectMinimums) {
  Rng rng(5);
  const auto m = random_set(rng, 300, 6, 8);
  const auto fm = fit(ModelSpec::defaults(ModelKind::dtree, 3), m.x, m.y);
  const auto& nodes = fm.as<TreeModel>()->tree().nodes();
  for (const auto& n : nodes) {
    if (n.feature < 0) {
      EXPECT_GE(n.samples, 5u);
    } else {
      EXPECT_GE(n.samples, 10u);
      EXPECT_EQ(nodes[n.left].samples + nodes[n.right].samples, n.samples);
    }
  }
}

TEST(DTree, MaxDepthCaps) {
  Rng rng(6);
  const auto m = random_set(rng, 400, 6, 10);
  auto spec = ModelSpec::defaults(ModelKind::dtree, 3);
  std::get<TreeParams>(spec.params).max_depth = 2;
  EXPECT_LE(fit(spec, m.x, m.y).as<TreeModel>()->tree().depth(), 2u);
}

TEST(Forest, OneTreeNoBootstrapEqualsTree) {
  Rng rng(7);
  for (int rep = 0; rep < 10; ++rep) {
    const auto m = random_set(rng, 200, 6, 6);
    const auto q = random_set(rng, 100, 6, 6);
    for (MaxFeatures mf : {MaxFeatures::all, MaxFeatures::sqrt}) {
      auto ts = ModelSpec::defaults(ModelKind::dtree, 40 + rep);
      std::get<TreeParams>(ts.params).max_features = mf;
      auto fs = ModelSpec::defaults(ModelKind::rforest, 40 + rep);
      auto& fp = std::get<ForestParams>(fs.params);
      fp.trees = 1;
      fp.bootstrap = false;
      fp.tree.max_features = mf;
      const auto t = fit(ts, m.x, m.y);
      const auto f = fit(fs, m.x, m.y);
      EXPECT_EQ(t.predict(q.x), f.predict(q.x));
      EXPECT_EQ(t.score(q.x), f.score(q.x));
    }
  }
}

TEST(Forest, ThreadCountDoesNotChangeResult) {
  Rng rng(8);
  const auto m = random_set(rng, 300, 6, 8);
  auto spec = ModelSpec::defaults(ModelKind::rforest, 9);
  auto& fp = std::get<ForestParams>(spec.params);
  fp.trees = 24;
  fp.threads = 1;
  const auto a = fit(spec, m.x, m.y);
  fp.threads = 6;
  const auto b = fit(spec, m.x, m.y);
  EXPECT_EQ(a.score(m.x), b.score(m.x));
}

TEST(Forest, ScoreIsMeanOfTrees) {
  Rng rng(10);
  const auto m = random_set(rng, 200, 6, 5);
  auto spec = ModelSpec::defaults(ModelKind::rforest, 2);
  std::get<ForestParams>(spec.params).trees = 7;
  const auto fm = fit(spec, m.x, m.y);
  const auto* f = fm.as<ForestModel>();
  const auto s = fm.score(m.x);
  for (std::size_t i = 0; i < 20; ++i) {
    double sum = 0;
    for (const auto& t : f->trees()) sum += t.score_row(m.x.row(i));
    EXPECT_NEAR(s[i], sum / 7, 1e-15);
  }
}
