#include <gtest/gtest.h>

#include <cmath>

#include "hidsq/models.hpp"
#include "hidsq/models/mlp.hpp"
#include "hidsq/rng.hpp"

using namespace hidsq;

TEST(Mlp, ZeroWeightsTieToLabelZero) {
  const auto w = MlpWeights::zeros(6, 6);
  const std::vector<double> x = {1, 2, 3, 4, 5, 6};
  const auto p = mlp_forward(w, x);
  EXPECT_EQ(p[0], 0.5);
  EXPECT_EQ(p[1], 0.5);
  Standardizer st;
  st.mean.assign(6, 0.0);
  st.scale.assign(6, 1.0);
  auto impl = std::make_shared<MlpModel>(st, w);
  FittedModel fm(ModelSpec::defaults(ModelKind::mlp), impl, {});
  FeatureMatrix one(1, 6, x);
  EXPECT_EQ(fm.score(one)[0], 0.5);
  EXPECT_EQ(fm.predict(one)[0], kNormal);
}

TEST(Mlp, FlattenAssignRoundTrip) {
  auto w = MlpWeights::zeros(3, 4);
  EXPECT_EQ(w.parameter_count(), 3u * 4 + 4 + 2 * 4 + 2);
  std::vector<double> flat(w.parameter_count());
  for (std::size_t i = 0; i < flat.size(); ++i) flat[i] = 0.1 * static_cast<double>(i);
  w.assign(flat);
  EXPECT_EQ(w.flatten(), flat);
}

TEST(Mlp, GradientMatchesFiniteDifferences) {
  Rng rng(99);
  for (int rep = 0; rep < 10; ++rep) {
    auto w = MlpWeights::zeros(4, 5);
    std::vector<double> flat(w.parameter_count());
    for (auto& v : flat) v = rng.uniform(-1, 1);
    w.assign(flat);
    FeatureMatrix x(6, 4);
    std::vector<Label> y(6);
    for (std::size_t i = 0; i < 6; ++i) {
      for (std::size_t j = 0; j < 4; ++j) x(i, j) = rng.uniform(-2, 2);
      y[i] = static_cast<Label>(rng.below(2));
    }
    const auto g = mlp_loss_and_gradient(w, x, y).grad.flatten();
    const double h = 1e-6;
    for (std::size_t k = 0; k < flat.size(); ++k) {
      auto up = flat, dn = flat;
      up[k] += h;
      dn[k] -= h;
      MlpWeights wu = w, wd = w;
      wu.assign(up);
      wd.assign(dn);
      const double fd = (mlp_loss_and_gradient(wu, x, y).loss - mlp_loss_and_gradient(wd, x, y).loss) / (2 * h);
      const double scale = std::max({std::abs(fd), std::abs(g[k]), 1e-7});
      EXPECT_LT(std::abs(fd - g[k]) / scale, 1e-4) << "param " << k;
    }
  }
}

TEST(Mlp, TrainingReducesLoss) {
  Rng rng(3);
  FeatureMatrix x(200, 6);
  std::vector<Label> y(200);
  for (std::size_t i = 0; i < 200; ++i) {
    y[i] = i % 2;
    for (std::size_t j = 0; j < 6; ++j) x(i, j) = rng.uniform(0, 1) + (y[i] ? 1.5 : 0.0);
  }
  const auto fm = fit(ModelSpec::defaults(ModelKind::mlp, 4), x, y);
  ASSERT_GE(fm.summary().objective_trace.size(), 2u);
  EXPECT_LT(fm.summary().objective_trace.back(), fm.summary().objective_trace.front());
  std::size_t correct = 0;
  const auto p = fm.predict(x);
  for (std::size_t i = 0; i < 200; ++i) correct += p[i] == y[i];
  EXPECT_GE(correct, 180u);
}
