#include <gtest/gtest.h>

#include <cmath>

#include "hidsq/features.hpp"

using namespace hidsq;

TEST(Features, CastsGramsToRows) {
  std::vector<LabeledSequence> s = {{Sequence{{1, 2, 3}}, kNormal}, {Sequence{{4, 5, 6}}, kIntrusion}};
  const auto m = to_features(s);
  ASSERT_EQ(m.x.rows(), 2u);
  ASSERT_EQ(m.x.cols(), 3u);
  EXPECT_EQ(m.x(1, 2), 6.0);
  EXPECT_EQ(m.y, (std::vector<Label>{0, 1}));
  const std::vector<std::size_t> idx = {1};
  EXPECT_EQ(m.x.select_rows(idx)(0, 0), 4.0);
}

TEST(Standardizer, ZeroMeanUnitVarianceAndConstantFloor) {
  FeatureMatrix x(4, 2, {1, 7, 2, 7, 3, 7, 4, 7});
  const auto st = Standardizer::fit(x);
  EXPECT_DOUBLE_EQ(st.mean[0], 2.5);
  EXPECT_DOUBLE_EQ(st.scale[0], std::sqrt(1.25));
  EXPECT_EQ(st.scale[1], 1e-12);
  const auto z = st.apply(x);
  double s = 0, ss = 0;
  for (std::size_t i = 0; i < 4; ++i) {
    s += z(i, 0);
    ss += z(i, 0) * z(i, 0);
    EXPECT_EQ(z(i, 1), 0.0);
  }
  EXPECT_NEAR(s, 0.0, 1e-12);
  EXPECT_NEAR(ss / 4, 1.0, 1e-12);
}
