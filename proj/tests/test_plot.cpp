#include <gtest/gtest.h>

#include <regex>

#include "hidsq/csv.hpp"
#include "hidsq/error.hpp"
#include "hidsq/plot.hpp"

using namespace hidsq;

namespace {

std::vector<std::smatch> matches(const std::string& s, const std::regex& re) {
  std::vector<std::smatch> out;
  for (auto it = std::sregex_iterator(s.begin(), s.end(), re); it != std::sregex_iterator(); ++it) out.push_back(*it);
  return out;
}

BeforeAfterRow row(std::string name, double fpr_orig, double fpr_proc) {
  BeforeAfterRow r;
  r.dataset = std::move(name);
  r.avg_recall_orig = 0.7;
  r.avg_recall_proc = 0.9;
  r.avg_fpr_orig = fpr_orig;
  r.avg_fpr_proc = fpr_proc;
  return r;
}

SequencePool pool(std::vector<std::vector<Syscall>> n, std::vector<std::vector<Syscall>> i) {
  SequencePool p;
  for (auto& g : n) p.sequences.push_back({Sequence{g}, kNormal});
  for (auto& g : i) p.sequences.push_back({Sequence{g}, kIntrusion});
  return p;
}

}  // namespace

TEST(Histogram, Counts) {
  const auto h = histogram_counts(pool({{1, 2}, {2, 3}}, {}));
  EXPECT_EQ(h.ids, (std::vector<Syscall>{1, 2, 3}));
  EXPECT_EQ(h.normal, (std::vector<std::size_t>{1, 2, 1}));
  EXPECT_EQ(h.intrusion, (std::vector<std::size_t>{0, 0, 0}));
  EXPECT_THROW(histogram_counts(SequencePool{}), PipelineError);
}

TEST(Histogram, DisjointVocabulariesNeverOverlap) {
  const auto h = histogram_counts(pool({{1, 2}, {2, 3}}, {{7, 8}, {9, 9}}));
  for (std::size_t k = 0; k < h.ids.size(); ++k) EXPECT_TRUE(h.normal[k] == 0 || h.intrusion[k] == 0);
  const auto svg = render_histogram_svg(h, "t");
  std::set<std::string> normal_ids, intrusion_ids;
  for (const auto& m : matches(svg, std::regex(R"re(class="(normal|intrusion)"[^>]*data-syscall="(\d+)")re")))
    (m[1] == "normal" ? normal_ids : intrusion_ids).insert(m[2]);
  for (const auto& id : normal_ids) EXPECT_FALSE(intrusion_ids.count(id));
}

TEST(Histogram, IdenticalPoolsIdenticalHeightsAndCsvRoundTrip) {
  const auto h = histogram_counts(pool({{1, 2}, {4, 4}}, {{1, 2}, {4, 4}}));
  EXPECT_EQ(h.normal, h.intrusion);
  std::ostringstream out;
  write_histogram_csv(h, out);
  const auto back = histogram_from_csv(parse_csv(out.str()));
  EXPECT_EQ(back.ids, h.ids);
  EXPECT_EQ(back.normal, h.normal);
  const auto svg = render_histogram_svg(back, "t");
  std::map<std::string, std::string> heights[2];
  for (const auto& m : matches(svg, std::regex(R"re(class="(normal|intrusion)"[^>]*height="([0-9.]+)"[^>]*data-syscall="(\d+)")re")))
    heights[m[1] == "normal" ? 0 : 1][m[3]] = m[2];
  EXPECT_EQ(heights[0], heights[1]);
  EXPECT_EQ(heights[0].size(), 3u);
}

TEST(Roc, LegendAndValues) {
  RocSeries perfect{"dtree", 1.0, {{0, 0}, {0, 1}, {1, 1}}};
  RocSeries flat{"kmeans", 0.5, {{0, 0}, {1, 1}}};
  const std::vector<RocSeries> s = {perfect, flat};
  const auto svg = render_roc_svg(s, "roc");
  EXPECT_NE(svg.find("dtree (AUC=1.000)"), std::string::npos);
  EXPECT_NE(svg.find("kmeans (AUC=0.500)"), std::string::npos);
  EXPECT_NE(svg.find(R"(data-model="dtree" data-auc="1.000000" data-value="0.000000:0.000000 0.000000:1.000000 1.000000:1.000000")"),
            std::string::npos);
  EXPECT_NE(svg.find(R"(data-value="0.000000:0.000000 1.000000:1.000000")"), std::string::npos);
}

TEST(Bars, OrderCountAndZeroHeight) {
  const std::vector<BeforeAfterRow> rows = {row("alpha", 0.1, 0.0), row("beta", 0.6, 0.05)};
  const auto svg = render_bars_svg(rows, "bars");
  const auto bars = matches(svg, std::regex(R"re(data-dataset="([^"]+)" data-metric="([a-z_]+)" data-value="([0-9.]+)"[^>]*height="([0-9.]+)")re"));
  ASSERT_EQ(bars.size(), 8u);
  EXPECT_EQ(bars[0][1], "beta");
  EXPECT_EQ(bars[4][1], "alpha");
  EXPECT_EQ(bars[7][2], "fpr_proc");
  EXPECT_EQ(bars[7][3], "0.000000");
  EXPECT_EQ(bars[7][4], "0.00");
  EXPECT_NE(svg.find(">0.00<"), std::string::npos);
  const std::vector<BeforeAfterRow> one = {row("solo", 0.3, 0.1)};
  EXPECT_EQ(matches(render_bars_svg(one, "b"), std::regex("class=\"bar\"")).size(), 4u);
}

TEST(Bars, TiesSortByName) {
  const std::vector<BeforeAfterRow> rows = {row("b", 0.2, 0), row("a", 0.2, 0), row("c", 0.9, 0)};
  const auto o = bar_order(rows);
  EXPECT_EQ(o[0].dataset, "c");
  EXPECT_EQ(o[1].dataset, "a");
  EXPECT_EQ(o[2].dataset, "b");
}
