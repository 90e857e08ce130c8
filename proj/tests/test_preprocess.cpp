#include <gtest/gtest.h>

#include <map>
#include <set>

#include "hidsq/error.hpp"
#include "hidsq/preprocess.hpp"
#include "hidsq/rng.hpp"
#include "hidsq/synth.hpp"

using namespace hidsq;

namespace {

Sequence seq(std::initializer_list<Syscall> g) { return Sequence{std::vector<Syscall>(g)}; }

SequencePool pool_of(std::size_t normal, std::size_t intrusion) {
  SequencePool p;
  for (std::size_t i = 0; i < normal; ++i) p.sequences.push_back({seq({i, 0}), kNormal});
  for (std::size_t i = 0; i < intrusion; ++i) p.sequences.push_back({seq({i, 1}), kIntrusion});
  return p;
}

}  // namespace

TEST(GroupByPid, OrderOfFirstAppearance) {
  const std::vector<SyscallRecord> r = {{5, 1}, {6, 9}, {5, 2}};
  const auto t = group_by_pid(r, "f");
  ASSERT_EQ(t.size(), 2u);
  EXPECT_EQ(t[0].events, (std::vector<Syscall>{1, 2}));
  EXPECT_EQ(t[1].events, (std::vector<Syscall>{9}));
  EXPECT_EQ(t[0].source_id, "f#pid=5");
  EXPECT_TRUE(group_by_pid({}, "f").empty());
  const std::vector<SyscallRecord> one = {{3, 4}, {3, 5}, {3, 6}};
  ASSERT_EQ(group_by_pid(one).size(), 1u);
  EXPECT_EQ(group_by_pid(one)[0].events, (std::vector<Syscall>{4, 5, 6}));
}

TEST(Tokenize, Windows) {
  const std::vector<Syscall> e = {1, 2, 3, 4, 5, 6, 7};
  const auto w = tokenize_ngrams(e, 6, 1);
  ASSERT_EQ(w.size(), 2u);
  EXPECT_EQ(w[0], seq({1, 2, 3, 4, 5, 6}));
  EXPECT_EQ(w[1], seq({2, 3, 4, 5, 6, 7}));
  EXPECT_TRUE(tokenize_ngrams(std::vector<Syscall>{1, 2, 3, 4, 5}, 6, 1).empty());
  EXPECT_EQ(tokenize_ngrams(std::vector<Syscall>{1, 2, 3, 4, 5, 6}, 6, 1).size(), 1u);
  // stride 2 over 9 events, n=3: offsets 0,2,4,6
  std::vector<Syscall> nine = {0, 1, 2, 3, 4, 5, 6, 7, 8};
  const auto s2 = tokenize_ngrams(nine, 3, 2);
  ASSERT_EQ(s2.size(), 4u);
  EXPECT_EQ(s2[3], seq({6, 7, 8}));
}

TEST(Dedup, SetDifferenceSemantics) {
  const auto A = seq({1}), B = seq({2}), C = seq({3});
  auto [n, i] = dedup_cross_class({A, A, B}, {B, C});
  EXPECT_EQ(n, (std::vector<Sequence>{A, A}));
  EXPECT_EQ(i, (std::vector<Sequence>{C}));
  auto [n2, i2] = dedup_cross_class({A, B}, {B, A});
  EXPECT_TRUE(n2.empty());
  EXPECT_TRUE(i2.empty());
  auto [n3, i3] = dedup_cross_class({A}, {C});
  EXPECT_EQ(n3, (std::vector<Sequence>{A}));
  EXPECT_EQ(i3, (std::vector<Sequence>{C}));
}

TEST(Dedup, IdempotentAndDisjointOnRandomInput) {
  Rng rng(17);
  for (int rep = 0; rep < 50; ++rep) {
    std::vector<Sequence> n, i;
    for (int k = 0; k < 60; ++k) n.push_back(seq({rng.below(6), rng.below(6)}));
    for (int k = 0; k < 40; ++k) i.push_back(seq({rng.below(6), rng.below(6)}));
    auto [n1, i1] = dedup_cross_class(n, i);
    std::set<Sequence> sn(n1.begin(), n1.end());
    for (const auto& s : i1) EXPECT_FALSE(sn.count(s));
    auto [n2, i2] = dedup_cross_class(n1, i1);
    EXPECT_EQ(n1, n2);
    EXPECT_EQ(i1, i2);
  }
}

TEST(Bootstrap, EqualizesAndKeepsOriginals) {
  const auto p = pool_of(100, 40);
  const auto b = bootstrap_balance(p, 3);
  EXPECT_EQ(b.counts().normal, 100u);
  EXPECT_EQ(b.counts().intrusion, 100u);
  for (std::size_t k = 0; k < p.sequences.size(); ++k) EXPECT_EQ(b.sequences[k], p.sequences[k]);
  std::set<Sequence> minority;
  for (const auto& s : p.sequences)
    if (s.label == kIntrusion) minority.insert(s.seq);
  for (const auto& s : b.sequences)
    if (s.label == kIntrusion) {
      EXPECT_TRUE(minority.count(s.seq));
    }
  EXPECT_EQ(bootstrap_balance(p, 3).sequences, b.sequences);
  const auto same = pool_of(70, 70);
  EXPECT_EQ(bootstrap_balance(same, 1).sequences, same.sequences);
  EXPECT_THROW(bootstrap_balance(pool_of(5, 0), 1), PipelineError);
}

TEST(Split, FloorPerClassAndPartition) {
  const auto p = pool_of(5, 5);
  const auto s = split_train_test(p, 0.7, 11);
  EXPECT_EQ(s.train.size(), 6u);
  EXPECT_EQ(s.test.size(), 4u);
  std::size_t train_pos = 0;
  for (const auto& x : s.train) train_pos += x.label;
  EXPECT_EQ(train_pos, 3u);

  const auto big = pool_of(7000, 7000);
  const auto sb = split_train_test(big, 0.7, 1);
  EXPECT_EQ(sb.train.size(), 9800u);
  EXPECT_EQ(sb.test.size(), 4200u);
  std::vector<std::size_t> all = sb.train_indices;
  all.insert(all.end(), sb.test_indices.begin(), sb.test_indices.end());
  std::sort(all.begin(), all.end());
  for (std::size_t k = 0; k < all.size(); ++k) ASSERT_EQ(all[k], k);
  EXPECT_TRUE(std::is_sorted(sb.train_indices.begin(), sb.train_indices.end()));
  for (std::size_t k = 0; k < sb.train.size(); ++k) EXPECT_EQ(sb.train[k], big.sequences[sb.train_indices[k]]);

  const auto again = split_train_test(big, 0.7, 1);
  EXPECT_EQ(again.train_indices, sb.train_indices);
  EXPECT_NE(split_train_test(big, 0.7, 2).train_indices, sb.train_indices);
  EXPECT_THROW(split_train_test(pool_of(1, 5), 0.7, 1), PipelineError);
}

TEST(Config, Validate) {
  PipelineConfig c;
  EXPECT_NO_THROW(c.validate());
  c.stride = 7;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = {};
  c.n = 0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = {};
  c.ratio = 1.0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
}

TEST(RunPipeline, DisjointDatasetLosesNothingToDedup) {
  SynthSpec spec;
  spec.name = "disjoint";
  spec.traces_per_class = 60;
  spec.signature_overlap = 0.0;
  spec.seed = 5;
  const auto ds = generate(spec);
  PipelineConfig cfg;
  const auto r = run_pipeline(ds, cfg);
  EXPECT_EQ(r.stats.removed_normal + r.stats.removed_intrusion, 0u);
  EXPECT_EQ(r.original.sequences, r.processed.sequences);
  EXPECT_EQ(r.processed.provenance, Provenance::processed);
}

TEST(RunPipeline, IdenticalClassesFailAtBalance) {
  SynthSpec spec;
  spec.name = "same";
  spec.traces_per_class = 30;
  spec.seed = 2;
  auto base = generate(spec);
  base.intrusion_traces = base.normal_traces;
  EXPECT_THROW(run_pipeline(base, PipelineConfig{}), PipelineError);
}

TEST(RunPipeline, DeterministicAndDedupOffKeepsOverlap) {
  SynthSpec spec;
  spec.name = "ov";
  spec.traces_per_class = 80;
  spec.signature_overlap = 0.5;
  spec.seed = 9;
  const auto ds = generate(spec);
  PipelineConfig cfg;
  cfg.seed = 4;
  const auto a = run_pipeline(ds, cfg);
  const auto b = run_pipeline(ds, cfg);
  EXPECT_EQ(a.split.train, b.split.train);
  EXPECT_EQ(a.split.test, b.split.test);
  EXPECT_GT(a.stats.removed_normal + a.stats.removed_intrusion, 0u);
  cfg.dedup = false;
  const auto c = run_pipeline(ds, cfg);
  EXPECT_EQ(c.processed.sequences, c.original.sequences);
}

TEST(PoolCsv, Format) {
  SequencePool p;
  p.sequences = {{seq({1, 2, 3}), kIntrusion}};
  std::ostringstream out;
  write_pool_csv(p, out);
  EXPECT_EQ(out.str(), "g1,g2,g3,label\n1,2,3,1\n");
}
