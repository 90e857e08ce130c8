#include <gtest/gtest.h>

#include <set>

#include "hidsq/error.hpp"
#include "hidsq/manifest.hpp"
#include "hidsq/quality.hpp"
#include "hidsq/synth.hpp"
#include "support.hpp"

using namespace hidsq;

namespace {

// 100 normal and 100 intrusion single-event traces, all distinct.
RawDataset singles() {
  RawDataset ds;
  ds.manifest.name = "singles";
  ds.manifest.format = TraceFormat::unm;
  for (Syscall i = 0; i < 200; ++i) {
    Trace t = unm_records_to_trace({{1000 + i, i}}, "t" + std::to_string(i));
    (i < 100 ? ds.normal_traces : ds.intrusion_traces).push_back(t);
  }
  return ds;
}

std::vector<Sequence> class_grams(const std::vector<Trace>& ts) {
  std::vector<Sequence> out;
  for (const auto& t : ts)
    for (auto& g : tokenize_ngrams(t, 1, 1)) out.push_back(g);
  return out;
}

}  // namespace

TEST(Chains, RowsStochastic) {
  for (double ov : {0.0, 0.3, 1.0}) {
    SynthSpec s;
    s.signature_overlap = ov;
    s.branching = 2;
    const auto c = build_chains(s);
    EXPECT_NO_THROW(validate_transition_table(c.normal, s.vocab_size));
    EXPECT_NO_THROW(validate_transition_table(c.intrusion, s.vocab_size));
    std::set<Syscall> ids(c.ids.begin(), c.ids.end());
    EXPECT_EQ(ids.size(), s.vocab_size);
  }
}

TEST(Chains, BadTablesRejected) {
  TransitionTable t = {{0.5, 0.5}, {0.2, 0.7}};
  EXPECT_THROW(validate_transition_table(t, 2), ValidationError);
  t = {{1.0}, {1.0}};
  EXPECT_THROW(validate_transition_table(t, 2), ValidationError);
  t = {{1.5, -0.5}, {0.0, 1.0}};
  EXPECT_THROW(validate_transition_table(t, 2), ValidationError);
  SynthSpec s;
  s.vocab_size = 2;
  s.normal_chain = TransitionTable{{0.5, 0.5}, {0.2, 0.7}};
  s.intrusion_chain = TransitionTable{{0.5, 0.5}, {0.5, 0.5}};
  EXPECT_THROW(generate(s), ValidationError);
  SynthSpec o;
  o.signature_overlap = 1.5;
  EXPECT_THROW(o.validate(), ValidationError);
}

TEST(Generate, PureFunctionOfSpec) {
  SynthSpec s;
  s.traces_per_class = 50;
  s.signature_overlap = 0.2;
  s.seed = 4;
  const auto a = generate(s);
  const auto b = generate(s);
  EXPECT_EQ(a.normal_traces, b.normal_traces);
  EXPECT_EQ(a.intrusion_traces, b.intrusion_traces);
  s.seed = 5;
  EXPECT_NE(generate(s).normal_traces, a.normal_traces);
  EXPECT_EQ(a.normal_traces.size(), 50u);
  std::set<Pid> pids;
  for (const auto* cls : {&a.normal_traces, &a.intrusion_traces})
    for (const auto& t : *cls) {
      EXPECT_GE(t.events.size(), s.min_length);
      EXPECT_LE(t.events.size(), s.max_length);
      ASSERT_TRUE(t.has_pids());
      EXPECT_TRUE(pids.insert(t.pids[0]).second);
    }
}

TEST(Generate, ZeroOverlapMeansNothingToDedup) {
  SynthSpec s;
  s.traces_per_class = 100;
  s.seed = 3;
  const auto ds = generate(s);
  PipelineConfig off;
  off.dedup = false;
  const auto r = run_pipeline(ds, off);
  EXPECT_EQ(cross_class_overlap(r.original.of_class(kNormal), r.original.of_class(kIntrusion)), 0.0);
}

TEST(Generate, IdenticalChainsEmptyBothClasses) {
  SynthSpec s;
  s.vocab_size = 6;
  s.traces_per_class = 60;
  s.min_length = 30;
  s.max_length = 40;
  TransitionTable t(6, std::vector<double>(6, 0.0));
  for (std::size_t i = 0; i < 6; ++i) t[i][(i + 1) % 6] = 1.0;
  s.normal_chain = t;
  s.intrusion_chain = t;
  EXPECT_THROW(run_pipeline(generate(s), PipelineConfig{}), PipelineError);

  SynthSpec full;
  full.traces_per_class = 200;
  full.signature_overlap = 1.0;
  const auto c = build_chains(full);
  EXPECT_EQ(c.normal, c.intrusion);
  EXPECT_THROW(run_pipeline(generate(full), PipelineConfig{}), PipelineError);
}

TEST(WriteCorpus, ByteIdenticalAndLoadable) {
  SynthSpec s;
  s.traces_per_class = 30;
  s.seed = 8;
  hidsq::testing::TempDir a("synth-a"), b("synth-b");
  const auto ma = write_corpus(generate(s), a.path());
  write_corpus(generate(s), b.path());
  EXPECT_EQ(hidsq::testing::snapshot(a.path()), hidsq::testing::snapshot(b.path()));
  const auto mf = load_manifest(ma);
  const auto ds = load_dataset(mf.dataset);
  const auto orig = generate(s);
  // files hold interleaved pids; grouping recovers the generated traces
  PipelineConfig cfg;
  const auto p1 = run_pipeline(ds, cfg);
  const auto p2 = run_pipeline(orig, cfg);
  auto sorted = [](std::vector<LabeledSequence> v) {
    std::sort(v.begin(), v.end(), [](const auto& x, const auto& y) {
      return std::tie(x.label, x.seq) < std::tie(y.label, y.seq);
    });
    return v;
  };
  EXPECT_EQ(sorted(p1.original.sequences), sorted(p2.original.sequences));
  EXPECT_EQ(validate_dataset(ds, 512).out_of_range.size(), 0u);
}

TEST(Defects, NeutralIsIdentity) {
  const auto ds = singles();
  const auto out = inject_defects(ds, Defects{}, 1);
  EXPECT_EQ(out.normal_traces, ds.normal_traces);
  EXPECT_EQ(out.intrusion_traces, ds.intrusion_traces);
}

TEST(Defects, ImbalanceCounts) {
  Defects d;
  d.imbalance_factor = 0.4;
  const auto out = inject_defects(singles(), d, 1);
  EXPECT_EQ(out.normal_traces.size(), 100u);
  EXPECT_EQ(out.intrusion_traces.size(), 40u);
}

TEST(Defects, DuplicateRateRecovered) {
  Defects d;
  d.duplicate_injection_rate = 0.25;
  const auto out = inject_defects(singles(), d, 2);
  for (const auto* cls : {&out.normal_traces, &out.intrusion_traces}) {
    const auto g = class_grams(*cls);
    const double measured = duplication_rate(g);
    EXPECT_LE(std::abs(measured - 0.25), 1.0 / static_cast<double>(g.size()));
  }
  d.duplicate_injection_rate = 1.0;
  EXPECT_THROW(inject_defects(singles(), d, 2), std::invalid_argument);
}

TEST(Defects, FlipsMoveWholeTraces) {
  Defects d;
  d.label_flip_rate = 0.1;
  const auto ds = singles();
  const auto out = inject_defects(ds, d, 3);
  EXPECT_EQ(out.normal_traces.size() + out.intrusion_traces.size(), 200u);
  std::size_t moved = 0;
  for (const auto& t : out.normal_traces) moved += t.events[0] >= 100;
  EXPECT_EQ(moved, 10u);
}

TEST(SpecJson, RoundTrip) {
  SynthSpec s;
  s.name = "x";
  s.vocab_size = 30;
  s.signature_overlap = 0.25;
  s.defects.duplicate_injection_rate = 0.1;
  s.seed = 77;
  const auto back = synth_spec_from_json(synth_spec_to_json(s));
  EXPECT_EQ(synth_spec_to_json(back), synth_spec_to_json(s));
  EXPECT_EQ(back.seed, 77u);
}
