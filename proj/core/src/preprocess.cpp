#include "hidsq/preprocess.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <unordered_set>

#include "hidsq/error.hpp"
#include "hidsq/rng.hpp"

namespace hidsq {

std::size_t SequenceHash::operator()(const Sequence& s) const noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (Syscall v : s.grams) {
    h ^= v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    h *= 0x100000001b3ULL;
  }
  return static_cast<std::size_t>(h);
}

std::string_view to_string(Provenance p) {
  return p == Provenance::original ? "original" : "processed";
}

Provenance parse_provenance(std::string_view s) {
  if (s == "original") return Provenance::original;
  if (s == "processed") return Provenance::processed;
  throw ValidationError("unknown provenance '" + std::string(s) + "'");
}

std::string_view to_string(BalancePolicy b) {
  return b == BalancePolicy::bootstrap_to_max ? "bootstrap_to_max" : "none";
}

BalancePolicy parse_balance_policy(std::string_view s) {
  if (s == "bootstrap_to_max") return BalancePolicy::bootstrap_to_max;
  if (s == "none") return BalancePolicy::none;
  throw ValidationError("unknown balance policy '" + std::string(s) +
                        "' (expected bootstrap_to_max or none)");
}

void PipelineConfig::validate() const {
  if (n < 1) throw std::invalid_argument("pipeline: n must be >= 1");
  if (stride < 1 || stride > n) throw std::invalid_argument("pipeline: stride must be in [1, n]");
  if (!(ratio > 0.0 && ratio < 1.0)) throw std::invalid_argument("pipeline: ratio must be in (0, 1)");
}

ClassCounts SequencePool::counts() const {
  ClassCounts c;
  for (const auto& s : sequences) (s.label == kIntrusion ? c.intrusion : c.normal)++;
  return c;
}

std::vector<Sequence> SequencePool::of_class(Label label) const {
  std::vector<Sequence> out;
  for (const auto& s : sequences) {
    if (s.label == label) out.push_back(s.seq);
  }
  return out;
}

std::vector<Trace> group_by_pid(std::span<const SyscallRecord> records, std::string_view source) {
  std::vector<Trace> traces;
  std::unordered_map<Pid, std::size_t> slot;
  for (const auto& r : records) {
    auto [it, inserted] = slot.try_emplace(r.pid, traces.size());
    if (inserted) {
      Trace t;
      t.source_id = std::string(source) + "#pid=" + std::to_string(r.pid);
      traces.push_back(std::move(t));
    }
    Trace& t = traces[it->second];
    t.events.push_back(r.syscall);
    t.pids.push_back(r.pid);
  }
  return traces;
}

std::vector<Sequence> tokenize_ngrams(std::span<const Syscall> events, std::size_t n,
                                      std::size_t stride) {
  if (n < 1 || stride < 1 || stride > n) {
    throw std::invalid_argument("tokenize_ngrams: need n >= 1 and 1 <= stride <= n");
  }
  std::vector<Sequence> out;
  if (events.size() < n) return out;
  out.reserve((events.size() - n) / stride + 1);
  for (std::size_t off = 0; off + n <= events.size(); off += stride) {
    out.push_back(Sequence{{events.begin() + off, events.begin() + off + n}});
  }
  return out;
}

std::pair<std::vector<Sequence>, std::vector<Sequence>> dedup_cross_class(
    const std::vector<Sequence>& normal, const std::vector<Sequence>& intrusion) {
  std::unordered_set<Sequence, SequenceHash> in_normal(normal.begin(), normal.end());
  std::unordered_set<Sequence, SequenceHash> shared;
  for (const auto& s : intrusion) {
    if (in_normal.count(s)) shared.insert(s);
  }
  auto keep = [&](const std::vector<Sequence>& src) {
    std::vector<Sequence> out;
    out.reserve(src.size());
    for (const auto& s : src) {
      if (!shared.count(s)) out.push_back(s);
    }
    return out;
  };
  return {keep(normal), keep(intrusion)};
}

SequencePool bootstrap_balance(const SequencePool& pool, std::uint64_t seed) {
  const ClassCounts c = pool.counts();
  if (c.normal == 0 || c.intrusion == 0) throw PipelineError("cannot balance: empty class");
  SequencePool out = pool;
  if (c.normal == c.intrusion) return out;
  const Label minority = c.normal < c.intrusion ? kNormal : kIntrusion;
  std::vector<std::size_t> minority_idx;
  for (std::size_t i = 0; i < pool.sequences.size(); ++i) {
    if (pool.sequences[i].label == minority) minority_idx.push_back(i);
  }
  const std::size_t deficit = std::max(c.normal, c.intrusion) - minority_idx.size();
  Rng rng(seed);
  out.sequences.reserve(pool.sequences.size() + deficit);
  for (std::size_t k = 0; k < deficit; ++k) {
    out.sequences.push_back(pool.sequences[minority_idx[rng.below(minority_idx.size())]]);
  }
  return out;
}

PreparedSplit split_train_test(const SequencePool& pool, double ratio, std::uint64_t seed) {
  if (!(ratio > 0.0 && ratio < 1.0)) throw std::invalid_argument("split: ratio must be in (0, 1)");
  if (pool.sequences.empty()) throw PipelineError("cannot split: empty pool");
  PreparedSplit split;
  split.seed = seed;
  split.ratio = ratio;
  Rng rng(seed);
  for (Label label : {kNormal, kIntrusion}) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < pool.sequences.size(); ++i) {
      if (pool.sequences[i].label == label) idx.push_back(i);
    }
    if (idx.size() < 2) {
      throw PipelineError("cannot stratify: class " + std::to_string(label) + " has " +
                          std::to_string(idx.size()) + " item(s)");
    }
    rng.shuffle(idx);
    // The epsilon keeps e.g. 0.7 * 7000 from flooring to 4899.
    const auto cut = static_cast<std::size_t>(std::floor(ratio * static_cast<double>(idx.size()) + 1e-9));
    split.train_indices.insert(split.train_indices.end(), idx.begin(), idx.begin() + cut);
    split.test_indices.insert(split.test_indices.end(), idx.begin() + cut, idx.end());
  }
  std::sort(split.train_indices.begin(), split.train_indices.end());
  std::sort(split.test_indices.begin(), split.test_indices.end());
  for (auto i : split.train_indices) split.train.push_back(pool.sequences[i]);
  for (auto i : split.test_indices) split.test.push_back(pool.sequences[i]);
  return split;
}

double train_test_value_overlap(const PreparedSplit& split) {
  if (split.test.empty()) return 0.0;
  std::unordered_set<Sequence, SequenceHash> train;
  for (const auto& s : split.train) train.insert(s.seq);
  std::size_t hits = 0;
  for (const auto& s : split.test) hits += train.count(s.seq);
  return static_cast<double>(hits) / static_cast<double>(split.test.size());
}

namespace {

void tokenize_class(const std::vector<Trace>& traces, TraceFormat format, const PipelineConfig& cfg,
                    std::vector<Sequence>& out, std::size_t& process_traces, std::size_t& short_dropped) {
  auto take = [&](const Trace& t) {
    ++process_traces;
    if (t.events.size() < cfg.n) {
      ++short_dropped;
      return;
    }
    auto grams = tokenize_ngrams(t, cfg.n, cfg.stride);
    out.insert(out.end(), std::make_move_iterator(grams.begin()), std::make_move_iterator(grams.end()));
  };
  for (const auto& t : traces) {
    if (format == TraceFormat::unm && t.has_pids()) {
      const auto records = trace_records(t);
      for (const auto& g : group_by_pid(records, t.source_id)) take(g);
    } else {
      take(t);
    }
  }
}

SequencePool label_pool(std::vector<Sequence> normal, std::vector<Sequence> intrusion, Provenance p) {
  SequencePool pool;
  pool.provenance = p;
  pool.sequences.reserve(normal.size() + intrusion.size());
  for (auto& s : normal) pool.sequences.push_back({std::move(s), kNormal});
  for (auto& s : intrusion) pool.sequences.push_back({std::move(s), kIntrusion});
  return pool;
}

}  // namespace

PreparedPools prepare_pools(const RawDataset& ds, const PipelineConfig& cfg) {
  cfg.validate();
  PreparedPools r;
  std::vector<Sequence> normal, intrusion;
  const TraceFormat fmt = ds.manifest.format;
  tokenize_class(ds.normal_traces, fmt, cfg, normal, r.stats.normal_traces, r.stats.short_traces_dropped);
  tokenize_class(ds.intrusion_traces, fmt, cfg, intrusion, r.stats.intrusion_traces,
                 r.stats.short_traces_dropped);

  r.original = label_pool(normal, intrusion, Provenance::original);
  if (cfg.dedup) {
    auto [n2, i2] = dedup_cross_class(normal, intrusion);
    r.stats.removed_normal = normal.size() - n2.size();
    r.stats.removed_intrusion = intrusion.size() - i2.size();
    r.processed = label_pool(std::move(n2), std::move(i2), Provenance::processed);
  } else {
    r.processed = r.original;
  }
  return r;
}

PipelineResult run_pipeline(const RawDataset& ds, const PipelineConfig& cfg) {
  PreparedPools pools = prepare_pools(ds, cfg);
  PipelineResult r;
  r.stats = pools.stats;
  SequencePool balanced = pools.processed;
  if (cfg.balance == BalancePolicy::bootstrap_to_max) {
    balanced = bootstrap_balance(pools.processed, derive_seed(cfg.seed, "balance"));
    r.stats.bootstrap_added = balanced.sequences.size() - pools.processed.sequences.size();
  }
  r.split = split_train_test(balanced, cfg.ratio, derive_seed(cfg.seed, "split"));
  r.stats.train_test_value_overlap = train_test_value_overlap(r.split);
  r.original = std::move(pools.original);
  r.processed = std::move(pools.processed);
  return r;
}

void write_pool_csv(const SequencePool& pool, std::ostream& out) {
  const std::size_t n = pool.sequences.empty() ? 0 : pool.sequences.front().seq.size();
  for (std::size_t i = 0; i < n; ++i) out << 'g' << (i + 1) << ',';
  out << "label\n";
  for (const auto& s : pool.sequences) {
    for (Syscall v : s.seq.grams) out << v << ',';
    out << static_cast<int>(s.label) << '\n';
  }
}

}  // namespace hidsq
