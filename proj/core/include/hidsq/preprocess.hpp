#pragma once

// Data preparation: PID grouping, n-gram tokenization, cross-class
// de-duplication, bootstrap balancing and stratified train/test splitting.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "hidsq/corpus.hpp"

namespace hidsq {

using Label = std::uint8_t;
inline constexpr Label kNormal = 0;
inline constexpr Label kIntrusion = 1;

struct Sequence {
  std::vector<Syscall> grams;

  std::size_t size() const noexcept { return grams.size(); }
  friend bool operator==(const Sequence&, const Sequence&) = default;
  friend auto operator<=>(const Sequence&, const Sequence&) = default;
};

struct SequenceHash {
  std::size_t operator()(const Sequence& s) const noexcept;
};

struct LabeledSequence {
  Sequence seq;
  Label label = kNormal;

  friend bool operator==(const LabeledSequence&, const LabeledSequence&) = default;
};

enum class Provenance { original, processed };
std::string_view to_string(Provenance p);
Provenance parse_provenance(std::string_view s);

struct ClassCounts {
  std::size_t normal = 0;
  std::size_t intrusion = 0;
  std::size_t total() const noexcept { return normal + intrusion; }
};

struct SequencePool {
  std::vector<LabeledSequence> sequences;
  Provenance provenance = Provenance::original;

  ClassCounts counts() const;
  std::vector<Sequence> of_class(Label label) const;
};

struct PreparedSplit {
  std::vector<LabeledSequence> train;
  std::vector<LabeledSequence> test;
  // Indices into the pool the split was cut from; ascending within each.
  std::vector<std::size_t> train_indices;
  std::vector<std::size_t> test_indices;
  std::uint64_t seed = 0;
  double ratio = 0.7;
};

enum class BalancePolicy { bootstrap_to_max, none };
std::string_view to_string(BalancePolicy b);
BalancePolicy parse_balance_policy(std::string_view s);

struct PipelineConfig {
  std::size_t n = 6;
  std::size_t stride = 1;
  BalancePolicy balance = BalancePolicy::bootstrap_to_max;
  double ratio = 0.7;
  std::uint64_t seed = 0;
  bool dedup = true;

  // Throws std::invalid_argument unless n >= 1, 1 <= stride <= n, 0 < ratio < 1.
  void validate() const;
};

// One trace per distinct pid, in order of first appearance; events keep
// record order. source_id is "<source>#pid=<pid>".
std::vector<Trace> group_by_pid(std::span<const SyscallRecord> records,
                                std::string_view source = "");

// Windows at offsets 0, stride, 2*stride, ...; traces shorter than n yield
// nothing.
std::vector<Sequence> tokenize_ngrams(std::span<const Syscall> events, std::size_t n,
                                      std::size_t stride);
inline std::vector<Sequence> tokenize_ngrams(const Trace& trace, std::size_t n,
                                             std::size_t stride) {
  return tokenize_ngrams(std::span<const Syscall>(trace.events), n, stride);
}

// Removes every value present in both classes (all occurrences) from both
// outputs. Within-class repeats of surviving values are kept.
std::pair<std::vector<Sequence>, std::vector<Sequence>> dedup_cross_class(
    const std::vector<Sequence>& normal, const std::vector<Sequence>& intrusion);

// Keeps every original item and appends (majority - minority) draws with
// replacement from the minority class. Throws PipelineError on an empty class.
SequencePool bootstrap_balance(const SequencePool& pool, std::uint64_t seed);

// Stratified: per class, seeded shuffle then cut floor(ratio * count) into
// train. Throws PipelineError if a class has fewer than 2 items.
PreparedSplit split_train_test(const SequencePool& pool, double ratio, std::uint64_t seed);

// Fraction of test items whose sequence value also occurs in train.
double train_test_value_overlap(const PreparedSplit& split);

struct PipelineStats {
  std::size_t normal_traces = 0;
  std::size_t intrusion_traces = 0;
  std::size_t short_traces_dropped = 0;  // shorter than n
  std::size_t removed_normal = 0;        // by cross-class dedup
  std::size_t removed_intrusion = 0;
  std::size_t bootstrap_added = 0;
  double train_test_value_overlap = 0.0;
};

struct PreparedPools {
  SequencePool original;   // labeled grams before any cleaning
  SequencePool processed;  // after dedup (== original content when dedup is off)
  PipelineStats stats;
};

struct PipelineResult {
  PreparedSplit split;
  SequencePool original;
  SequencePool processed;
  PipelineStats stats;
};

// group_by_pid (UNM only) -> tokenize -> label -> dedup (optional).
PreparedPools prepare_pools(const RawDataset& ds, const PipelineConfig& cfg);

// prepare_pools -> balance -> split. Stage seeds are derive_seed(cfg.seed,
// "balance") and derive_seed(cfg.seed, "split").
PipelineResult run_pipeline(const RawDataset& ds, const PipelineConfig& cfg);

// CSV: g1..gn,label
void write_pool_csv(const SequencePool& pool, std::ostream& out);

}  // namespace hidsq
