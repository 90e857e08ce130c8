#pragma once

// Computable data-quality measurements, the per-dataset scorecard and the
// original-vs-processed comparison. Reputation, relevance, timeliness and
// context are declared in the manifest, never computed.

#include <array>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "hidsq/corpus.hpp"
#include "hidsq/metrics.hpp"
#include "hidsq/preprocess.hpp"

namespace hidsq {

// 1 - distinct / total. Throws std::invalid_argument on empty input.
double duplication_rate(std::span<const Sequence> seqs);

// |distinct(N) ∩ distinct(I)| / |distinct(N) ∪ distinct(I)|. Throws
// std::invalid_argument if either side is empty.
double cross_class_overlap(std::span<const Sequence> normal, std::span<const Sequence> intrusion);

// minority / majority. Throws std::invalid_argument if a class is missing.
double class_balance(const SequencePool& pool);

struct Variety {
  std::size_t distinct_grams = 0;
  std::size_t observed_vocabulary = 0;  // distinct syscall ids anywhere
  double vocabulary_coverage = 0.0;     // ids < vocab_size observed / vocab_size
  std::vector<double> position_coverage;  // per gram position, same ratio
};

// Throws std::invalid_argument if vocab_size == 0.
Variety variety(std::span<const Sequence> seqs, std::size_t vocab_size);

struct ConsistencyReport {
  std::size_t out_of_range = 0;
  // UNM only: pids whose records appear in more than one trace file. Grouping
  // is per file, so such a pid would be split into unrelated processes.
  std::size_t interleaving = 0;
  std::size_t total() const noexcept { return out_of_range + interleaving; }
};

ConsistencyReport consistency_check(const RawDataset& ds, Syscall max_syscall);

inline constexpr const char* kUndeclared = "undeclared";
inline constexpr std::array<const char*, 4> kDeclaredKeys = {"reputation", "relevance", "timeliness", "context"};

struct QualityScorecard {
  std::string dataset;
  Provenance provenance = Provenance::original;
  std::size_t n_normal = 0;
  std::size_t n_intrusion = 0;
  double duplication_normal = 0.0;
  double duplication_intrusion = 0.0;
  double cross_class_overlap = 0.0;
  double class_balance = 0.0;
  Variety variety;
  ConsistencyReport consistency;
  double train_test_value_overlap = 0.0;
  std::map<std::string, std::string> declared;  // kDeclaredKeys, verbatim or kUndeclared
};

// `pool` is the labeled, pre-balance pool of one provenance and `split` the
// split cut from its balanced version. vocab_size defaults to max_syscall + 1.
QualityScorecard scorecard(const RawDataset& ds, const SequencePool& pool, const PreparedSplit& split,
                           Syscall max_syscall);

struct BeforeAfterRow {
  std::string dataset;
  double avg_recall_orig = 0.0;
  double avg_recall_proc = 0.0;
  double avg_fpr_orig = 0.0;
  double avg_fpr_proc = 0.0;
  double fpr_ratio = 0.0;     // fpr_orig / max(fpr_proc, eps)
  double recall_ratio = 0.0;  // recall_proc / max(recall_orig, eps)
  double epsilon = 0.0;       // ratio_epsilon(mean n_neg of processed reports)
  std::size_t models = 0;     // processed reports averaged
};

// One row per dataset, sorted by name. Throws ValidationError naming the
// dataset when either provenance has no reports.
std::vector<BeforeAfterRow> before_after(std::span<const MetricsReport> reports);

void write_scorecard_csv(std::span<const QualityScorecard> cards, std::ostream& out);
void write_before_after_csv(std::span<const BeforeAfterRow> rows, std::ostream& out);

}  // namespace hidsq
