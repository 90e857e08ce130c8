#pragma once

// Self-contained SVG figures: overlaid per-syscall histograms, multi-series
// ROC curves and the original-vs-processed clustered bar chart. Every
// plotted number is also emitted as a data-value attribute with the same
// six-decimal text as the CSV it came from.

#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "hidsq/csv.hpp"
#include "hidsq/metrics.hpp"
#include "hidsq/quality.hpp"

namespace hidsq {

struct SyscallHistogram {
  std::vector<Syscall> ids;  // ascending
  std::vector<std::size_t> normal;
  std::vector<std::size_t> intrusion;
};

// Occurrences of each syscall id over every gram position, per class.
// Throws PipelineError on an empty pool.
SyscallHistogram histogram_counts(const SequencePool& pool);
void write_histogram_csv(const SyscallHistogram& h, std::ostream& out);
SyscallHistogram histogram_from_csv(const CsvTable& t);
std::string render_histogram_svg(const SyscallHistogram& h, std::string_view title);

struct RocSeries {
  std::string model;
  double auc = 0.0;
  std::vector<RocPoint> points;
};

RocSeries roc_series_from_csv(std::string model, double auc, const CsvTable& roc);
std::string render_roc_svg(std::span<const RocSeries> series, std::string_view title);

// Datasets by descending avg_fpr_orig, ties by name.
std::vector<BeforeAfterRow> bar_order(std::span<const BeforeAfterRow> rows);
std::vector<BeforeAfterRow> before_after_from_csv(const CsvTable& t);
std::string render_bars_svg(std::span<const BeforeAfterRow> rows, std::string_view title);

}  // namespace hidsq
