#pragma once

// Confusion-derived rates, ROC / AUC, the log recall/FPR ratio and
// aggregation across evaluation cells. Positive class = intrusion = 1.

#include <cstddef>
#include <iosfwd>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "hidsq/preprocess.hpp"

namespace hidsq {

struct ConfusionMatrix {
  std::size_t tp = 0;
  std::size_t fn = 0;
  std::size_t fp = 0;
  std::size_t tn = 0;

  std::size_t total() const noexcept { return tp + fn + fp + tn; }
  friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;
};

// Throws std::invalid_argument on a length mismatch or a label outside {0,1}.
ConfusionMatrix confusion(std::span<const Label> y_true, std::span<const Label> y_pred);

struct Rates {
  double accuracy = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double fpr = 0.0;
  double macro_f1 = 0.0;
  // Set when any ratio was 0/0 and defined as 0.
  bool undefined_ratio = false;
  std::vector<std::string> warnings;
};

// Throws std::invalid_argument on an empty matrix.
Rates classification_metrics(const ConfusionMatrix& cm);

struct RocPoint {
  double fpr = 0.0;
  double tpr = 0.0;
};

struct RocCurve {
  std::vector<RocPoint> points;
  // thresholds[i] is the score cut producing points[i] (predict score >= cut);
  // the first is +infinity.
  std::vector<double> thresholds;
};

// Distinct scores swept in descending order; tied scores form one step.
// Throws std::invalid_argument on a length mismatch or single-class input.
RocCurve roc_curve(std::span<const Label> y_true, std::span<const double> scores);

// Trapezoidal area under roc_curve, accumulated on integer counts.
double auc(std::span<const Label> y_true, std::span<const double> scores);

struct LogRatio {
  double value = 0.0;
  double epsilon = 0.0;  // 1 / (2 n_neg)
};

// log10(max(recall, eps) / max(fpr, eps)), eps = 1 / (2 n_neg).
LogRatio log_ratio(double recall, double fpr, std::size_t n_neg);

struct MetricsReport {
  std::string dataset;
  std::string provenance;  // "original" / "processed"
  std::string model;       // model kind or external model name
  std::string params;      // ModelSpec::describe() or external command
  ConfusionMatrix cm;
  Rates rates;
  double auc = 0.0;
  double log_ratio = 0.0;
  double epsilon = 0.0;
  std::size_t n_pos = 0;
  std::size_t n_neg = 0;
  std::string warning;
};

// Full report for one cell from test labels, scores and predicted labels.
MetricsReport evaluate(std::span<const Label> y_true, std::span<const double> scores,
                       std::span<const Label> y_pred);

// Denominator floor for original/processed ratios: 1 / (2 mean_n_neg).
double ratio_epsilon(double mean_n_neg);

enum class GroupBy { model, dataset, provenance };

struct SummaryRow {
  std::string kind;  // "mean" or "ratio"
  std::string key;   // group value; for ratio rows the dataset name
  std::string metric;
  double value = 0.0;
  std::size_t count = 0;  // reports averaged
};

// Means of accuracy, precision, recall, fpr, macro_f1, auc and log_ratio per
// group (groups sorted by key), followed by original/processed ratio rows per
// dataset: fpr_ratio = fpr_orig / fpr_proc and recall_ratio = recall_proc /
// recall_orig, each denominator floored at ratio_epsilon(mean n_neg of the
// dataset's processed reports). Throws std::invalid_argument on empty input.
std::vector<SummaryRow> aggregate(std::span<const MetricsReport> reports, GroupBy group_by);

// Header written as the first line of metrics CSV files.
inline constexpr const char* kMetricsSchema = "#schema=hidsq.metrics/1";

void write_metrics_csv(std::span<const MetricsReport> reports, std::ostream& out);
void write_roc_csv(const RocCurve& curve, std::ostream& out);
void write_summary_csv(std::span<const SummaryRow> rows, std::ostream& out);

}  // namespace hidsq
