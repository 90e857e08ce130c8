#include "hidsq/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <ostream>
#include <stdexcept>

#include <fmt/format.h>

namespace hidsq {

ConfusionMatrix confusion(std::span<const Label> y_true, std::span<const Label> y_pred) {
  if (y_true.size() != y_pred.size()) {
    throw std::invalid_argument(fmt::format("confusion: {} labels vs {} predictions", y_true.size(), y_pred.size()));
  }
  ConfusionMatrix cm;
  for (std::size_t i = 0; i < y_true.size(); ++i) {
    if (y_true[i] > 1 || y_pred[i] > 1) throw std::invalid_argument("confusion: labels must be 0 or 1");
    if (y_true[i] == kIntrusion) {
      (y_pred[i] == kIntrusion ? cm.tp : cm.fn)++;
    } else {
      (y_pred[i] == kIntrusion ? cm.fp : cm.tn)++;
    }
  }
  return cm;
}

namespace {

double ratio(std::size_t num, std::size_t den, const char* name, Rates& r) {
  if (den == 0) {
    r.undefined_ratio = true;
    r.warnings.push_back(std::string(name) + " is 0/0, reported as 0");
    return 0.0;
  }
  return static_cast<double>(num) / static_cast<double>(den);
}

double f1(double p, double r) { return p + r > 0.0 ? 2.0 * p * r / (p + r) : 0.0; }

}  // namespace

Rates classification_metrics(const ConfusionMatrix& cm) {
  if (cm.total() == 0) throw std::invalid_argument("classification_metrics: empty confusion matrix");
  Rates r;
  r.accuracy = static_cast<double>(cm.tp + cm.tn) / static_cast<double>(cm.total());
  r.precision = ratio(cm.tp, cm.tp + cm.fp, "precision", r);
  r.recall = ratio(cm.tp, cm.tp + cm.fn, "recall", r);
  r.fpr = ratio(cm.fp, cm.fp + cm.tn, "fpr", r);
  // Class 0 viewed as the positive class.
  Rates scratch;
  const double precision0 = ratio(cm.tn, cm.tn + cm.fn, "precision0", scratch);
  const double recall0 = ratio(cm.tn, cm.tn + cm.fp, "recall0", scratch);
  r.macro_f1 = (f1(r.precision, r.recall) + f1(precision0, recall0)) / 2.0;
  return r;
}

namespace {

struct Counts {
  std::size_t pos = 0;
  std::size_t neg = 0;
};

Counts check_binary(std::span<const Label> y, std::span<const double> s, const char* who) {
  if (y.size() != s.size()) {
    throw std::invalid_argument(fmt::format("{}: {} labels vs {} scores", who, y.size(), s.size()));
  }
  Counts c;
  for (Label l : y) {
    if (l > 1) throw std::invalid_argument(std::string(who) + ": labels must be 0 or 1");
    (l == kIntrusion ? c.pos : c.neg)++;
  }
  if (c.pos == 0 || c.neg == 0) throw std::invalid_argument(std::string(who) + ": both classes must be present");
  return c;
}

// Cumulative (tp, fp) after each distinct-score step, descending.
struct Step {
  double score;
  std::size_t tp;
  std::size_t fp;
};

std::vector<Step> sweep(std::span<const Label> y, std::span<const double> s) {
  std::vector<std::size_t> order(y.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return s[a] > s[b]; });
  std::vector<Step> steps;
  std::size_t tp = 0, fp = 0;
  for (std::size_t k = 0; k < order.size(); ++k) {
    (y[order[k]] == kIntrusion ? tp : fp)++;
    if (k + 1 == order.size() || s[order[k + 1]] != s[order[k]]) steps.push_back({s[order[k]], tp, fp});
  }
  return steps;
}

}  // namespace

RocCurve roc_curve(std::span<const Label> y_true, std::span<const double> scores) {
  const Counts c = check_binary(y_true, scores, "roc_curve");
  RocCurve curve;
  curve.points.push_back({0.0, 0.0});
  curve.thresholds.push_back(std::numeric_limits<double>::infinity());
  for (const auto& st : sweep(y_true, scores)) {
    curve.points.push_back({static_cast<double>(st.fp) / static_cast<double>(c.neg),
                            static_cast<double>(st.tp) / static_cast<double>(c.pos)});
    curve.thresholds.push_back(st.score);
  }
  return curve;
}

double auc(std::span<const Label> y_true, std::span<const double> scores) {
  const Counts c = check_binary(y_true, scores, "auc");
  // Twice the area in units of 1/(pos*neg): sum of dfp * (tp_prev + tp).
  // Exact in integers, so the result equals the pair-counting statistic up
  // to one final division.
  __extension__ typedef unsigned __int128 u128;
  u128 twice = 0;
  std::size_t tp_prev = 0, fp_prev = 0;
  for (const auto& st : sweep(y_true, scores)) {
    twice += static_cast<u128>(st.fp - fp_prev) * (tp_prev + st.tp);
    tp_prev = st.tp;
    fp_prev = st.fp;
  }
  return static_cast<double>(twice) / (2.0 * static_cast<double>(c.pos) * static_cast<double>(c.neg));
}

LogRatio log_ratio(double recall, double fpr, std::size_t n_neg) {
  if (n_neg == 0) throw std::invalid_argument("log_ratio: n_neg must be > 0");
  if (!(recall >= 0.0 && recall <= 1.0) || !(fpr >= 0.0 && fpr <= 1.0)) {
    throw std::invalid_argument("log_ratio: recall and fpr must be in [0, 1]");
  }
  const double eps = 1.0 / (2.0 * static_cast<double>(n_neg));
  return {std::log10(std::max(recall, eps) / std::max(fpr, eps)), eps};
}

MetricsReport evaluate(std::span<const Label> y_true, std::span<const double> scores,
                       std::span<const Label> y_pred) {
  MetricsReport r;
  r.cm = confusion(y_true, y_pred);
  r.rates = classification_metrics(r.cm);
  r.n_pos = r.cm.tp + r.cm.fn;
  r.n_neg = r.cm.fp + r.cm.tn;
  r.auc = auc(y_true, scores);
  const LogRatio lr = log_ratio(r.rates.recall, r.rates.fpr, r.n_neg);
  r.log_ratio = lr.value;
  r.epsilon = lr.epsilon;
  for (const auto& w : r.rates.warnings) r.warning += (r.warning.empty() ? "" : "; ") + w;
  return r;
}

namespace {

const std::string& key_of(const MetricsReport& r, GroupBy g) {
  switch (g) {
    case GroupBy::model:
      return r.model;
    case GroupBy::dataset:
      return r.dataset;
    case GroupBy::provenance:
      return r.provenance;
  }
  return r.model;
}

struct Sums {
  double accuracy = 0, precision = 0, recall = 0, fpr = 0, macro_f1 = 0, auc = 0, log_ratio = 0, n_neg = 0;
  std::size_t n = 0;

  void add(const MetricsReport& r) {
    accuracy += r.rates.accuracy;
    precision += r.rates.precision;
    recall += r.rates.recall;
    fpr += r.rates.fpr;
    macro_f1 += r.rates.macro_f1;
    auc += r.auc;
    log_ratio += r.log_ratio;
    n_neg += static_cast<double>(r.n_neg);
    ++n;
  }
  double mean(double s) const { return s / static_cast<double>(n); }
};

}  // namespace

double ratio_epsilon(double mean_n_neg) {
  if (!(mean_n_neg > 0.0)) throw std::invalid_argument("ratio_epsilon: mean n_neg must be > 0");
  return 1.0 / (2.0 * mean_n_neg);
}

std::vector<SummaryRow> aggregate(std::span<const MetricsReport> reports, GroupBy group_by) {
  if (reports.empty()) throw std::invalid_argument("aggregate: no reports");
  std::map<std::string, Sums> groups;
  std::map<std::string, std::map<std::string, Sums>> by_dataset;
  for (const auto& r : reports) {
    groups[key_of(r, group_by)].add(r);
    by_dataset[r.dataset][r.provenance].add(r);
  }
  std::vector<SummaryRow> rows;
  for (const auto& [key, s] : groups) {
    const std::pair<const char*, double> metrics[] = {
        {"accuracy", s.accuracy}, {"precision", s.precision}, {"recall", s.recall},
        {"fpr", s.fpr},           {"macro_f1", s.macro_f1},   {"auc", s.auc},
        {"log_ratio", s.log_ratio}};
    for (const auto& [name, sum] : metrics) rows.push_back({"mean", key, name, s.mean(sum), s.n});
  }
  for (const auto& [ds, provs] : by_dataset) {
    auto o = provs.find("original");
    auto p = provs.find("processed");
    if (o == provs.end() || p == provs.end()) continue;
    const double eps = ratio_epsilon(p->second.mean(p->second.n_neg));
    const double fpr_o = o->second.mean(o->second.fpr), fpr_p = p->second.mean(p->second.fpr);
    const double rec_o = o->second.mean(o->second.recall), rec_p = p->second.mean(p->second.recall);
    const std::size_t n = o->second.n + p->second.n;
    rows.push_back({"ratio", ds, "fpr_ratio", fpr_o / std::max(fpr_p, eps), n});
    rows.push_back({"ratio", ds, "recall_ratio", rec_p / std::max(rec_o, eps), n});
  }
  return rows;
}

namespace {

std::string num(double v) { return fmt::format("{:.6f}", v); }

}  // namespace

void write_metrics_csv(std::span<const MetricsReport> reports, std::ostream& out) {
  out << kMetricsSchema << '\n';
  out << "dataset,provenance,model,tp,fn,fp,tn,accuracy,precision,recall,fpr,macro_f1,auc,log_ratio,epsilon,"
         "n_pos,n_neg,params,warning\n";
  for (const auto& r : reports) {
    out << r.dataset << ',' << r.provenance << ',' << r.model << ',' << r.cm.tp << ',' << r.cm.fn << ','
        << r.cm.fp << ',' << r.cm.tn << ',' << num(r.rates.accuracy) << ',' << num(r.rates.precision) << ','
        << num(r.rates.recall) << ',' << num(r.rates.fpr) << ',' << num(r.rates.macro_f1) << ',' << num(r.auc)
        << ',' << num(r.log_ratio) << ',' << num(r.epsilon) << ',' << r.n_pos << ',' << r.n_neg << ",\""
        << r.params << "\",\"" << r.warning << "\"\n";
  }
}

void write_roc_csv(const RocCurve& curve, std::ostream& out) {
  out << "threshold,fpr,tpr\n";
  for (std::size_t i = 0; i < curve.points.size(); ++i) {
    const double t = curve.thresholds[i];
    out << (std::isinf(t) ? std::string("inf") : fmt::format("{:.17g}", t)) << ',' << num(curve.points[i].fpr)
        << ',' << num(curve.points[i].tpr) << '\n';
  }
}

void write_summary_csv(std::span<const SummaryRow> rows, std::ostream& out) {
  out << "kind,key,metric,value,count\n";
  for (const auto& r : rows) out << r.kind << ',' << r.key << ',' << r.metric << ',' << num(r.value) << ',' << r.count << '\n';
}

}  // namespace hidsq
