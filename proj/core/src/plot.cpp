#include "hidsq/plot.hpp"

#include <algorithm>
#include <map>
#include <ostream>

#include <fmt/format.h>

#include "hidsq/error.hpp"

namespace hidsq {

namespace {

constexpr double kWidth = 800, kHeight = 500;
constexpr double kLeft = 70, kRight = 200, kTop = 50, kBottom = 60;
constexpr double kPlotW = kWidth - kLeft - kRight, kPlotH = kHeight - kTop - kBottom;

constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd",
                                    "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

std::string esc(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&':
        out += "&amp;";
        break;
      case '<':
        out += "&lt;";
        break;
      case '>':
        out += "&gt;";
        break;
      case '"':
        out += "&quot;";
        break;
      default:
        out += c;
    }
  }
  return out;
}

std::string v6(double v) { return fmt::format("{:.6f}", v); }

class Svg {
 public:
  explicit Svg(std::string_view title) {
    s_ += fmt::format(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{:.0f}\" height=\"{:.0f}\" viewBox=\"0 0 {:.0f} {:.0f}\" "
        "font-family=\"sans-serif\" font-size=\"12\">\n",
        kWidth, kHeight, kWidth, kHeight);
    s_ += fmt::format("<rect width=\"{:.0f}\" height=\"{:.0f}\" fill=\"white\"/>\n", kWidth, kHeight);
    text(kWidth / 2, 25, title, "middle", 15);
  }
  void raw(const std::string& s) { s_ += s; }
  void text(double x, double y, std::string_view t, const char* anchor = "start", int size = 12) {
    s_ += fmt::format("<text x=\"{:.2f}\" y=\"{:.2f}\" text-anchor=\"{}\" font-size=\"{}\">{}</text>\n", x, y, anchor,
                      size, esc(t));
  }
  void line(double x1, double y1, double x2, double y2, const char* stroke = "black", const char* extra = "") {
    s_ += fmt::format("<line x1=\"{:.2f}\" y1=\"{:.2f}\" x2=\"{:.2f}\" y2=\"{:.2f}\" stroke=\"{}\"{}/>\n", x1, y1, x2,
                      y2, stroke, extra);
  }
  // Frame plus y ticks over [0, ymax].
  void axes(double ymax, std::string_view xlabel, std::string_view ylabel, int ticks = 5, bool integer = false) {
    line(kLeft, kTop + kPlotH, kLeft + kPlotW, kTop + kPlotH);
    line(kLeft, kTop, kLeft, kTop + kPlotH);
    for (int i = 0; i <= ticks; ++i) {
      const double v = ymax * i / ticks;
      const double y = kTop + kPlotH - kPlotH * i / ticks;
      line(kLeft - 4, y, kLeft, y);
      text(kLeft - 6, y + 4, integer ? fmt::format("{:.0f}", v) : fmt::format("{:.2f}", v), "end");
    }
    text(kLeft + kPlotW / 2, kHeight - 15, xlabel, "middle");
    s_ += fmt::format("<text x=\"18\" y=\"{:.2f}\" text-anchor=\"middle\" transform=\"rotate(-90 18 {:.2f})\">{}</text>\n",
                      kTop + kPlotH / 2, kTop + kPlotH / 2, esc(ylabel));
  }
  void legend(std::size_t i, const char* color, std::string_view label) {
    const double y = kTop + 10 + 20.0 * static_cast<double>(i);
    s_ += fmt::format("<rect x=\"{:.2f}\" y=\"{:.2f}\" width=\"12\" height=\"12\" fill=\"{}\"/>\n", kLeft + kPlotW + 15,
                      y - 10, color);
    text(kLeft + kPlotW + 32, y, label);
  }
  std::string finish() { return s_ + "</svg>\n"; }

 private:
  std::string s_;
};

}  // namespace

SyscallHistogram histogram_counts(const SequencePool& pool) {
  if (pool.sequences.empty()) throw PipelineError("histogram: empty pool");
  std::map<Syscall, std::pair<std::size_t, std::size_t>> counts;
  for (const auto& s : pool.sequences) {
    for (Syscall v : s.seq.grams) {
      auto& c = counts[v];
      (s.label == kIntrusion ? c.second : c.first)++;
    }
  }
  SyscallHistogram h;
  for (const auto& [id, c] : counts) {
    h.ids.push_back(id);
    h.normal.push_back(c.first);
    h.intrusion.push_back(c.second);
  }
  return h;
}

void write_histogram_csv(const SyscallHistogram& h, std::ostream& out) {
  out << "syscall,normal,intrusion\n";
  for (std::size_t i = 0; i < h.ids.size(); ++i) out << h.ids[i] << ',' << h.normal[i] << ',' << h.intrusion[i] << '\n';
}

SyscallHistogram histogram_from_csv(const CsvTable& t) {
  SyscallHistogram h;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    h.ids.push_back(std::stoull(t.at(r, "syscall")));
    h.normal.push_back(std::stoull(t.at(r, "normal")));
    h.intrusion.push_back(std::stoull(t.at(r, "intrusion")));
  }
  return h;
}

std::string render_histogram_svg(const SyscallHistogram& h, std::string_view title) {
  Svg svg(title);
  std::size_t ymax = 1;
  for (std::size_t i = 0; i < h.ids.size(); ++i) ymax = std::max({ymax, h.normal[i], h.intrusion[i]});
  svg.axes(static_cast<double>(ymax), "syscall id", "occurrences", 5, true);
  const double bw = h.ids.empty() ? 0.0 : kPlotW / static_cast<double>(h.ids.size());
  const char* colors[] = {kPalette[0], kPalette[1]};
  const char* names[] = {"normal", "intrusion"};
  for (int c = 0; c < 2; ++c) {
    const auto& counts = c == 0 ? h.normal : h.intrusion;
    for (std::size_t i = 0; i < h.ids.size(); ++i) {
      if (counts[i] == 0) continue;
      const double bh = kPlotH * static_cast<double>(counts[i]) / static_cast<double>(ymax);
      svg.raw(fmt::format("<rect class=\"{}\" x=\"{:.2f}\" y=\"{:.2f}\" width=\"{:.2f}\" height=\"{:.2f}\" fill=\"{}\" "
                          "fill-opacity=\"0.5\" data-syscall=\"{}\" data-value=\"{}\"/>\n",
                          names[c], kLeft + bw * static_cast<double>(i), kTop + kPlotH - bh, bw, bh, colors[c], h.ids[i],
                          counts[i]));
    }
  }
  const std::size_t step = std::max<std::size_t>(1, h.ids.size() / 20);
  for (std::size_t i = 0; i < h.ids.size(); i += step) {
    svg.text(kLeft + bw * (static_cast<double>(i) + 0.5), kTop + kPlotH + 15, std::to_string(h.ids[i]), "middle", 10);
  }
  svg.legend(0, colors[0], "normal");
  svg.legend(1, colors[1], "intrusion");
  return svg.finish();
}

RocSeries roc_series_from_csv(std::string model, double auc, const CsvTable& roc) {
  RocSeries s;
  s.model = std::move(model);
  s.auc = auc;
  for (std::size_t r = 0; r < roc.rows.size(); ++r) s.points.push_back({roc.number(r, "fpr"), roc.number(r, "tpr")});
  return s;
}

std::string render_roc_svg(std::span<const RocSeries> series, std::string_view title) {
  Svg svg(title);
  svg.axes(1.0, "false positive rate", "true positive rate");
  for (int i = 0; i <= 5; ++i) {
    const double x = kLeft + kPlotW * i / 5;
    svg.line(x, kTop + kPlotH, x, kTop + kPlotH + 4);
    svg.text(x, kTop + kPlotH + 16, fmt::format("{:.2f}", i / 5.0), "middle");
  }
  svg.line(kLeft, kTop + kPlotH, kLeft + kPlotW, kTop, "#999999", " stroke-dasharray=\"4 4\"");
  for (std::size_t k = 0; k < series.size(); ++k) {
    const auto& s = series[k];
    const char* color = kPalette[k % std::size(kPalette)];
    std::string pts, values;
    for (const auto& p : s.points) {
      pts += fmt::format("{:.2f},{:.2f} ", kLeft + kPlotW * p.fpr, kTop + kPlotH - kPlotH * p.tpr);
      values += v6(p.fpr) + ":" + v6(p.tpr) + " ";
    }
    if (!pts.empty()) pts.pop_back();
    if (!values.empty()) values.pop_back();
    svg.raw(fmt::format("<polyline class=\"roc\" data-model=\"{}\" data-auc=\"{}\" data-value=\"{}\" points=\"{}\" "
                        "fill=\"none\" stroke=\"{}\" stroke-width=\"1.5\"/>\n",
                        esc(s.model), v6(s.auc), values, pts, color));
    svg.legend(k, color, fmt::format("{} (AUC={:.3f})", s.model, s.auc));
  }
  return svg.finish();
}

std::vector<BeforeAfterRow> bar_order(std::span<const BeforeAfterRow> rows) {
  std::vector<BeforeAfterRow> out(rows.begin(), rows.end());
  std::stable_sort(out.begin(), out.end(), [](const BeforeAfterRow& a, const BeforeAfterRow& b) {
    if (a.avg_fpr_orig != b.avg_fpr_orig) return a.avg_fpr_orig > b.avg_fpr_orig;
    return a.dataset < b.dataset;
  });
  return out;
}

std::vector<BeforeAfterRow> before_after_from_csv(const CsvTable& t) {
  std::vector<BeforeAfterRow> rows;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    BeforeAfterRow b;
    b.dataset = t.at(r, "dataset");
    b.avg_recall_orig = t.number(r, "avg_recall_orig");
    b.avg_recall_proc = t.number(r, "avg_recall_proc");
    b.avg_fpr_orig = t.number(r, "avg_fpr_orig");
    b.avg_fpr_proc = t.number(r, "avg_fpr_proc");
    b.fpr_ratio = t.number(r, "fpr_ratio");
    b.recall_ratio = t.number(r, "recall_ratio");
    b.epsilon = t.number(r, "epsilon");
    b.models = std::stoull(t.at(r, "models"));
    rows.push_back(b);
  }
  return rows;
}

std::string render_bars_svg(std::span<const BeforeAfterRow> rows, std::string_view title) {
  const auto ordered = bar_order(rows);
  Svg svg(title);
  svg.axes(1.0, "dataset", "average over models");
  const char* labels[] = {"recall original", "recall processed", "FPR original", "FPR processed"};
  const char* metric[] = {"recall_orig", "recall_proc", "fpr_orig", "fpr_proc"};
  const char* colors[] = {"#9ecae1", "#3182bd", "#fcae91", "#de2d26"};
  const double group = ordered.empty() ? 0.0 : kPlotW / static_cast<double>(ordered.size());
  const double bw = group * 0.8 / 4.0;
  for (std::size_t d = 0; d < ordered.size(); ++d) {
    const auto& r = ordered[d];
    const double vals[] = {r.avg_recall_orig, r.avg_recall_proc, r.avg_fpr_orig, r.avg_fpr_proc};
    const double x0 = kLeft + group * static_cast<double>(d) + group * 0.1;
    for (int b = 0; b < 4; ++b) {
      const double v = std::clamp(vals[b], 0.0, 1.0);
      const double x = x0 + bw * b;
      const double bh = kPlotH * v;
      svg.raw(fmt::format("<rect class=\"bar\" data-dataset=\"{}\" data-metric=\"{}\" data-value=\"{}\" x=\"{:.2f}\" "
                          "y=\"{:.2f}\" width=\"{:.2f}\" height=\"{:.2f}\" fill=\"{}\"/>\n",
                          esc(r.dataset), metric[b], v6(vals[b]), x, kTop + kPlotH - bh, bw, bh, colors[b]));
      svg.text(x + bw / 2, kTop + kPlotH - bh - 4, fmt::format("{:.2f}", vals[b]), "middle", 9);
    }
    svg.text(x0 + bw * 2, kTop + kPlotH + 16, r.dataset, "middle");
  }
  for (int b = 0; b < 4; ++b) svg.legend(static_cast<std::size_t>(b), colors[b], labels[b]);
  return svg.finish();
}

}  // namespace hidsq
