#include "hidsq/run.hpp"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <thread>

#include <fmt/format.h>

#include "hidsq/csv.hpp"
#include "hidsq/error.hpp"
#include "hidsq/features.hpp"
#include "hidsq/manifest.hpp"
#include "hidsq/plot.hpp"
#include "hidsq/rng.hpp"

namespace hidsq {

namespace fs = std::filesystem;

PipelineConfig PipelineOverrides::apply(PipelineConfig cfg) const {
  if (n) cfg.n = *n;
  if (stride) cfg.stride = *stride;
  if (ratio) cfg.ratio = *ratio;
  if (balance) cfg.balance = *balance;
  return cfg;
}

void RunConfig::validate() const {
  if (manifests.empty()) throw UsageError("no manifest given");
  if (models.empty() && externals.empty()) throw UsageError("no model selected");
  if (out_dir.empty()) throw UsageError("no output directory");
  std::set<ModelKind> seen;
  for (auto k : models) {
    if (!seen.insert(k).second) throw UsageError("model '" + std::string(to_string(k)) + "' selected twice");
  }
  for (const auto& e : externals) {
    try {
      e.validate();
    } catch (const std::invalid_argument& ex) {
      throw UsageError(ex.what());
    }
  }
}

std::uint64_t model_seed(std::uint64_t root, ModelKind kind) {
  return derive_seed(root, "model:" + std::string(to_string(kind)));
}

std::string path_safe(std::string_view name) {
  std::string out;
  for (char c : name) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '-' ||
                    c == '_' || c == '.';
    out += ok ? c : '_';
  }
  if (out.empty() || out == "." || out == "..") out = "_" + out;
  return out;
}

namespace {

void write_file(const fs::path& path, const std::string& content) {
  std::error_code ec;
  fs::create_directories(path.parent_path(), ec);
  if (ec) throw IoError(path.parent_path().string(), ec.message());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError(path.string(), "cannot open for writing");
  out << content;
  if (!out) throw IoError(path.string(), "write failed");
}

template <typename F>
std::string render(F&& f) {
  std::ostringstream ss;
  f(ss);
  return ss.str();
}

constexpr Provenance kProvenances[] = {Provenance::original, Provenance::processed};

struct Prepared {
  std::string dataset;
  Provenance provenance;
  std::uint64_t root_seed = 0;
  LabeledMatrix train;
  LabeledMatrix test;
  PreparedSplit split;
};

struct Cell {
  const Prepared* data = nullptr;
  std::optional<ModelKind> kind;
  const ExternalModelSpec* external = nullptr;
  std::string model_name;
  // Outputs.
  std::optional<MetricsReport> report;
  RocCurve roc;
  std::optional<FittedModel> fitted;
  std::optional<CellError> error;
};

void run_cell(Cell& c, bool single_worker) {
  const Prepared& d = *c.data;
  const std::string prov(to_string(d.provenance));
  try {
    std::vector<Label> y_true = d.test.y;
    if (c.kind) {
      ModelSpec spec = ModelSpec::defaults(*c.kind, model_seed(d.root_seed, *c.kind));
      if (auto* f = std::get_if<ForestParams>(&spec.params); f && !single_worker) f->threads = 1;
      FittedModel m = fit(spec, d.train.x, d.train.y);
      const auto scores = m.score(d.test.x);
      const auto pred = m.predict(d.test.x);
      MetricsReport r = evaluate(y_true, scores, pred);
      r.model = c.model_name;
      r.params = spec.describe();
      if (!m.summary().warning.empty()) r.warning += (r.warning.empty() ? "" : "; ") + m.summary().warning;
      if (!m.summary().converged) r.warning += (r.warning.empty() ? "" : "; ") + std::string("did not converge");
      c.roc = roc_curve(y_true, scores);
      c.report = std::move(r);
      c.fitted = std::move(m);
    } else {
      const auto scores = run_external(*c.external, d.split.train, d.split.test);
      std::vector<Label> pred(scores.size());
      for (std::size_t i = 0; i < scores.size(); ++i) pred[i] = scores[i] > c.external->threshold ? kIntrusion : kNormal;
      MetricsReport r = evaluate(y_true, scores, pred);
      r.model = c.model_name;
      r.params = c.external->command;
      c.roc = roc_curve(y_true, scores);
      c.report = std::move(r);
    }
    c.report->dataset = d.dataset;
    c.report->provenance = prov;
  } catch (const ProtocolError& e) {
    std::string msg = e.what();
    if (!e.diagnostics().empty()) msg += " | stderr: " + e.diagnostics();
    c.error = CellError{d.dataset, prov, c.model_name, "evaluate", msg};
  } catch (const std::exception& e) {
    c.error = CellError{d.dataset, prov, c.model_name, "evaluate", e.what()};
  }
}

std::string one_line(std::string s) {
  for (auto& ch : s) {
    if (ch == '\n' || ch == '\r') ch = ' ';
    if (ch == '"') ch = '\'';
  }
  return s;
}

void write_errors_csv(const std::vector<CellError>& errors, std::ostream& out) {
  out << "dataset,provenance,model,stage,message\n";
  for (const auto& e : errors) {
    out << e.dataset << ',' << e.provenance << ',' << e.model << ',' << e.stage << ",\"" << one_line(e.message)
        << "\"\n";
  }
}

std::string summary_md(const RunResult& r, const std::vector<std::string>& datasets) {
  std::string s = "<!-- hidsq.summary/1 -->\n# Evaluation summary\n\n## Datasets\n\n";
  for (const auto& d : datasets) s += "- " + d + "\n";
  s += "\n## Metrics\n\n| dataset | provenance | model | accuracy | precision | recall | fpr | macro_f1 | auc | "
       "log_ratio | epsilon |\n|---|---|---|---|---|---|---|---|---|---|---|\n";
  for (const auto& m : r.reports) {
    s += fmt::format("| {} | {} | {} | {:.6f} | {:.6f} | {:.6f} | {:.6f} | {:.6f} | {:.6f} | {:.6f} | {:.6f} |\n",
                     m.dataset, m.provenance, m.model, m.rates.accuracy, m.rates.precision, m.rates.recall,
                     m.rates.fpr, m.rates.macro_f1, m.auc, m.log_ratio, m.epsilon);
  }
  s += "\n## Original vs processed\n\n| dataset | avg recall orig | avg recall proc | avg fpr orig | avg fpr proc | "
       "fpr ratio | recall ratio |\n|---|---|---|---|---|---|---|\n";
  for (const auto& b : r.comparison) {
    s += fmt::format("| {} | {:.6f} | {:.6f} | {:.6f} | {:.6f} | {:.6f} | {:.6f} |\n", b.dataset, b.avg_recall_orig,
                     b.avg_recall_proc, b.avg_fpr_orig, b.avg_fpr_proc, b.fpr_ratio, b.recall_ratio);
  }
  s += "\n## Data quality\n\n| dataset | provenance | dup normal | dup intrusion | cross-class overlap | balance | "
       "distinct grams | vocab coverage | consistency | train/test overlap |\n|---|---|---|---|---|---|---|---|---|---|\n";
  for (const auto& q : r.scorecards) {
    s += fmt::format("| {} | {} | {:.6f} | {:.6f} | {:.6f} | {:.6f} | {} | {:.6f} | {} | {:.6f} |\n", q.dataset,
                     to_string(q.provenance), q.duplication_normal, q.duplication_intrusion, q.cross_class_overlap,
                     q.class_balance, q.variety.distinct_grams, q.variety.vocabulary_coverage, q.consistency.total(),
                     q.train_test_value_overlap);
  }
  if (!r.scorecards.empty()) {
    s += "\nDeclared dimensions:\n\n";
    std::set<std::string> done;
    for (const auto& q : r.scorecards) {
      if (!done.insert(q.dataset).second) continue;
      s += "- " + q.dataset + ":";
      for (const char* k : kDeclaredKeys) s += fmt::format(" {}={};", k, q.declared.at(k));
      s += "\n";
    }
  }
  s += "\n## Errors\n\n";
  if (r.errors.empty()) s += "none\n";
  for (const auto& e : r.errors) {
    s += fmt::format("- {}/{}/{} [{}]: {}\n", e.dataset, e.provenance, e.model, e.stage, one_line(e.message));
  }
  return s;
}

}  // namespace

RunResult execute_run(const RunConfig& cfg) {
  cfg.validate();
  RunResult result;
  std::error_code ec;
  fs::create_directories(cfg.out_dir, ec);
  if (ec) throw UsageError("cannot create output directory " + cfg.out_dir.string() + ": " + ec.message());

  std::vector<std::string> model_names;
  for (auto k : cfg.models) model_names.emplace_back(to_string(k));
  for (const auto& e : cfg.externals) model_names.push_back(e.name);

  auto fail_all = [&](const std::string& ds, const std::string& prov, const std::string& stage, const std::string& msg) {
    for (const auto& m : model_names) result.errors.push_back({ds, prov, m, stage, msg});
  };

  // Load and prepare every dataset (sequential; loading is parallel inside).
  std::vector<std::unique_ptr<Prepared>> prepared;
  std::vector<std::string> datasets;
  std::map<std::string, fs::path> seen_names;
  for (const auto& mpath : cfg.manifests) {
    ManifestFile mf;
    RawDataset raw;
    try {
      mf = load_manifest(mpath);
      if (auto [it, inserted] = seen_names.emplace(mf.dataset.name, mpath); !inserted) {
        throw UsageError("dataset name '" + mf.dataset.name + "' used by both " + it->second.string() + " and " +
                         mpath.string());
      }
      raw = load_dataset(mf.dataset);
    } catch (const UsageError&) {
      throw;
    } catch (const std::exception& e) {
      fail_all(mf.dataset.name.empty() ? mpath.string() : mf.dataset.name, "-", "load", e.what());
      continue;
    }
    datasets.push_back(mf.dataset.name);
    PipelineConfig pc = cfg.overrides.apply(mf.pipeline);
    if (cfg.seed) pc.seed = *cfg.seed;
    for (Provenance prov : kProvenances) {
      const std::string prov_s(to_string(prov));
      try {
        PipelineConfig p = pc;
        p.dedup = prov == Provenance::processed;
        PipelineResult pr = run_pipeline(raw, p);
        const SequencePool& pool = prov == Provenance::processed ? pr.processed : pr.original;
        result.scorecards.push_back(scorecard(raw, pool, pr.split, mf.max_syscall));
        write_file(cfg.out_dir / "histograms" / path_safe(mf.dataset.name) / (prov_s + ".csv"),
                   render([&](std::ostream& o) { write_histogram_csv(histogram_counts(pool), o); }));
        auto d = std::make_unique<Prepared>();
        d->dataset = mf.dataset.name;
        d->provenance = prov;
        d->root_seed = p.seed;
        d->train = to_features(pr.split.train);
        d->test = to_features(pr.split.test);
        d->split = std::move(pr.split);
        prepared.push_back(std::move(d));
      } catch (const IoError&) {
        throw;
      } catch (const std::exception& e) {
        fail_all(mf.dataset.name, prov_s, "pipeline", e.what());
      }
    }
  }

  // Cells, in output order.
  std::vector<Cell> cells;
  for (const auto& d : prepared) {
    for (auto k : cfg.models) cells.push_back({d.get(), k, nullptr, std::string(to_string(k)), {}, {}, {}, {}});
    for (const auto& e : cfg.externals) cells.push_back({d.get(), std::nullopt, &e, e.name, {}, {}, {}, {}});
  }
  std::size_t workers = cfg.workers ? cfg.workers : std::thread::hardware_concurrency();
  workers = std::max<std::size_t>(1, std::min(workers, cells.size()));
  {
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
      for (std::size_t i = next++; i < cells.size(); i = next++) run_cell(cells[i], workers == 1);
    };
    if (workers == 1) {
      worker();
    } else {
      std::vector<std::jthread> pool;
      for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
    }
  }

  for (auto& c : cells) {
    const auto ds = path_safe(c.data->dataset);
    const std::string prov(to_string(c.data->provenance));
    const auto model = path_safe(c.model_name);
    if (c.error) {
      result.errors.push_back(*c.error);
      continue;
    }
    result.reports.push_back(*c.report);
    write_file(cfg.out_dir / "cells" / ds / prov / (model + ".csv"),
               render([&](std::ostream& o) { write_metrics_csv(std::span(&*c.report, 1), o); }));
    write_file(cfg.out_dir / "roc" / ds / prov / (model + ".csv"),
               render([&](std::ostream& o) { write_roc_csv(c.roc, o); }));
    if (cfg.save_models && c.fitted) {
      write_file(cfg.out_dir / "models" / ds / prov / (model + ".json"), c.fitted->to_json().dump(1) + "\n");
    }
  }

  // Comparison over datasets that have reports for both provenances.
  std::map<std::string, std::set<std::string>> provs;
  for (const auto& r : result.reports) provs[r.dataset].insert(r.provenance);
  std::vector<MetricsReport> comparable;
  for (const auto& r : result.reports) {
    if (provs[r.dataset].size() == 2) comparable.push_back(r);
  }
  for (const auto& [ds, p] : provs) {
    if (p.size() != 2) {
      result.warnings.push_back("dataset '" + ds + "' lacks " + (p.count("original") ? "processed" : "original") +
                                " reports; left out of the before/after comparison");
    }
  }
  if (!comparable.empty()) result.comparison = before_after(comparable);

  write_file(cfg.out_dir / "metrics.csv", render([&](std::ostream& o) { write_metrics_csv(result.reports, o); }));
  write_file(cfg.out_dir / "quality.csv", render([&](std::ostream& o) { write_scorecard_csv(result.scorecards, o); }));
  write_file(cfg.out_dir / "before_after.csv",
             render([&](std::ostream& o) { write_before_after_csv(result.comparison, o); }));
  if (!result.reports.empty()) {
    const auto rows = aggregate(result.reports, GroupBy::model);
    write_file(cfg.out_dir / "summary_by_model.csv", render([&](std::ostream& o) { write_summary_csv(rows, o); }));
  }
  write_file(cfg.out_dir / "errors.csv", render([&](std::ostream& o) { write_errors_csv(result.errors, o); }));
  write_file(cfg.out_dir / "summary.md", summary_md(result, datasets));

  if (cfg.figures) {
    render_histogram_figures(cfg.out_dir, result.warnings);
    render_roc_figures(cfg.out_dir, result.warnings);
    render_bars_figure(cfg.out_dir);
  }
  return result;
}

std::vector<fs::path> render_histogram_figures(const fs::path& run_dir, std::vector<std::string>& warnings) {
  std::vector<fs::path> out;
  const fs::path root = run_dir / "histograms";
  if (!fs::is_directory(root)) {
    warnings.push_back("no histograms directory under " + run_dir.string());
    return out;
  }
  std::vector<fs::path> files;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (e.is_regular_file() && e.path().extension() == ".csv") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  for (const auto& f : files) {
    const std::string ds = f.parent_path().filename().string();
    const std::string prov = f.stem().string();
    const auto h = histogram_from_csv(read_csv(f));
    const auto path = run_dir / "figures" / ("histogram_" + ds + "_" + prov + ".svg");
    write_file(path, render_histogram_svg(h, "Syscall frequencies: " + ds + " (" + prov + ")"));
    out.push_back(path);
  }
  return out;
}

std::vector<fs::path> render_roc_figures(const fs::path& run_dir, std::vector<std::string>& warnings) {
  std::vector<fs::path> out;
  const CsvTable metrics = read_csv(run_dir / "metrics.csv");
  // (dataset, provenance) -> series in metrics.csv row order.
  std::map<std::pair<std::string, std::string>, std::vector<RocSeries>> groups;
  for (std::size_t r = 0; r < metrics.rows.size(); ++r) {
    const std::string ds = metrics.at(r, "dataset"), prov = metrics.at(r, "provenance"),
                      model = metrics.at(r, "model");
    auto& series = groups[{ds, prov}];
    const fs::path curve = run_dir / "roc" / path_safe(ds) / prov / (path_safe(model) + ".csv");
    if (!fs::exists(curve)) {
      warnings.push_back("missing ROC curve " + curve.string() + "; series skipped");
      continue;
    }
    series.push_back(roc_series_from_csv(model, metrics.number(r, "auc"), read_csv(curve)));
  }
  for (const auto& [key, series] : groups) {
    const auto path = run_dir / "figures" / ("roc_" + path_safe(key.first) + "_" + key.second + ".svg");
    write_file(path, render_roc_svg(series, "ROC: " + key.first + " (" + key.second + ")"));
    out.push_back(path);
  }
  return out;
}

fs::path render_bars_figure(const fs::path& run_dir) {
  const auto rows = before_after_from_csv(read_csv(run_dir / "before_after.csv"));
  const auto path = run_dir / "figures" / "bars.svg";
  write_file(path, render_bars_svg(rows, "Average recall and FPR: original vs processed"));
  return path;
}

}  // namespace hidsq
