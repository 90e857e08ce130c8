#pragma once

// End-to-end evaluation runs: every manifest x provenance x model cell, with
// reports, scorecards, the before/after comparison and figures written under
// one output directory. Output layout (all paths relative to out_dir):
//
//   metrics.csv                        one row per successful cell
//   cells/<ds>/<prov>/<model>.csv      the same row, alone
//   roc/<ds>/<prov>/<model>.csv        threshold,fpr,tpr
//   histograms/<ds>/<prov>.csv         syscall,normal,intrusion
//   quality.csv  before_after.csv  summary_by_model.csv  errors.csv
//   summary.md
//   figures/histogram_<ds>_<prov>.svg  figures/roc_<ds>_<prov>.svg
//   figures/bars.svg
//   models/<ds>/<prov>/<model>.json    with save_models
//
// "original" runs the pipeline with dedup off, "processed" with dedup on.
// Nothing in the tree depends on wall-clock time or scheduling.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "hidsq/adapter.hpp"
#include "hidsq/models.hpp"
#include "hidsq/quality.hpp"

namespace hidsq {

struct PipelineOverrides {
  std::optional<std::size_t> n;
  std::optional<std::size_t> stride;
  std::optional<double> ratio;
  std::optional<BalancePolicy> balance;

  PipelineConfig apply(PipelineConfig cfg) const;
};

struct RunConfig {
  std::vector<std::filesystem::path> manifests;
  PipelineOverrides overrides;
  std::vector<ModelKind> models;
  std::vector<ExternalModelSpec> externals;
  std::filesystem::path out_dir;
  std::optional<std::uint64_t> seed;  // replaces each manifest's pipeline seed
  std::size_t workers = 0;            // cell pool size; 0 = hardware concurrency
  bool save_models = false;
  bool figures = true;

  // Throws UsageError: no manifests, no models, empty out_dir.
  void validate() const;
};

struct CellError {
  std::string dataset;
  std::string provenance;
  std::string model;
  std::string stage;
  std::string message;
};

struct RunResult {
  std::vector<MetricsReport> reports;
  std::vector<QualityScorecard> scorecards;
  std::vector<BeforeAfterRow> comparison;
  std::vector<CellError> errors;
  std::vector<std::string> warnings;

  int exit_code() const noexcept { return errors.empty() ? 0 : 1; }
};

// Seed given to every model of a dataset: derive_seed(root, "model:<kind>").
std::uint64_t model_seed(std::uint64_t root, ModelKind kind);

RunResult execute_run(const RunConfig& cfg);

// Figure rendering from the CSVs of an existing run directory; each returns
// the files written. Missing inputs become warnings.
std::vector<std::filesystem::path> render_histogram_figures(const std::filesystem::path& run_dir,
                                                            std::vector<std::string>& warnings);
std::vector<std::filesystem::path> render_roc_figures(const std::filesystem::path& run_dir,
                                                      std::vector<std::string>& warnings);
std::filesystem::path render_bars_figure(const std::filesystem::path& run_dir);

// Path component for a dataset or model name.
std::string path_safe(std::string_view name);

}  // namespace hidsq
