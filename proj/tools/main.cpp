// hidsq command-line driver. Exit codes: 0 success, 1 data or cell failure,
// 2 usage or configuration error.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "hidsq/adapter.hpp"
#include "hidsq/error.hpp"
#include "hidsq/manifest.hpp"
#include "hidsq/quality.hpp"
#include "hidsq/run.hpp"
#include "hidsq/synth.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;

std::vector<hidsq::ModelKind> parse_models(const std::string& list) {
  std::vector<hidsq::ModelKind> out;
  if (list == "all") return {hidsq::kAllModelKinds.begin(), hidsq::kAllModelKinds.end()};
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(hidsq::parse_model_kind(item));
  }
  return out;
}

hidsq::ExternalModelSpec parse_external(const std::string& arg, double timeout) {
  const auto eq = arg.find('=');
  if (eq == std::string::npos || eq == 0) throw hidsq::UsageError("--external expects NAME=COMMAND, got '" + arg + "'");
  hidsq::ExternalModelSpec e;
  e.name = arg.substr(0, eq);
  e.command = arg.substr(eq + 1);
  e.timeout_seconds = timeout;
  return e;
}

fs::path resolve_out(const std::string& flag) {
  if (!flag.empty()) return flag;
  if (const char* env = std::getenv("HIDSQ_OUT_DIR"); env && *env) return env;
  return "hidsq-out";
}

void print_warnings(const std::vector<std::string>& warnings) {
  for (const auto& w : warnings) std::cerr << "warning: " << w << '\n';
}

int cmd_ingest_validate(const std::string& manifest, std::optional<std::uint64_t> max_syscall) {
  const auto mf = hidsq::load_manifest(manifest);
  const auto ds = hidsq::load_dataset(mf.dataset);
  const hidsq::Syscall limit = max_syscall.value_or(mf.max_syscall);
  const auto report = hidsq::validate_dataset(ds, limit);
  const auto consistency = hidsq::consistency_check(ds, limit);
  fmt::print("dataset: {} ({})\n", mf.dataset.name, hidsq::to_string(mf.dataset.format));
  for (const auto& [name, c] : {std::pair{"normal", report.normal}, std::pair{"intrusion", report.intrusion}}) {
    fmt::print("{}: traces={} events={} empty={} dropped_empty={}\n", name, c.traces, c.events, c.empty_traces,
               c.dropped_empty);
  }
  fmt::print("max_syscall: {}\nout_of_range: {}\ninterleaving_anomalies: {}\n", limit, report.out_of_range.size(),
             consistency.interleaving);
  const std::size_t shown = std::min<std::size_t>(report.out_of_range.size(), 20);
  for (std::size_t i = 0; i < shown; ++i) {
    const auto& v = report.out_of_range[i];
    fmt::print("  {}: event {} value {}\n", v.source_id, v.position, v.value);
  }
  if (shown < report.out_of_range.size()) fmt::print("  ... {} more\n", report.out_of_range.size() - shown);
  fmt::print("status: {}\n", report.clean() && consistency.total() == 0 ? "clean" : "issues reported");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"hidsq: system-call intrusion detection with data-quality evaluation"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "hidsq 0.1.0");

  // ingest-validate
  auto* ingest = app.add_subcommand("ingest-validate", "Load a manifest and report validation findings");
  std::string ingest_manifest;
  std::optional<std::uint64_t> ingest_max;
  ingest->add_option("--manifest,-m", ingest_manifest, "Dataset manifest (JSON)")->required();
  ingest->add_option("--max-syscall", ingest_max, "Largest admissible syscall number");

  // synth
  auto* synth = app.add_subcommand("synth", "Generate a synthetic UNM-format corpus with a manifest");
  std::string synth_spec_path, synth_out;
  hidsq::SynthSpec sspec;
  std::size_t per_file = 8;
  synth->add_option("--spec", synth_spec_path, "Synthetic corpus spec (JSON); flags below are then ignored");
  synth->add_option("--out,-o", synth_out, "Output directory")->required();
  synth->add_option("--name", sspec.name, "Dataset name")->capture_default_str();
  synth->add_option("--vocab", sspec.vocab_size, "Number of syscall ids")->capture_default_str();
  synth->add_option("--traces", sspec.traces_per_class, "Traces per class")->capture_default_str();
  synth->add_option("--min-length", sspec.min_length, "Shortest trace")->capture_default_str();
  synth->add_option("--max-length", sspec.max_length, "Longest trace")->capture_default_str();
  synth->add_option("--branching", sspec.branching, "Successors per state")->capture_default_str();
  synth->add_option("--overlap", sspec.signature_overlap, "Signature overlap in [0,1]")->capture_default_str();
  synth->add_option("--flip-rate", sspec.defects.label_flip_rate, "Label flip rate")->capture_default_str();
  synth->add_option("--dup-rate", sspec.defects.duplicate_injection_rate, "Duplicate injection rate")
      ->capture_default_str();
  synth->add_option("--imbalance", sspec.defects.imbalance_factor, "Intrusion class size factor")
      ->capture_default_str();
  synth->add_option("--seed", sspec.seed, "Generator seed")->capture_default_str();
  synth->add_option("--traces-per-file", per_file, "Traces interleaved per UNM file")->capture_default_str();

  // pipeline
  auto* pipeline = app.add_subcommand("pipeline", "Run every manifest x provenance x model cell");
  std::vector<std::string> manifests, externals;
  std::string models = "all", out_flag, balance;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> n, stride;
  std::optional<double> ratio;
  double timeout = 60.0;
  std::size_t workers = 0;
  bool save_models = false, no_figures = false;
  pipeline->add_option("--manifest,-m", manifests, "Dataset manifest (repeatable)")->required();
  pipeline->add_option("--models", models, "'all' or a comma list of kmeans,logreg,svm_poly,mlp,dtree,rforest,knn,gnb")
      ->capture_default_str();
  pipeline->add_option("--external", externals, "External model NAME=COMMAND (repeatable)");
  pipeline->add_option("--timeout", timeout, "External model timeout in seconds")->capture_default_str();
  pipeline->add_option("--out,-o", out_flag, "Output directory (default $HIDSQ_OUT_DIR, then ./hidsq-out)");
  pipeline->add_option("--seed", seed, "Root seed (overrides manifest pipeline.seed)");
  pipeline->add_option("--n", n, "Gram length");
  pipeline->add_option("--stride", stride, "Window stride");
  pipeline->add_option("--ratio", ratio, "Train fraction");
  pipeline->add_option("--balance", balance, "bootstrap_to_max or none");
  pipeline->add_option("--workers", workers, "Concurrent cells (0 = hardware threads)");
  pipeline->add_flag("--save-models", save_models, "Write fitted models as JSON");
  pipeline->add_flag("--no-figures", no_figures, "Skip SVG rendering");

  // figures from an existing run
  std::string run_dir;
  auto* histogram = app.add_subcommand("histogram", "Render overlaid syscall histograms of a run");
  histogram->add_option("--run", run_dir, "Run output directory")->required();
  auto* roc = app.add_subcommand("roc", "Render per-dataset ROC figures of a run");
  roc->add_option("--run", run_dir, "Run output directory")->required();
  auto* bars = app.add_subcommand("bars", "Render the original-vs-processed bar chart of a run");
  bars->add_option("--run", run_dir, "Run output directory")->required();
  auto* report = app.add_subcommand("report", "Re-render all figures of a run and print its summary");
  report->add_option("--run", run_dir, "Run output directory")->required();

  // adapter-check
  auto* check = app.add_subcommand("adapter-check", "Check an external model against the wire protocol");
  std::string check_command;
  double check_timeout = 30.0;
  check->add_option("--command,-c", check_command, "Command line of the external model")->required();
  check->add_option("--timeout", check_timeout, "Seconds per session")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitUsage;
  }

  try {
    if (*ingest) return cmd_ingest_validate(ingest_manifest, ingest_max);

    if (*synth) {
      if (!synth_spec_path.empty()) {
        std::ifstream in(synth_spec_path);
        if (!in) throw hidsq::UsageError("cannot open spec " + synth_spec_path);
        nlohmann::json j;
        try {
          in >> j;
        } catch (const nlohmann::json::exception& e) {
          throw hidsq::UsageError(synth_spec_path + ": " + e.what());
        }
        sspec = hidsq::synth_spec_from_json(j);
      }
      sspec.validate();
      const auto ds = hidsq::generate(sspec);
      hidsq::WriteOptions wo;
      wo.traces_per_file = per_file;
      wo.max_syscall = std::max<hidsq::Syscall>(hidsq::kDefaultMaxSyscall, sspec.vocab_size - 1);
      const auto manifest = hidsq::write_corpus(ds, synth_out, wo);
      std::ofstream(fs::path(synth_out) / "synth_spec.json") << hidsq::synth_spec_to_json(sspec).dump(1) << '\n';
      fmt::print("wrote {} normal and {} intrusion traces; manifest {}\n", ds.normal_traces.size(),
                 ds.intrusion_traces.size(), manifest.string());
      return 0;
    }

    if (*pipeline) {
      hidsq::RunConfig cfg;
      for (const auto& m : manifests) cfg.manifests.emplace_back(m);
      cfg.models = parse_models(models);
      for (const auto& e : externals) cfg.externals.push_back(parse_external(e, timeout));
      cfg.out_dir = resolve_out(out_flag);
      cfg.seed = seed;
      cfg.overrides.n = n;
      cfg.overrides.stride = stride;
      cfg.overrides.ratio = ratio;
      if (!balance.empty()) {
        try {
          cfg.overrides.balance = hidsq::parse_balance_policy(balance);
        } catch (const hidsq::ValidationError& e) {
          throw hidsq::UsageError(e.what());
        }
      }
      cfg.workers = workers;
      cfg.save_models = save_models;
      cfg.figures = !no_figures;
      try {
        hidsq::PipelineConfig probe = cfg.overrides.apply({});
        probe.validate();
      } catch (const std::invalid_argument& e) {
        throw hidsq::UsageError(e.what());
      }
      const auto result = hidsq::execute_run(cfg);
      print_warnings(result.warnings);
      fmt::print("{} report rows, {} failed cells; outputs in {}\n", result.reports.size(), result.errors.size(),
                 cfg.out_dir.string());
      for (const auto& e : result.errors) {
        std::cerr << fmt::format("error: {}/{}/{} [{}]: {}\n", e.dataset, e.provenance, e.model, e.stage, e.message);
      }
      return result.exit_code();
    }

    std::vector<std::string> warnings;
    if (*histogram) {
      for (const auto& p : hidsq::render_histogram_figures(run_dir, warnings)) fmt::print("{}\n", p.string());
    } else if (*roc) {
      for (const auto& p : hidsq::render_roc_figures(run_dir, warnings)) fmt::print("{}\n", p.string());
    } else if (*bars) {
      fmt::print("{}\n", hidsq::render_bars_figure(run_dir).string());
    } else if (*report) {
      hidsq::render_histogram_figures(run_dir, warnings);
      hidsq::render_roc_figures(run_dir, warnings);
      hidsq::render_bars_figure(run_dir);
      std::ifstream in(fs::path(run_dir) / "summary.md");
      if (!in) throw hidsq::IoError((fs::path(run_dir) / "summary.md").string(), "cannot open file");
      std::cout << in.rdbuf();
    } else if (*check) {
      hidsq::ExternalModelSpec spec;
      spec.name = "candidate";
      spec.command = check_command;
      spec.timeout_seconds = check_timeout;
      bool ok = true;
      for (const auto& c : hidsq::check_conformance(spec)) {
        fmt::print("{} {}: {}\n", c.passed ? "PASS" : "FAIL", c.name, c.detail);
        ok = ok && c.passed;
      }
      return ok ? 0 : kExitFailure;
    }
    print_warnings(warnings);
    return 0;
  } catch (const hidsq::UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const hidsq::ValidationError& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitFailure;
  }
}
