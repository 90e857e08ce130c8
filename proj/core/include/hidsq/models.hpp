#pragma once

// Uniform fit / predict / score contract over the eight classical detectors.
// Scores are oriented so that larger means more intrusion-like; predict()
// returns 1 iff score > threshold (a score exactly at the threshold maps to
// label 0).

#include <array>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "hidsq/features.hpp"

namespace hidsq {

enum class ModelKind { kmeans, logreg, svm_poly, mlp, dtree, rforest, knn, gnb };

inline constexpr std::array<ModelKind, 8> kAllModelKinds = {
    ModelKind::kmeans, ModelKind::logreg, ModelKind::svm_poly, ModelKind::mlp,
    ModelKind::dtree,  ModelKind::rforest, ModelKind::knn,     ModelKind::gnb};

std::string_view to_string(ModelKind k);
ModelKind parse_model_kind(std::string_view s);  // throws UsageError

struct KMeansParams {
  std::size_t k = 2;
  std::size_t n_init = 10;
  std::size_t max_iter = 300;
  double tol = 1e-4;  // relative to the mean per-feature variance
};

struct LogRegParams {
  double l2 = 1.0;  // penalty strength on weights; the bias is unpenalized
  double grad_tol = 1e-6;
  std::size_t max_iter = 1000;
};

struct SvmParams {
  double C = 1.0;
  int degree = 3;
  double gamma = 0.0;  // 0 selects 1 / (n_features * variance of the training features)
  double coef0 = 0.0;
  bool standardize = true;
  double tol = 1e-3;
  std::size_t max_iter = 10000;  // working-pair updates
  std::size_t cache_rows = 1024;
  bool record_trace = false;  // keep the dual objective after every update
};

struct MlpParams {
  std::size_t hidden = 6;
  double learning_rate = 0.01;
  std::size_t batch = 32;
  std::size_t epochs = 50;
  double init_range = 0.5;  // weights ~ U(-init_range, init_range)
};

enum class MaxFeatures { sqrt, all };

struct TreeParams {
  std::size_t min_samples_split = 10;
  std::size_t min_samples_leaf = 5;
  MaxFeatures max_features = MaxFeatures::sqrt;  // ceil(sqrt(n_features)) per split
  std::size_t max_depth = 0;                     // 0 = unlimited
};

struct ForestParams {
  TreeParams tree;
  std::size_t trees = 100;
  bool bootstrap = true;
  std::size_t threads = 0;  // 0 = hardware concurrency
};

struct KnnParams {
  std::size_t k = 3;
};

struct GnbParams {
  double var_smoothing = 1e-9;  // times the largest feature variance
};

using Hyperparams = std::variant<KMeansParams, LogRegParams, SvmParams, MlpParams, TreeParams,
                                 ForestParams, KnnParams, GnbParams>;

struct ModelSpec {
  ModelKind kind = ModelKind::dtree;
  Hyperparams params = TreeParams{};
  std::uint64_t seed = 0;

  static ModelSpec defaults(ModelKind kind, std::uint64_t seed = 0);
  // Throws std::invalid_argument on out-of-range hyperparameters or a params
  // alternative that does not match `kind`.
  void validate() const;
  // Compact "key=value;..." rendering of every pinned hyperparameter.
  std::string describe() const;
};

struct TrainingSummary {
  std::size_t iterations = 0;
  bool converged = true;
  double objective = 0.0;
  double residual = 0.0;  // final optimality measure (gradient norm, KKT gap, ...)
  std::vector<double> objective_trace;
  std::string warning;
};

// Per-kind learned state. Implementations live in hidsq/models/*.hpp.
class Classifier {
 public:
  virtual ~Classifier() = default;
  virtual std::size_t n_features() const = 0;
  // Rows have already been checked against n_features().
  virtual std::vector<double> score(const FeatureMatrix& x) const = 0;
  virtual double threshold() const = 0;
  virtual nlohmann::json state_to_json() const = 0;
};

class FittedModel {
 public:
  FittedModel(ModelSpec spec, std::shared_ptr<const Classifier> impl, TrainingSummary summary);

  const ModelSpec& spec() const noexcept { return spec_; }
  const TrainingSummary& summary() const noexcept { return summary_; }
  std::size_t n_features() const { return impl_->n_features(); }
  double threshold() const { return impl_->threshold(); }

  // Both throw ModelError on a feature-dimension mismatch.
  std::vector<double> score(const FeatureMatrix& x) const;
  std::vector<Label> predict(const FeatureMatrix& x) const;

  template <typename T>
  const T* as() const noexcept {
    return dynamic_cast<const T*>(impl_.get());
  }

  nlohmann::json to_json() const;
  static FittedModel from_json(const nlohmann::json& j);

 private:
  ModelSpec spec_;
  std::shared_ptr<const Classifier> impl_;
  TrainingSummary summary_;
};

// Throws ModelError on empty input, mismatched lengths, or (for supervised
// kinds) a single-class training set.
FittedModel fit(const ModelSpec& spec, const FeatureMatrix& x, std::span<const Label> y);

inline std::vector<Label> predict(const FittedModel& m, const FeatureMatrix& x) { return m.predict(x); }
inline std::vector<double> score(const FittedModel& m, const FeatureMatrix& x) { return m.score(x); }

nlohmann::json spec_to_json(const ModelSpec& spec);
ModelSpec spec_from_json(const nlohmann::json& j);

// Versioned JSON file: {"format": "hidsq-model", "version": 1, "spec": ..., "state": ...}
void save_model(const FittedModel& model, const std::filesystem::path& path);
FittedModel load_model(const std::filesystem::path& path);

}  // namespace hidsq
