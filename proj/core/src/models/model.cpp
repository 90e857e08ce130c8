#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "hidsq/error.hpp"
#include "hidsq/models.hpp"
#include "hidsq/models/gnb.hpp"
#include "hidsq/models/kmeans.hpp"
#include "hidsq/models/knn.hpp"
#include "hidsq/models/logreg.hpp"
#include "hidsq/models/mlp.hpp"
#include "hidsq/models/svm.hpp"
#include "hidsq/models/tree.hpp"

namespace hidsq {

std::string_view to_string(ModelKind k) {
  switch (k) {
    case ModelKind::kmeans:
      return "kmeans";
    case ModelKind::logreg:
      return "logreg";
    case ModelKind::svm_poly:
      return "svm_poly";
    case ModelKind::mlp:
      return "mlp";
    case ModelKind::dtree:
      return "dtree";
    case ModelKind::rforest:
      return "rforest";
    case ModelKind::knn:
      return "knn";
    case ModelKind::gnb:
      return "gnb";
  }
  return "?";
}

ModelKind parse_model_kind(std::string_view s) {
  for (auto k : kAllModelKinds) {
    if (to_string(k) == s) return k;
  }
  throw UsageError("unknown model '" + std::string(s) +
                   "' (expected kmeans, logreg, svm_poly, mlp, dtree, rforest, knn or gnb)");
}

ModelSpec ModelSpec::defaults(ModelKind kind, std::uint64_t seed) {
  ModelSpec s;
  s.kind = kind;
  s.seed = seed;
  switch (kind) {
    case ModelKind::kmeans:
      s.params = KMeansParams{};
      break;
    case ModelKind::logreg:
      s.params = LogRegParams{};
      break;
    case ModelKind::svm_poly:
      s.params = SvmParams{};
      break;
    case ModelKind::mlp:
      s.params = MlpParams{};
      break;
    case ModelKind::dtree:
      s.params = TreeParams{};
      break;
    case ModelKind::rforest:
      s.params = ForestParams{};
      break;
    case ModelKind::knn:
      s.params = KnnParams{};
      break;
    case ModelKind::gnb:
      s.params = GnbParams{};
      break;
  }
  return s;
}

namespace {

std::size_t expected_index(ModelKind k) {
  switch (k) {
    case ModelKind::kmeans:
      return 0;
    case ModelKind::logreg:
      return 1;
    case ModelKind::svm_poly:
      return 2;
    case ModelKind::mlp:
      return 3;
    case ModelKind::dtree:
      return 4;
    case ModelKind::rforest:
      return 5;
    case ModelKind::knn:
      return 6;
    case ModelKind::gnb:
      return 7;
  }
  return 99;
}

void require(bool ok, const char* what) {
  if (!ok) throw std::invalid_argument(std::string("model spec: ") + what);
}

void check(const KMeansParams& p) {
  require(p.k >= 1, "k must be >= 1");
  require(p.n_init >= 1 && p.max_iter >= 1, "n_init and max_iter must be >= 1");
  require(p.tol >= 0, "tol must be >= 0");
}
void check(const LogRegParams& p) {
  require(p.l2 >= 0, "l2 must be >= 0");
  require(p.grad_tol > 0 && p.max_iter >= 1, "grad_tol must be > 0 and max_iter >= 1");
}
void check(const SvmParams& p) {
  require(p.C > 0, "C must be > 0");
  require(p.degree >= 1, "degree must be >= 1");
  require(p.gamma >= 0, "gamma must be > 0 (or 0 for the variance rule)");
  require(p.tol > 0 && p.max_iter >= 1 && p.cache_rows >= 2, "tol > 0, max_iter >= 1, cache_rows >= 2");
}
void check(const MlpParams& p) {
  require(p.hidden >= 1 && p.batch >= 1 && p.epochs >= 1, "hidden, batch, epochs must be >= 1");
  require(p.learning_rate > 0 && p.init_range >= 0, "learning_rate > 0, init_range >= 0");
}
void check(const TreeParams& p) {
  require(p.min_samples_split >= 1 && p.min_samples_leaf >= 1, "tree minimums must be >= 1");
}
void check(const ForestParams& p) {
  check(p.tree);
  require(p.trees >= 1, "trees must be >= 1");
}
void check(const KnnParams& p) { require(p.k >= 1, "k must be >= 1"); }
void check(const GnbParams& p) { require(p.var_smoothing > 0, "var_smoothing must be > 0"); }

const char* name(MaxFeatures m) { return m == MaxFeatures::sqrt ? "sqrt" : "all"; }

std::string describe(const KMeansParams& p) {
  return fmt::format("k={};n_init={};max_iter={};tol={}", p.k, p.n_init, p.max_iter, p.tol);
}
std::string describe(const LogRegParams& p) {
  return fmt::format("l2={};grad_tol={};max_iter={};standardize=1", p.l2, p.grad_tol, p.max_iter);
}
std::string describe(const SvmParams& p) {
  return fmt::format("C={};degree={};gamma={};coef0={};standardize={};tol={};max_iter={}", p.C, p.degree,
                     p.gamma == 0 ? std::string("scale") : fmt::format("{}", p.gamma), p.coef0,
                     p.standardize ? 1 : 0, p.tol, p.max_iter);
}
std::string describe(const MlpParams& p) {
  return fmt::format("hidden={};lr={};batch={};epochs={};init_range={};standardize=1", p.hidden,
                     p.learning_rate, p.batch, p.epochs, p.init_range);
}
std::string describe(const TreeParams& p) {
  return fmt::format("min_samples_split={};min_samples_leaf={};max_features={};max_depth={}",
                     p.min_samples_split, p.min_samples_leaf, name(p.max_features), p.max_depth);
}
std::string describe(const ForestParams& p) {
  return fmt::format("trees={};bootstrap={};{}", p.trees, p.bootstrap ? 1 : 0, describe(p.tree));
}
std::string describe(const KnnParams& p) { return fmt::format("k={};weights=uniform;metric=euclidean", p.k); }
std::string describe(const GnbParams& p) { return fmt::format("var_smoothing={}", p.var_smoothing); }

}  // namespace

void ModelSpec::validate() const {
  if (params.index() != expected_index(kind)) {
    throw std::invalid_argument("model spec: hyperparameters do not match kind " + std::string(to_string(kind)));
  }
  std::visit([](const auto& p) { check(p); }, params);
}

std::string ModelSpec::describe() const {
  return std::visit([](const auto& p) { return hidsq::describe(p); }, params) + fmt::format(";seed={}", seed);
}

FittedModel::FittedModel(ModelSpec spec, std::shared_ptr<const Classifier> impl, TrainingSummary summary)
    : spec_(std::move(spec)), impl_(std::move(impl)), summary_(std::move(summary)) {
  if (!impl_) throw std::invalid_argument("FittedModel: null implementation");
}

std::vector<double> FittedModel::score(const FeatureMatrix& x) const {
  if (x.cols() != impl_->n_features() && !x.empty()) {
    throw ModelError(fmt::format("{}: feature dimension {} does not match training dimension {}",
                                 to_string(spec_.kind), x.cols(), impl_->n_features()));
  }
  if (x.empty()) return {};
  return impl_->score(x);
}

std::vector<Label> FittedModel::predict(const FeatureMatrix& x) const {
  const auto s = score(x);
  const double t = impl_->threshold();
  std::vector<Label> out(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) out[i] = s[i] > t ? kIntrusion : kNormal;
  return out;
}

namespace {

bool all_rows_identical(const FeatureMatrix& x) {
  for (std::size_t i = 1; i < x.rows(); ++i) {
    for (std::size_t j = 0; j < x.cols(); ++j) {
      if (x(i, j) != x(0, j)) return false;
    }
  }
  return true;
}

}  // namespace

FittedModel fit(const ModelSpec& spec, const FeatureMatrix& x, std::span<const Label> y) {
  spec.validate();
  const std::string_view kind = to_string(spec.kind);
  if (x.empty() || x.cols() == 0) throw ModelError(std::string(kind) + ": empty training set");
  if (y.size() != x.rows()) {
    throw ModelError(fmt::format("{}: {} rows but {} labels", kind, x.rows(), y.size()));
  }
  std::size_t pos = 0;
  for (Label l : y) {
    if (l > 1) throw ModelError(fmt::format("{}: label {} is not 0 or 1", kind, l));
    pos += l;
  }
  if (spec.kind != ModelKind::kmeans && (pos == 0 || pos == y.size())) {
    throw ModelError(std::string(kind) + ": training set has a single class");
  }
  if ((spec.kind == ModelKind::kmeans || spec.kind == ModelKind::svm_poly) && all_rows_identical(x)) {
    throw ModelError(std::string(kind) + ": all training vectors are identical");
  }

  TrainingSummary summary;
  std::shared_ptr<const Classifier> impl;
  switch (spec.kind) {
    case ModelKind::kmeans:
      impl = fit_kmeans(std::get<KMeansParams>(spec.params), spec.seed, x, y, summary);
      break;
    case ModelKind::logreg:
      impl = fit_logreg(std::get<LogRegParams>(spec.params), x, y, summary);
      break;
    case ModelKind::svm_poly:
      impl = fit_svm(std::get<SvmParams>(spec.params), x, y, summary);
      break;
    case ModelKind::mlp:
      impl = fit_mlp(std::get<MlpParams>(spec.params), spec.seed, x, y, summary);
      break;
    case ModelKind::dtree:
      impl = fit_tree(std::get<TreeParams>(spec.params), spec.seed, x, y, summary);
      break;
    case ModelKind::rforest:
      impl = fit_forest(std::get<ForestParams>(spec.params), spec.seed, x, y, summary);
      break;
    case ModelKind::knn:
      impl = fit_knn(std::get<KnnParams>(spec.params), x, y, summary);
      break;
    case ModelKind::gnb:
      impl = fit_gnb(std::get<GnbParams>(spec.params), x, y, summary);
      break;
  }
  return FittedModel(spec, std::move(impl), std::move(summary));
}

// ---- serialization ----

nlohmann::json spec_to_json(const ModelSpec& spec) {
  nlohmann::json p;
  std::visit(
      [&](const auto& v) {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, KMeansParams>) {
          p = {{"k", v.k}, {"n_init", v.n_init}, {"max_iter", v.max_iter}, {"tol", v.tol}};
        } else if constexpr (std::is_same_v<T, LogRegParams>) {
          p = {{"l2", v.l2}, {"grad_tol", v.grad_tol}, {"max_iter", v.max_iter}};
        } else if constexpr (std::is_same_v<T, SvmParams>) {
          p = {{"C", v.C},          {"degree", v.degree},     {"gamma", v.gamma},
               {"coef0", v.coef0},  {"standardize", v.standardize}, {"tol", v.tol},
               {"max_iter", v.max_iter}, {"cache_rows", v.cache_rows}};
        } else if constexpr (std::is_same_v<T, MlpParams>) {
          p = {{"hidden", v.hidden}, {"learning_rate", v.learning_rate}, {"batch", v.batch},
               {"epochs", v.epochs}, {"init_range", v.init_range}};
        } else if constexpr (std::is_same_v<T, TreeParams>) {
          p = {{"min_samples_split", v.min_samples_split}, {"min_samples_leaf", v.min_samples_leaf},
               {"max_features", name(v.max_features)}, {"max_depth", v.max_depth}};
        } else if constexpr (std::is_same_v<T, ForestParams>) {
          p = {{"min_samples_split", v.tree.min_samples_split}, {"min_samples_leaf", v.tree.min_samples_leaf},
               {"max_features", name(v.tree.max_features)},      {"max_depth", v.tree.max_depth},
               {"trees", v.trees},                              {"bootstrap", v.bootstrap}};
        } else if constexpr (std::is_same_v<T, KnnParams>) {
          p = {{"k", v.k}};
        } else {
          p = {{"var_smoothing", v.var_smoothing}};
        }
      },
      spec.params);
  return {{"kind", to_string(spec.kind)}, {"seed", spec.seed}, {"params", p}};
}

namespace {

template <typename T>
void opt(const nlohmann::json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

MaxFeatures parse_max_features(const std::string& s) {
  if (s == "sqrt") return MaxFeatures::sqrt;
  if (s == "all") return MaxFeatures::all;
  throw ValidationError("unknown max_features '" + s + "' (expected sqrt or all)");
}

void read_tree(const nlohmann::json& p, TreeParams& t) {
  opt(p, "min_samples_split", t.min_samples_split);
  opt(p, "min_samples_leaf", t.min_samples_leaf);
  opt(p, "max_depth", t.max_depth);
  if (p.contains("max_features")) t.max_features = parse_max_features(p.at("max_features").get<std::string>());
}

}  // namespace

ModelSpec spec_from_json(const nlohmann::json& j) {
  try {
    ModelSpec spec = ModelSpec::defaults(parse_model_kind(j.at("kind").get<std::string>()),
                                         j.value("seed", std::uint64_t{0}));
    const nlohmann::json p = j.value("params", nlohmann::json::object());
    std::visit(
        [&](auto& v) {
          using T = std::decay_t<decltype(v)>;
          if constexpr (std::is_same_v<T, KMeansParams>) {
            opt(p, "k", v.k);
            opt(p, "n_init", v.n_init);
            opt(p, "max_iter", v.max_iter);
            opt(p, "tol", v.tol);
          } else if constexpr (std::is_same_v<T, LogRegParams>) {
            opt(p, "l2", v.l2);
            opt(p, "grad_tol", v.grad_tol);
            opt(p, "max_iter", v.max_iter);
          } else if constexpr (std::is_same_v<T, SvmParams>) {
            opt(p, "C", v.C);
            opt(p, "degree", v.degree);
            opt(p, "gamma", v.gamma);
            opt(p, "coef0", v.coef0);
            opt(p, "standardize", v.standardize);
            opt(p, "tol", v.tol);
            opt(p, "max_iter", v.max_iter);
            opt(p, "cache_rows", v.cache_rows);
          } else if constexpr (std::is_same_v<T, MlpParams>) {
            opt(p, "hidden", v.hidden);
            opt(p, "learning_rate", v.learning_rate);
            opt(p, "batch", v.batch);
            opt(p, "epochs", v.epochs);
            opt(p, "init_range", v.init_range);
          } else if constexpr (std::is_same_v<T, TreeParams>) {
            read_tree(p, v);
          } else if constexpr (std::is_same_v<T, ForestParams>) {
            read_tree(p, v.tree);
            opt(p, "trees", v.trees);
            opt(p, "bootstrap", v.bootstrap);
          } else if constexpr (std::is_same_v<T, KnnParams>) {
            opt(p, "k", v.k);
          } else {
            opt(p, "var_smoothing", v.var_smoothing);
          }
        },
        spec.params);
    spec.validate();
    return spec;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("model spec: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw ValidationError(e.what());
  }
}

nlohmann::json FittedModel::to_json() const {
  nlohmann::json summary = {{"iterations", summary_.iterations},
                            {"converged", summary_.converged},
                            {"objective", summary_.objective},
                            {"residual", summary_.residual},
                            {"warning", summary_.warning}};
  return {{"format", "hidsq-model"},
          {"version", 1},
          {"spec", spec_to_json(spec_)},
          {"summary", summary},
          {"state", impl_->state_to_json()}};
}

FittedModel FittedModel::from_json(const nlohmann::json& j) {
  try {
    if (j.value("format", std::string()) != "hidsq-model") throw ValidationError("not a hidsq model file");
    if (j.value("version", 0) != 1) throw ValidationError("unsupported model file version");
    ModelSpec spec = spec_from_json(j.at("spec"));
    const auto& s = j.at("state");
    std::shared_ptr<const Classifier> impl;
    switch (spec.kind) {
      case ModelKind::kmeans:
        impl = KMeansModel::from_json(s);
        break;
      case ModelKind::logreg:
        impl = LogRegModel::from_json(s);
        break;
      case ModelKind::svm_poly:
        impl = SvmModel::from_json(s);
        break;
      case ModelKind::mlp:
        impl = MlpModel::from_json(s);
        break;
      case ModelKind::dtree:
        impl = TreeModel::from_json(s);
        break;
      case ModelKind::rforest:
        impl = ForestModel::from_json(s);
        break;
      case ModelKind::knn:
        impl = KnnModel::from_json(s);
        break;
      case ModelKind::gnb:
        impl = GnbModel::from_json(s);
        break;
    }
    TrainingSummary summary;
    if (j.contains("summary")) {
      const auto& m = j.at("summary");
      summary.iterations = m.value("iterations", std::size_t{0});
      summary.converged = m.value("converged", true);
      summary.objective = m.value("objective", 0.0);
      summary.residual = m.value("residual", 0.0);
      summary.warning = m.value("warning", std::string());
    }
    return FittedModel(std::move(spec), std::move(impl), std::move(summary));
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("model file: ") + e.what());
  }
}

void save_model(const FittedModel& model, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError(path.string(), "cannot open for writing");
  out << model.to_json().dump(1) << '\n';
  if (!out) throw IoError(path.string(), "write failed");
}

FittedModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path.string(), "cannot open file");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
  return FittedModel::from_json(j);
}

}  // namespace hidsq
