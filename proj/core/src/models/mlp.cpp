#include "hidsq/models/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "hidsq/rng.hpp"

namespace hidsq {

MlpWeights MlpWeights::zeros(std::size_t inputs, std::size_t hidden) {
  MlpWeights w;
  w.inputs = inputs;
  w.hidden = hidden;
  w.w1.assign(hidden * inputs, 0.0);
  w.b1.assign(hidden, 0.0);
  w.w2.assign(2 * hidden, 0.0);
  w.b2.assign(2, 0.0);
  return w;
}

std::vector<double> MlpWeights::flatten() const {
  std::vector<double> out;
  out.reserve(parameter_count());
  for (const auto* v : {&w1, &b1, &w2, &b2}) out.insert(out.end(), v->begin(), v->end());
  return out;
}

void MlpWeights::assign(std::span<const double> flat) {
  if (flat.size() != parameter_count()) throw std::invalid_argument("MlpWeights::assign: size mismatch");
  auto it = flat.begin();
  for (auto* v : {&w1, &b1, &w2, &b2}) {
    std::copy(it, it + static_cast<std::ptrdiff_t>(v->size()), v->begin());
    it += static_cast<std::ptrdiff_t>(v->size());
  }
}

namespace {

struct Activations {
  std::vector<double> pre;     // hidden pre-activations
  std::vector<double> hidden;  // ReLU outputs
  std::array<double, 2> prob{};
};

void forward(const MlpWeights& w, std::span<const double> x, Activations& a) {
  a.pre.assign(w.hidden, 0.0);
  a.hidden.assign(w.hidden, 0.0);
  for (std::size_t h = 0; h < w.hidden; ++h) {
    double s = w.b1[h];
    for (std::size_t j = 0; j < w.inputs; ++j) s += w.w1[h * w.inputs + j] * x[j];
    a.pre[h] = s;
    a.hidden[h] = s > 0.0 ? s : 0.0;
  }
  double z[2];
  for (std::size_t o = 0; o < 2; ++o) {
    double s = w.b2[o];
    for (std::size_t h = 0; h < w.hidden; ++h) s += w.w2[o * w.hidden + h] * a.hidden[h];
    z[o] = s;
  }
  const double m = std::max(z[0], z[1]);
  const double e0 = std::exp(z[0] - m), e1 = std::exp(z[1] - m);
  a.prob = {e0 / (e0 + e1), e1 / (e0 + e1)};
}

}  // namespace

std::array<double, 2> mlp_forward(const MlpWeights& w, std::span<const double> x) {
  Activations a;
  forward(w, x, a);
  return a.prob;
}

MlpLossGradient mlp_loss_and_gradient(const MlpWeights& w, const FeatureMatrix& x, std::span<const Label> y) {
  MlpLossGradient out;
  out.grad = MlpWeights::zeros(w.inputs, w.hidden);
  auto& g = out.grad;
  Activations a;
  std::vector<double> dh(w.hidden);
  const double inv = 1.0 / static_cast<double>(std::max<std::size_t>(1, x.rows()));
  for (std::size_t i = 0; i < x.rows(); ++i) {
    auto xi = x.row(i);
    forward(w, xi, a);
    const std::size_t t = y[i];
    out.loss -= std::log(std::max(a.prob[t], 1e-300)) * inv;
    // d(CE)/dz_o = p_o - [o == t]
    const double dz[2] = {(a.prob[0] - (t == 0)) * inv, (a.prob[1] - (t == 1)) * inv};
    for (std::size_t o = 0; o < 2; ++o) {
      g.b2[o] += dz[o];
      for (std::size_t h = 0; h < w.hidden; ++h) g.w2[o * w.hidden + h] += dz[o] * a.hidden[h];
    }
    for (std::size_t h = 0; h < w.hidden; ++h) {
      dh[h] = a.pre[h] > 0.0 ? dz[0] * w.w2[h] + dz[1] * w.w2[w.hidden + h] : 0.0;
      g.b1[h] += dh[h];
      for (std::size_t j = 0; j < w.inputs; ++j) g.w1[h * w.inputs + j] += dh[h] * xi[j];
    }
  }
  return out;
}

MlpModel::MlpModel(Standardizer scaler, MlpWeights weights) : scaler_(std::move(scaler)), w_(std::move(weights)) {}

std::vector<double> MlpModel::score(const FeatureMatrix& x) const {
  std::vector<double> out(x.rows());
  std::vector<double> z(x.cols());
  for (std::size_t i = 0; i < x.rows(); ++i) {
    scaler_.apply_row(x.row(i), z);
    out[i] = mlp_forward(w_, z)[1];
  }
  return out;
}

nlohmann::json MlpModel::state_to_json() const {
  return {{"mean", scaler_.mean}, {"scale", scaler_.scale}, {"inputs", w_.inputs}, {"hidden", w_.hidden},
          {"w1", w_.w1},          {"b1", w_.b1},            {"w2", w_.w2},         {"b2", w_.b2}};
}

std::shared_ptr<MlpModel> MlpModel::from_json(const nlohmann::json& j) {
  MlpWeights w;
  w.inputs = j.at("inputs").get<std::size_t>();
  w.hidden = j.at("hidden").get<std::size_t>();
  w.w1 = j.at("w1").get<std::vector<double>>();
  w.b1 = j.at("b1").get<std::vector<double>>();
  w.w2 = j.at("w2").get<std::vector<double>>();
  w.b2 = j.at("b2").get<std::vector<double>>();
  Standardizer s{j.at("mean").get<std::vector<double>>(), j.at("scale").get<std::vector<double>>()};
  return std::make_shared<MlpModel>(std::move(s), std::move(w));
}

std::shared_ptr<MlpModel> fit_mlp(const MlpParams& p, std::uint64_t seed, const FeatureMatrix& x_raw,
                                  std::span<const Label> y, TrainingSummary& summary) {
  Standardizer scaler = Standardizer::fit(x_raw);
  const FeatureMatrix x = scaler.apply(x_raw);

  MlpWeights w = MlpWeights::zeros(x.cols(), p.hidden);
  Rng init(derive_seed(seed, "mlp-init"));
  for (auto* v : {&w.w1, &w.b1, &w.w2, &w.b2})
    for (auto& e : *v) e = init.uniform(-p.init_range, p.init_range);

  Rng order_rng(derive_seed(seed, "mlp-order"));
  std::vector<std::size_t> order(x.rows());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<double> flat;
  for (std::size_t epoch = 0; epoch < p.epochs; ++epoch) {
    order_rng.shuffle(order);
    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < order.size(); start += p.batch) {
      const std::size_t end = std::min(order.size(), start + p.batch);
      std::span<const std::size_t> idx(order.data() + start, end - start);
      const FeatureMatrix xb = x.select_rows(idx);
      std::vector<Label> yb;
      yb.reserve(idx.size());
      for (auto i : idx) yb.push_back(y[i]);
      const auto lg = mlp_loss_and_gradient(w, xb, yb);
      epoch_loss += lg.loss * static_cast<double>(idx.size());
      flat = w.flatten();
      const auto g = lg.grad.flatten();
      for (std::size_t k = 0; k < flat.size(); ++k) flat[k] -= p.learning_rate * g[k];
      w.assign(flat);
    }
    summary.objective_trace.push_back(epoch_loss / static_cast<double>(std::max<std::size_t>(1, x.rows())));
  }
  summary.iterations = p.epochs;
  summary.converged = true;
  summary.objective = summary.objective_trace.empty() ? 0.0 : summary.objective_trace.back();
  return std::make_shared<MlpModel>(std::move(scaler), std::move(w));
}

}  // namespace hidsq
