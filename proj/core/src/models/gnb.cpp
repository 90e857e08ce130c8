#include "hidsq/models/gnb.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace hidsq {

std::array<double, 2> GnbModel::posterior(std::span<const double> x) const {
  std::array<double, 2> ll{};
  for (std::size_t c = 0; c < 2; ++c) {
    const auto& g = classes_[c];
    double s = g.log_prior;
    for (std::size_t j = 0; j < x.size(); ++j) {
      const double diff = x[j] - g.mean[j];
      s -= 0.5 * (std::log(2.0 * std::numbers::pi * g.var[j]) + diff * diff / g.var[j]);
    }
    ll[c] = s;
  }
  const double m = std::max(ll[0], ll[1]);
  const double e0 = std::exp(ll[0] - m), e1 = std::exp(ll[1] - m);
  const double p1 = e1 / (e0 + e1);
  return {1.0 - p1, p1};
}

std::vector<double> GnbModel::score(const FeatureMatrix& x) const {
  std::vector<double> out(x.rows());
  for (std::size_t i = 0; i < x.rows(); ++i) out[i] = posterior(x.row(i))[1];
  return out;
}

nlohmann::json GnbModel::state_to_json() const {
  nlohmann::json classes = nlohmann::json::array();
  for (const auto& g : classes_) classes.push_back({{"log_prior", g.log_prior}, {"mean", g.mean}, {"var", g.var}});
  return {{"epsilon", epsilon_}, {"classes", classes}};
}

std::shared_ptr<GnbModel> GnbModel::from_json(const nlohmann::json& j) {
  std::array<GaussianClass, 2> classes;
  for (std::size_t c = 0; c < 2; ++c) {
    const auto& g = j.at("classes").at(c);
    classes[c] = {g.at("log_prior").get<double>(), g.at("mean").get<std::vector<double>>(),
                  g.at("var").get<std::vector<double>>()};
  }
  return std::make_shared<GnbModel>(std::move(classes), j.at("epsilon").get<double>());
}

namespace {

void moments(const FeatureMatrix& x, std::span<const Label> y, int only, std::vector<double>& mean,
             std::vector<double>& var, std::size_t& count) {
  const std::size_t d = x.cols();
  mean.assign(d, 0.0);
  var.assign(d, 0.0);
  count = 0;
  for (std::size_t i = 0; i < x.rows(); ++i) {
    if (only >= 0 && y[i] != only) continue;
    ++count;
    for (std::size_t j = 0; j < d; ++j) mean[j] += x(i, j);
  }
  if (count == 0) return;
  for (auto& m : mean) m /= static_cast<double>(count);
  for (std::size_t i = 0; i < x.rows(); ++i) {
    if (only >= 0 && y[i] != only) continue;
    for (std::size_t j = 0; j < d; ++j) {
      const double t = x(i, j) - mean[j];
      var[j] += t * t;
    }
  }
  for (auto& v : var) v /= static_cast<double>(count);
}

}  // namespace

std::shared_ptr<GnbModel> fit_gnb(const GnbParams& p, const FeatureMatrix& x, std::span<const Label> y,
                                  TrainingSummary& summary) {
  std::vector<double> mean, var;
  std::size_t n = 0;
  moments(x, y, -1, mean, var, n);
  const double max_var = var.empty() ? 0.0 : *std::max_element(var.begin(), var.end());
  const double eps = max_var > 0.0 ? p.var_smoothing * max_var : p.var_smoothing;

  std::array<GaussianClass, 2> classes;
  for (int c = 0; c < 2; ++c) {
    std::size_t count = 0;
    moments(x, y, c, classes[c].mean, classes[c].var, count);
    for (auto& v : classes[c].var) v += eps;
    classes[c].log_prior = std::log(static_cast<double>(count) / static_cast<double>(x.rows()));
  }
  summary.iterations = 1;
  summary.converged = true;
  return std::make_shared<GnbModel>(std::move(classes), eps);
}

}  // namespace hidsq
