#include "hidsq/models/svm.hpp"

#include <cmath>
#include <limits>
#include <list>
#include <optional>
#include <unordered_map>

#include "hidsq/error.hpp"

namespace hidsq {

namespace {

double ipow(double base, int e) {
  double r = 1.0;
  while (e > 0) {
    if (e & 1) r *= base;
    base *= base;
    e >>= 1;
  }
  return r;
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) s += a[j] * b[j];
  return s;
}

// Least-recently-used cache of kernel rows.
class KernelCache {
 public:
  KernelCache(const FeatureMatrix& x, double gamma, double coef0, int degree, std::size_t capacity)
      : x_(x), gamma_(gamma), coef0_(coef0), degree_(degree), capacity_(std::max<std::size_t>(2, capacity)) {}

  const std::vector<double>& row(std::size_t i) {
    auto it = index_.find(i);
    if (it != index_.end()) {
      order_.splice(order_.begin(), order_, it->second);
      return it->second->second;
    }
    if (index_.size() >= capacity_) {
      index_.erase(order_.back().first);
      order_.pop_back();
    }
    std::vector<double> r(x_.rows());
    for (std::size_t t = 0; t < x_.rows(); ++t) r[t] = ipow(gamma_ * dot(x_.row(i), x_.row(t)) + coef0_, degree_);
    order_.emplace_front(i, std::move(r));
    index_[i] = order_.begin();
    return order_.front().second;
  }

 private:
  const FeatureMatrix& x_;
  double gamma_, coef0_;
  int degree_;
  std::size_t capacity_;
  std::list<std::pair<std::size_t, std::vector<double>>> order_;
  std::unordered_map<std::size_t, decltype(order_)::iterator> index_;
};

constexpr double kTau = 1e-12;

}  // namespace

double kernel_poly(std::span<const double> x, std::span<const double> y, double gamma, double coef0,
                   int degree) {
  if (x.size() != y.size()) throw ModelError("kernel_poly: vector length mismatch");
  if (!(gamma > 0.0)) throw std::invalid_argument("kernel_poly: gamma must be > 0");
  if (degree < 1) throw std::invalid_argument("kernel_poly: degree must be >= 1");
  return ipow(gamma * dot(x, y) + coef0, degree);
}

SvmModel::SvmModel(std::optional<Standardizer> scaler, FeatureMatrix support, std::vector<double> coef,
                   double rho, double gamma, double coef0, int degree)
    : scaler_(std::move(scaler)),
      sv_(std::move(support)),
      coef_(std::move(coef)),
      rho_(rho),
      gamma_(gamma),
      coef0_(coef0),
      degree_(degree) {}

std::vector<double> SvmModel::score(const FeatureMatrix& x) const {
  std::vector<double> out(x.rows());
  std::vector<double> z(x.cols());
  for (std::size_t i = 0; i < x.rows(); ++i) {
    if (scaler_) {
      scaler_->apply_row(x.row(i), z);
    } else {
      std::copy(x.row(i).begin(), x.row(i).end(), z.begin());
    }
    double s = -rho_;
    for (std::size_t k = 0; k < sv_.rows(); ++k) s += coef_[k] * ipow(gamma_ * dot(sv_.row(k), z) + coef0_, degree_);
    out[i] = s;
  }
  return out;
}

nlohmann::json SvmModel::state_to_json() const {
  nlohmann::json j{{"dim", sv_.cols()}, {"n_sv", sv_.rows()}, {"support", sv_.data()},
                   {"coef", coef_},     {"rho", rho_},        {"gamma", gamma_},
                   {"coef0", coef0_},   {"degree", degree_}};
  if (scaler_) j["scaler"] = {{"mean", scaler_->mean}, {"scale", scaler_->scale}};
  return j;
}

std::shared_ptr<SvmModel> SvmModel::from_json(const nlohmann::json& j) {
  std::optional<Standardizer> s;
  if (j.contains("scaler")) {
    s = Standardizer{j["scaler"].at("mean").get<std::vector<double>>(),
                     j["scaler"].at("scale").get<std::vector<double>>()};
  }
  FeatureMatrix sv(j.at("n_sv").get<std::size_t>(), j.at("dim").get<std::size_t>(),
                   j.at("support").get<std::vector<double>>());
  return std::make_shared<SvmModel>(std::move(s), std::move(sv), j.at("coef").get<std::vector<double>>(),
                                    j.at("rho").get<double>(), j.at("gamma").get<double>(),
                                    j.at("coef0").get<double>(), j.at("degree").get<int>());
}

std::shared_ptr<SvmModel> fit_svm(const SvmParams& p, const FeatureMatrix& x_raw, std::span<const Label> labels,
                                  TrainingSummary& summary) {
  std::optional<Standardizer> scaler;
  FeatureMatrix x = x_raw;
  if (p.standardize) {
    scaler = Standardizer::fit(x_raw);
    x = scaler->apply(x_raw);
  }
  const std::size_t n = x.rows();

  double gamma = p.gamma;
  if (gamma <= 0.0) {
    double m = 0.0, v = 0.0;
    for (double a : x.data()) m += a;
    m /= static_cast<double>(x.data().size());
    for (double a : x.data()) v += (a - m) * (a - m);
    v /= static_cast<double>(x.data().size());
    gamma = v > 0.0 ? 1.0 / (static_cast<double>(x.cols()) * v) : 1.0;
  }

  std::vector<double> y(n), alpha(n, 0.0), grad(n, -1.0), qd(n);
  for (std::size_t i = 0; i < n; ++i) {
    y[i] = labels[i] == kIntrusion ? 1.0 : -1.0;
    qd[i] = ipow(gamma * dot(x.row(i), x.row(i)) + p.coef0, p.degree);
  }
  const double c = p.C;
  auto upper = [&](std::size_t t) { return alpha[t] >= c; };
  auto lower = [&](std::size_t t) { return alpha[t] <= 0.0; };
  auto dual_objective = [&] {
    double f = 0.0;
    for (std::size_t t = 0; t < n; ++t) f += alpha[t] * (grad[t] - 1.0);
    return -0.5 * f;
  };

  KernelCache cache(x, gamma, p.coef0, p.degree, p.cache_rows);
  summary.converged = false;
  double gap = std::numeric_limits<double>::infinity();
  std::size_t iter = 0;
  for (; iter < p.max_iter; ++iter) {
    double gmax = -std::numeric_limits<double>::infinity();
    std::ptrdiff_t i_sel = -1;
    for (std::size_t t = 0; t < n; ++t) {
      if (y[t] > 0 ? !upper(t) : !lower(t)) {
        const double v = -y[t] * grad[t];
        if (v >= gmax) {
          gmax = v;
          i_sel = static_cast<std::ptrdiff_t>(t);
        }
      }
    }
    if (i_sel < 0) {
      gap = 0.0;
      summary.converged = true;
      break;
    }
    const auto i = static_cast<std::size_t>(i_sel);
    // Row i sits at the cache front, so fetching row j cannot evict it.
    const std::vector<double>& ki = cache.row(i);

    double gmax2 = -std::numeric_limits<double>::infinity();
    double best_obj = std::numeric_limits<double>::infinity();
    std::ptrdiff_t j_sel = -1;
    for (std::size_t t = 0; t < n; ++t) {
      if (y[t] > 0 ? lower(t) : upper(t)) continue;
      const double v = y[t] * grad[t];  // -(-y_t G_t)
      gmax2 = std::max(gmax2, v);
      const double diff = gmax + v;
      if (diff > 0.0) {
        double quad = qd[i] + qd[t] - 2.0 * ki[t];
        if (quad <= 0.0) quad = kTau;
        const double obj = -(diff * diff) / quad;
        if (obj <= best_obj) {
          best_obj = obj;
          j_sel = static_cast<std::ptrdiff_t>(t);
        }
      }
    }
    gap = gmax + gmax2;
    if (gap < p.tol || j_sel < 0) {
      summary.converged = true;
      break;
    }
    const auto j = static_cast<std::size_t>(j_sel);
    const std::vector<double>& kj = cache.row(j);
    const double qij = y[i] * y[j] * ki[j];

    const double ai_old = alpha[i], aj_old = alpha[j];
    if (y[i] != y[j]) {
      double quad = qd[i] + qd[j] + 2.0 * qij;
      if (quad <= 0.0) quad = kTau;
      const double delta = (-grad[i] - grad[j]) / quad;
      const double diff = alpha[i] - alpha[j];
      alpha[i] += delta;
      alpha[j] += delta;
      if (diff > 0) {
        if (alpha[j] < 0) { alpha[j] = 0; alpha[i] = diff; }
      } else {
        if (alpha[i] < 0) { alpha[i] = 0; alpha[j] = -diff; }
      }
      if (diff > 0) {
        if (alpha[i] > c) { alpha[i] = c; alpha[j] = c - diff; }
      } else {
        if (alpha[j] > c) { alpha[j] = c; alpha[i] = c + diff; }
      }
    } else {
      double quad = qd[i] + qd[j] - 2.0 * qij;
      if (quad <= 0.0) quad = kTau;
      const double delta = (grad[i] - grad[j]) / quad;
      const double sum = alpha[i] + alpha[j];
      alpha[i] -= delta;
      alpha[j] += delta;
      if (sum > c) {
        if (alpha[i] > c) { alpha[i] = c; alpha[j] = sum - c; }
      } else {
        if (alpha[j] < 0) { alpha[j] = 0; alpha[i] = sum; }
      }
      if (sum > c) {
        if (alpha[j] > c) { alpha[j] = c; alpha[i] = sum - c; }
      } else {
        if (alpha[i] < 0) { alpha[i] = 0; alpha[j] = sum; }
      }
    }
    const double dai = alpha[i] - ai_old, daj = alpha[j] - aj_old;
    for (std::size_t t = 0; t < n; ++t) {
      grad[t] += y[t] * (y[i] * ki[t] * dai + y[j] * kj[t] * daj);
    }
    if (p.record_trace) summary.objective_trace.push_back(dual_objective());
  }
  summary.iterations = iter;
  summary.residual = gap;
  summary.objective = dual_objective();
  if (!summary.converged) summary.warning = "svm: KKT gap above tolerance at max_iter";

  // rho from free vectors, else midpoint of the feasible interval.
  double ub = std::numeric_limits<double>::infinity(), lb = -ub, sum_free = 0.0;
  std::size_t n_free = 0;
  for (std::size_t t = 0; t < n; ++t) {
    const double yg = y[t] * grad[t];
    if (upper(t)) {
      if (y[t] < 0) ub = std::min(ub, yg); else lb = std::max(lb, yg);
    } else if (lower(t)) {
      if (y[t] > 0) ub = std::min(ub, yg); else lb = std::max(lb, yg);
    } else {
      ++n_free;
      sum_free += yg;
    }
  }
  const double rho = n_free ? sum_free / static_cast<double>(n_free) : (ub + lb) / 2.0;

  std::vector<std::size_t> sv_idx;
  std::vector<double> coef;
  for (std::size_t t = 0; t < n; ++t) {
    if (alpha[t] > 0.0) {
      sv_idx.push_back(t);
      coef.push_back(alpha[t] * y[t]);
    }
  }
  return std::make_shared<SvmModel>(std::move(scaler), x.select_rows(sv_idx), std::move(coef), rho, gamma,
                                    p.coef0, p.degree);
}

}  // namespace hidsq
