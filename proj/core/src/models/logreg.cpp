#include "hidsq/models/logreg.hpp"

#include <cmath>

#include <Eigen/Dense>

namespace hidsq {

namespace {

double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

// log(1 + exp(z)) without overflow.
double softplus(double z) { return z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

}  // namespace

LogRegModel::LogRegModel(Standardizer scaler, std::vector<double> weights, double bias)
    : scaler_(std::move(scaler)), w_(std::move(weights)), b_(bias) {}

std::vector<double> LogRegModel::score(const FeatureMatrix& x) const {
  std::vector<double> out(x.rows());
  std::vector<double> z(x.cols());
  for (std::size_t i = 0; i < x.rows(); ++i) {
    scaler_.apply_row(x.row(i), z);
    double s = b_;
    for (std::size_t j = 0; j < z.size(); ++j) s += w_[j] * z[j];
    out[i] = sigmoid(s);
  }
  return out;
}

nlohmann::json LogRegModel::state_to_json() const {
  return {{"mean", scaler_.mean}, {"scale", scaler_.scale}, {"weights", w_}, {"bias", b_}};
}

std::shared_ptr<LogRegModel> LogRegModel::from_json(const nlohmann::json& j) {
  Standardizer s{j.at("mean").get<std::vector<double>>(), j.at("scale").get<std::vector<double>>()};
  return std::make_shared<LogRegModel>(std::move(s), j.at("weights").get<std::vector<double>>(),
                                       j.at("bias").get<double>());
}

std::shared_ptr<LogRegModel> fit_logreg(const LogRegParams& p, const FeatureMatrix& x,
                                        std::span<const Label> y, TrainingSummary& summary) {
  Standardizer scaler = Standardizer::fit(x);
  const FeatureMatrix z = scaler.apply(x);
  const Eigen::Index n = static_cast<Eigen::Index>(z.rows());
  const Eigen::Index d = static_cast<Eigen::Index>(z.cols());

  // Design matrix with a trailing bias column.
  Eigen::MatrixXd a(n, d + 1);
  Eigen::VectorXd t(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) a(i, j) = z(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
    a(i, d) = 1.0;
    t(i) = y[static_cast<std::size_t>(i)] == kIntrusion ? 1.0 : 0.0;
  }
  Eigen::VectorXd penalty = Eigen::VectorXd::Constant(d + 1, p.l2);
  penalty(d) = 0.0;

  auto objective = [&](const Eigen::VectorXd& w) {
    const Eigen::VectorXd m = a * w;
    double f = 0.5 * (penalty.array() * w.array().square()).sum();
    for (Eigen::Index i = 0; i < n; ++i) f += softplus(m(i)) - t(i) * m(i);
    return f;
  };

  Eigen::VectorXd w = Eigen::VectorXd::Zero(d + 1);
  double f = objective(w);
  summary.converged = false;
  std::size_t it = 0;
  double gnorm = 0.0;
  for (; it < p.max_iter; ++it) {
    const Eigen::VectorXd m = a * w;
    Eigen::VectorXd prob(n), curv(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      prob(i) = sigmoid(m(i));
      curv(i) = prob(i) * (1.0 - prob(i));
    }
    const Eigen::VectorXd grad = a.transpose() * (prob - t) + penalty.cwiseProduct(w);
    gnorm = grad.norm();
    if (gnorm < p.grad_tol) {
      summary.converged = true;
      break;
    }
    Eigen::MatrixXd hess = a.transpose() * curv.asDiagonal() * a;
    hess.diagonal() += penalty;
    hess.diagonal().array() += 1e-12;
    const Eigen::VectorXd step = hess.ldlt().solve(grad);

    // Backtracking (Armijo) keeps separable data from diverging.
    double alpha = 1.0;
    Eigen::VectorXd trial = w - step;
    double ft = objective(trial);
    while (ft > f - 1e-4 * alpha * grad.dot(step) && alpha > 1e-10) {
      alpha *= 0.5;
      trial = w - alpha * step;
      ft = objective(trial);
    }
    if (ft >= f) break;  // no further progress possible in floating point
    w = trial;
    f = ft;
  }
  summary.iterations = it;
  summary.objective = f;
  summary.residual = gnorm;
  if (!summary.converged) summary.warning = "logreg: gradient norm above tolerance at max_iter";

  std::vector<double> weights(static_cast<std::size_t>(d));
  for (Eigen::Index j = 0; j < d; ++j) weights[static_cast<std::size_t>(j)] = w(j);
  return std::make_shared<LogRegModel>(std::move(scaler), std::move(weights), w(d));
}

}  // namespace hidsq
