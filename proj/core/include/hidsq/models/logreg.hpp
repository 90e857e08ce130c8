#pragma once

#include <memory>

#include "hidsq/models.hpp"

namespace hidsq {

// Standardized inputs; score = sigmoid(w.x + b), threshold 0.5.
class LogRegModel final : public Classifier {
 public:
  LogRegModel(Standardizer scaler, std::vector<double> weights, double bias);

  const std::vector<double>& weights() const noexcept { return w_; }
  double bias() const noexcept { return b_; }

  std::size_t n_features() const override { return w_.size(); }
  std::vector<double> score(const FeatureMatrix& x) const override;
  double threshold() const override { return 0.5; }
  nlohmann::json state_to_json() const override;
  static std::shared_ptr<LogRegModel> from_json(const nlohmann::json& j);

 private:
  Standardizer scaler_;
  std::vector<double> w_;
  double b_;
};

std::shared_ptr<LogRegModel> fit_logreg(const LogRegParams& p, const FeatureMatrix& x,
                                        std::span<const Label> y, TrainingSummary& summary);

}  // namespace hidsq
