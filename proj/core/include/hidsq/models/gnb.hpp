#pragma once

#include <array>
#include <memory>

#include "hidsq/models.hpp"

namespace hidsq {

struct GaussianClass {
  double log_prior = 0.0;
  std::vector<double> mean;
  std::vector<double> var;  // smoothed
};

// Score = posterior of class 1.
class GnbModel final : public Classifier {
 public:
  GnbModel(std::array<GaussianClass, 2> classes, double epsilon)
      : classes_(std::move(classes)), epsilon_(epsilon) {}

  const GaussianClass& cls(Label l) const { return classes_[l]; }
  double epsilon() const noexcept { return epsilon_; }
  // {P(0|x), P(1|x)}
  std::array<double, 2> posterior(std::span<const double> x) const;

  std::size_t n_features() const override { return classes_[0].mean.size(); }
  std::vector<double> score(const FeatureMatrix& x) const override;
  double threshold() const override { return 0.5; }
  nlohmann::json state_to_json() const override;
  static std::shared_ptr<GnbModel> from_json(const nlohmann::json& j);

 private:
  std::array<GaussianClass, 2> classes_;
  double epsilon_;
};

// epsilon = var_smoothing * largest per-feature variance of the whole
// training set; when every feature is constant, epsilon = var_smoothing.
std::shared_ptr<GnbModel> fit_gnb(const GnbParams& p, const FeatureMatrix& x, std::span<const Label> y,
                                  TrainingSummary& summary);

}  // namespace hidsq
