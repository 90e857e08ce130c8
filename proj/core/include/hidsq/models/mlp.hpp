#pragma once

#include <memory>

#include "hidsq/models.hpp"

namespace hidsq {

// input -> ReLU hidden -> 2-way softmax.
struct MlpWeights {
  std::size_t inputs = 0;
  std::size_t hidden = 0;
  std::vector<double> w1;  // hidden x inputs, row-major
  std::vector<double> b1;  // hidden
  std::vector<double> w2;  // 2 x hidden, row-major
  std::vector<double> b2;  // 2

  static MlpWeights zeros(std::size_t inputs, std::size_t hidden);
  std::size_t parameter_count() const { return w1.size() + b1.size() + w2.size() + b2.size(); }
  std::vector<double> flatten() const;
  void assign(std::span<const double> flat);
};

// Softmax class posteriors for one input row.
std::array<double, 2> mlp_forward(const MlpWeights& w, std::span<const double> x);

struct MlpLossGradient {
  double loss = 0.0;  // mean cross-entropy over the batch
  MlpWeights grad;
};

// Analytic backpropagation over the given rows.
MlpLossGradient mlp_loss_and_gradient(const MlpWeights& w, const FeatureMatrix& x, std::span<const Label> y);

// Score = posterior of class 1; threshold 0.5 (ties -> 0).
class MlpModel final : public Classifier {
 public:
  MlpModel(Standardizer scaler, MlpWeights weights);

  const MlpWeights& weights() const noexcept { return w_; }

  std::size_t n_features() const override { return w_.inputs; }
  std::vector<double> score(const FeatureMatrix& x) const override;
  double threshold() const override { return 0.5; }
  nlohmann::json state_to_json() const override;
  static std::shared_ptr<MlpModel> from_json(const nlohmann::json& j);

 private:
  Standardizer scaler_;
  MlpWeights w_;
};

std::shared_ptr<MlpModel> fit_mlp(const MlpParams& p, std::uint64_t seed, const FeatureMatrix& x,
                                  std::span<const Label> y, TrainingSummary& summary);

}  // namespace hidsq
