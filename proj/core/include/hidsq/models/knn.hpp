#pragma once

#include <memory>

#include "hidsq/models.hpp"

namespace hidsq {

// Brute-force Euclidean k-NN over the raw training rows. A query identical to
// a training row counts that row as a neighbor. Distance ties go to the lower
// training index. Score = fraction of the k neighbors labeled 1.
class KnnModel final : public Classifier {
 public:
  KnnModel(FeatureMatrix train, std::vector<Label> labels, std::size_t k);

  std::size_t k() const noexcept { return k_; }
  // Training indices of the k nearest rows, nearest first.
  std::vector<std::size_t> neighbors(std::span<const double> q) const;

  std::size_t n_features() const override { return x_.cols(); }
  std::vector<double> score(const FeatureMatrix& x) const override;
  double threshold() const override { return 0.5; }
  nlohmann::json state_to_json() const override;
  static std::shared_ptr<KnnModel> from_json(const nlohmann::json& j);

 private:
  FeatureMatrix x_;
  std::vector<Label> y_;
  std::size_t k_;
};

// k larger than the training set is clamped, with a warning in the summary.
std::shared_ptr<KnnModel> fit_knn(const KnnParams& p, const FeatureMatrix& x, std::span<const Label> y,
                                  TrainingSummary& summary);

}  // namespace hidsq
