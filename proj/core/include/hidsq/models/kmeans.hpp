#pragma once

#include <memory>

#include "hidsq/models.hpp"
#include "hidsq/rng.hpp"

namespace hidsq {

// Clusters mapped to the majority training label (ties -> 0). Score is
// (distance to nearest label-0 centroid - distance to nearest label-1
// centroid) / mean pairwise centroid distance; threshold 0. If every
// cluster maps to the same label the score is the constant -1 or +1.
class KMeansModel final : public Classifier {
 public:
  KMeansModel(FeatureMatrix centroids, std::vector<Label> cluster_labels);

  const FeatureMatrix& centroids() const noexcept { return centroids_; }
  const std::vector<Label>& cluster_labels() const noexcept { return labels_; }
  double scale() const noexcept { return scale_; }
  std::size_t nearest(std::span<const double> x) const;

  std::size_t n_features() const override { return centroids_.cols(); }
  std::vector<double> score(const FeatureMatrix& x) const override;
  double threshold() const override { return 0.0; }
  nlohmann::json state_to_json() const override;
  static std::shared_ptr<KMeansModel> from_json(const nlohmann::json& j);

 private:
  FeatureMatrix centroids_;
  std::vector<Label> labels_;
  double scale_ = 1.0;
};

struct LloydResult {
  FeatureMatrix centroids;
  std::vector<std::size_t> assignment;
  double objective = 0.0;  // sum of squared distances to assigned centroid
  std::size_t iterations = 0;
  bool converged = false;
  std::vector<double> objective_trace;  // objective at each assignment step
};

FeatureMatrix kmeans_plus_plus(const FeatureMatrix& x, std::size_t k, Rng& rng);
// Stops when the summed squared centroid shift is <= tol_abs.
LloydResult lloyd(const FeatureMatrix& x, FeatureMatrix centroids, std::size_t max_iter, double tol_abs);

std::shared_ptr<KMeansModel> fit_kmeans(const KMeansParams& p, std::uint64_t seed,
                                        const FeatureMatrix& x, std::span<const Label> y,
                                        TrainingSummary& summary);

}  // namespace hidsq
