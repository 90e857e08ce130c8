#pragma once

#include <memory>
#include <optional>

#include "hidsq/models.hpp"
#include "hidsq/rng.hpp"

namespace hidsq {

// 1 - p0^2 - p1^2. Throws std::invalid_argument when both counts are zero.
double gini_impurity(std::size_t neg, std::size_t pos);

struct SplitCandidate {
  std::size_t feature = 0;
  double threshold = 0.0;  // rows with x[feature] <= threshold go left
  std::size_t n_left = 0;
  std::size_t n_right = 0;
  std::size_t pos_left = 0;
  std::size_t pos_right = 0;
  double weighted_gini = 0.0;
};

// Best Gini split of `rows` over `features`. Candidates are midpoints between
// consecutive distinct sorted values with at least `min_samples_leaf` rows on
// each side. Impurities are compared exactly (integer arithmetic); ties go
// to the lower feature index, then the lower threshold. nullopt when no
// candidate is admissible.
std::optional<SplitCandidate> find_best_split(const FeatureMatrix& x, std::span<const Label> y,
                                              std::span<const std::size_t> rows,
                                              std::span<const std::size_t> features,
                                              std::size_t min_samples_leaf);

struct TreeNode {
  std::int32_t feature = -1;  // -1 marks a leaf
  double threshold = 0.0;
  std::uint32_t left = 0;
  std::uint32_t right = 0;
  double positive_fraction = 0.0;
  std::size_t samples = 0;
};

class DecisionTree {
 public:
  // `rows` may repeat (bootstrap samples). Node 0 is the root.
  static DecisionTree grow(const FeatureMatrix& x, std::span<const Label> y, std::vector<std::size_t> rows,
                           const TreeParams& p, Rng& rng);

  double score_row(std::span<const double> x) const;
  const std::vector<TreeNode>& nodes() const noexcept { return nodes_; }
  std::size_t depth() const;

  nlohmann::json to_json() const;
  static DecisionTree from_json(const nlohmann::json& j);

 private:
  std::vector<TreeNode> nodes_;
};

// Score = leaf positive fraction; threshold 0.5.
class TreeModel final : public Classifier {
 public:
  TreeModel(DecisionTree tree, std::size_t dim) : tree_(std::move(tree)), dim_(dim) {}

  const DecisionTree& tree() const noexcept { return tree_; }

  std::size_t n_features() const override { return dim_; }
  std::vector<double> score(const FeatureMatrix& x) const override;
  double threshold() const override { return 0.5; }
  nlohmann::json state_to_json() const override;
  static std::shared_ptr<TreeModel> from_json(const nlohmann::json& j);

 private:
  DecisionTree tree_;
  std::size_t dim_;
};

// Score = mean leaf positive fraction over trees; threshold 0.5.
class ForestModel final : public Classifier {
 public:
  ForestModel(std::vector<DecisionTree> trees, std::size_t dim) : trees_(std::move(trees)), dim_(dim) {}

  const std::vector<DecisionTree>& trees() const noexcept { return trees_; }

  std::size_t n_features() const override { return dim_; }
  std::vector<double> score(const FeatureMatrix& x) const override;
  double threshold() const override { return 0.5; }
  nlohmann::json state_to_json() const override;
  static std::shared_ptr<ForestModel> from_json(const nlohmann::json& j);

 private:
  std::vector<DecisionTree> trees_;
  std::size_t dim_;
};

// The single tree and tree 0 of a forest draw from the same stream,
// derive_seed(seed, "tree", 0).
std::shared_ptr<TreeModel> fit_tree(const TreeParams& p, std::uint64_t seed, const FeatureMatrix& x,
                                    std::span<const Label> y, TrainingSummary& summary);
std::shared_ptr<ForestModel> fit_forest(const ForestParams& p, std::uint64_t seed, const FeatureMatrix& x,
                                        std::span<const Label> y, TrainingSummary& summary);

}  // namespace hidsq
