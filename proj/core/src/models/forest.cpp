#include <algorithm>
#include <atomic>
#include <numeric>
#include <thread>

#include "hidsq/models/tree.hpp"

namespace hidsq {

std::vector<double> ForestModel::score(const FeatureMatrix& x) const {
  std::vector<double> out(x.rows(), 0.0);
  for (std::size_t i = 0; i < x.rows(); ++i) {
    double s = 0.0;
    for (const auto& t : trees_) s += t.score_row(x.row(i));
    out[i] = s / static_cast<double>(trees_.size());
  }
  return out;
}

nlohmann::json ForestModel::state_to_json() const {
  nlohmann::json trees = nlohmann::json::array();
  for (const auto& t : trees_) trees.push_back(t.to_json());
  return {{"dim", dim_}, {"trees", trees}};
}

std::shared_ptr<ForestModel> ForestModel::from_json(const nlohmann::json& j) {
  std::vector<DecisionTree> trees;
  for (const auto& t : j.at("trees")) trees.push_back(DecisionTree::from_json(t));
  return std::make_shared<ForestModel>(std::move(trees), j.at("dim").get<std::size_t>());
}

std::shared_ptr<ForestModel> fit_forest(const ForestParams& p, std::uint64_t seed, const FeatureMatrix& x,
                                        std::span<const Label> y, TrainingSummary& summary) {
  std::vector<DecisionTree> trees(p.trees);
  std::atomic<std::size_t> next{0};
  // Each tree owns its seed, so the result does not depend on scheduling.
  auto worker = [&] {
    for (std::size_t t = next++; t < p.trees; t = next++) {
      Rng rng(derive_seed(seed, "tree", t));
      std::vector<std::size_t> rows(x.rows());
      if (p.bootstrap) {
        for (auto& r : rows) r = static_cast<std::size_t>(rng.below(x.rows()));
      } else {
        std::iota(rows.begin(), rows.end(), std::size_t{0});
      }
      trees[t] = DecisionTree::grow(x, y, std::move(rows), p.tree, rng);
    }
  };
  std::size_t threads = p.threads ? p.threads : std::thread::hardware_concurrency();
  threads = std::max<std::size_t>(1, std::min(threads, p.trees));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < threads; ++w) pool.emplace_back(worker);
  }
  std::size_t nodes = 0;
  for (const auto& t : trees) nodes += t.nodes().size();
  summary.iterations = p.trees;
  summary.converged = true;
  summary.objective = static_cast<double>(nodes);
  return std::make_shared<ForestModel>(std::move(trees), x.cols());
}

}  // namespace hidsq
