#include "hidsq/models/tree.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace hidsq {

double gini_impurity(std::size_t neg, std::size_t pos) {
  const std::size_t total = neg + pos;
  if (total == 0) throw std::invalid_argument("gini_impurity: empty node");
  const double p0 = static_cast<double>(neg) / static_cast<double>(total);
  const double p1 = static_cast<double>(pos) / static_cast<double>(total);
  return 1.0 - p0 * p0 - p1 * p1;
}

namespace {

__extension__ typedef unsigned __int128 u128;

// Weighted child Gini is 1 - S/m with S = P/Q,
//   P = (aL^2 + bL^2) nR + (aR^2 + bR^2) nL,  Q = nL nR,
// so the best split maximizes P/Q.
struct Purity {
  u128 p = 0;
  u128 q = 1;

  static Purity of(std::size_t n_left, std::size_t pos_left, std::size_t n_right, std::size_t pos_right) {
    const u128 al = pos_left, bl = n_left - pos_left, ar = pos_right, br = n_right - pos_right;
    return {(al * al + bl * bl) * n_right + (ar * ar + br * br) * n_left, static_cast<u128>(n_left) * n_right};
  }
  bool better_than(const Purity& o) const { return p * o.q > o.p * q; }
};

struct Keyed {
  double value;
  Label label;
};

}  // namespace

std::optional<SplitCandidate> find_best_split(const FeatureMatrix& x, std::span<const Label> y,
                                              std::span<const std::size_t> rows,
                                              std::span<const std::size_t> features,
                                              std::size_t min_samples_leaf) {
  const std::size_t m = rows.size();
  const std::size_t leaf = std::max<std::size_t>(1, min_samples_leaf);
  if (m < 2 * leaf) return std::nullopt;

  std::size_t total_pos = 0;
  for (auto r : rows) total_pos += (y[r] == kIntrusion);

  std::optional<SplitCandidate> best;
  Purity best_purity;
  std::vector<Keyed> keyed(m);
  for (std::size_t f : features) {
    for (std::size_t k = 0; k < m; ++k) keyed[k] = {x(rows[k], f), y[rows[k]]};
    std::sort(keyed.begin(), keyed.end(), [](const Keyed& a, const Keyed& b) { return a.value < b.value; });
    std::size_t pos_left = 0;
    for (std::size_t k = 1; k < m; ++k) {
      pos_left += (keyed[k - 1].label == kIntrusion);
      if (k < leaf) continue;
      if (m - k < leaf) break;
      if (!(keyed[k - 1].value < keyed[k].value)) continue;
      const Purity purity = Purity::of(k, pos_left, m - k, total_pos - pos_left);
      if (!best || purity.better_than(best_purity)) {
        best_purity = purity;
        SplitCandidate c;
        c.feature = f;
        c.threshold = keyed[k - 1].value + (keyed[k].value - keyed[k - 1].value) / 2.0;
        c.n_left = k;
        c.n_right = m - k;
        c.pos_left = pos_left;
        c.pos_right = total_pos - pos_left;
        best = c;
      }
    }
  }
  if (best) {
    const double nl = static_cast<double>(best->n_left), nr = static_cast<double>(best->n_right);
    best->weighted_gini = (nl * gini_impurity(best->n_left - best->pos_left, best->pos_left) +
                           nr * gini_impurity(best->n_right - best->pos_right, best->pos_right)) /
                          static_cast<double>(m);
  }
  return best;
}

DecisionTree DecisionTree::grow(const FeatureMatrix& x, std::span<const Label> y, std::vector<std::size_t> rows,
                                const TreeParams& p, Rng& rng) {
  DecisionTree t;
  const std::size_t d = x.cols();
  std::size_t max_features = d;
  if (p.max_features == MaxFeatures::sqrt) {
    max_features = static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(d))));
  }

  struct Pending {
    std::uint32_t node;
    std::vector<std::size_t> rows;
    std::size_t depth;
  };
  auto make_leaf_stats = [&](TreeNode& node, const std::vector<std::size_t>& r) {
    std::size_t pos = 0;
    for (auto i : r) pos += (y[i] == kIntrusion);
    node.samples = r.size();
    node.positive_fraction = r.empty() ? 0.0 : static_cast<double>(pos) / static_cast<double>(r.size());
    return pos;
  };

  t.nodes_.emplace_back();
  std::vector<Pending> stack;
  stack.push_back({0, std::move(rows), 0});
  std::vector<std::size_t> all_features(d);
  std::iota(all_features.begin(), all_features.end(), std::size_t{0});

  while (!stack.empty()) {
    Pending cur = std::move(stack.back());
    stack.pop_back();
    const std::size_t pos = make_leaf_stats(t.nodes_[cur.node], cur.rows);
    const bool pure = pos == 0 || pos == cur.rows.size();
    if (pure || cur.rows.size() < p.min_samples_split || (p.max_depth && cur.depth >= p.max_depth)) continue;

    std::optional<SplitCandidate> split;
    if (max_features >= d) {
      split = find_best_split(x, y, cur.rows, all_features, p.min_samples_leaf);
    } else {
      std::vector<std::size_t> order = all_features;
      rng.shuffle(order);
      std::vector<std::size_t> first(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(max_features));
      std::sort(first.begin(), first.end());
      split = find_best_split(x, y, cur.rows, first, p.min_samples_leaf);
      if (!split) {
        // Nothing admissible among the sampled features: fall back to the rest.
        std::vector<std::size_t> rest(order.begin() + static_cast<std::ptrdiff_t>(max_features), order.end());
        std::sort(rest.begin(), rest.end());
        split = find_best_split(x, y, cur.rows, rest, p.min_samples_leaf);
      }
    }
    if (!split) continue;

    std::vector<std::size_t> left, right;
    left.reserve(split->n_left);
    right.reserve(split->n_right);
    for (auto r : cur.rows) (x(r, split->feature) <= split->threshold ? left : right).push_back(r);

    const auto li = static_cast<std::uint32_t>(t.nodes_.size());
    t.nodes_.emplace_back();
    t.nodes_.emplace_back();
    TreeNode& node = t.nodes_[cur.node];
    node.feature = static_cast<std::int32_t>(split->feature);
    node.threshold = split->threshold;
    node.left = li;
    node.right = li + 1;
    stack.push_back({li + 1, std::move(right), cur.depth + 1});
    stack.push_back({li, std::move(left), cur.depth + 1});
  }
  return t;
}

double DecisionTree::score_row(std::span<const double> x) const {
  std::uint32_t i = 0;
  while (nodes_[i].feature >= 0) {
    const auto& n = nodes_[i];
    i = x[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right;
  }
  return nodes_[i].positive_fraction;
}

std::size_t DecisionTree::depth() const {
  std::vector<std::size_t> d(nodes_.size(), 0);
  std::size_t best = 0;
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    best = std::max(best, d[i]);
    if (nodes_[i].feature >= 0) d[nodes_[i].left] = d[nodes_[i].right] = d[i] + 1;
  }
  return best;
}

nlohmann::json DecisionTree::to_json() const {
  std::vector<std::int32_t> feature;
  std::vector<double> threshold, frac;
  std::vector<std::uint32_t> left, right;
  std::vector<std::size_t> samples;
  for (const auto& n : nodes_) {
    feature.push_back(n.feature);
    threshold.push_back(n.threshold);
    left.push_back(n.left);
    right.push_back(n.right);
    frac.push_back(n.positive_fraction);
    samples.push_back(n.samples);
  }
  return {{"feature", feature}, {"threshold", threshold}, {"left", left},
          {"right", right},     {"positive_fraction", frac}, {"samples", samples}};
}

DecisionTree DecisionTree::from_json(const nlohmann::json& j) {
  DecisionTree t;
  const auto feature = j.at("feature").get<std::vector<std::int32_t>>();
  const auto threshold = j.at("threshold").get<std::vector<double>>();
  const auto left = j.at("left").get<std::vector<std::uint32_t>>();
  const auto right = j.at("right").get<std::vector<std::uint32_t>>();
  const auto frac = j.at("positive_fraction").get<std::vector<double>>();
  const auto samples = j.at("samples").get<std::vector<std::size_t>>();
  t.nodes_.resize(feature.size());
  for (std::size_t i = 0; i < feature.size(); ++i) {
    t.nodes_[i] = {feature[i], threshold[i], left[i], right[i], frac[i], samples[i]};
  }
  return t;
}

std::vector<double> TreeModel::score(const FeatureMatrix& x) const {
  std::vector<double> out(x.rows());
  for (std::size_t i = 0; i < x.rows(); ++i) out[i] = tree_.score_row(x.row(i));
  return out;
}

nlohmann::json TreeModel::state_to_json() const { return {{"dim", dim_}, {"tree", tree_.to_json()}}; }

std::shared_ptr<TreeModel> TreeModel::from_json(const nlohmann::json& j) {
  return std::make_shared<TreeModel>(DecisionTree::from_json(j.at("tree")), j.at("dim").get<std::size_t>());
}

std::shared_ptr<TreeModel> fit_tree(const TreeParams& p, std::uint64_t seed, const FeatureMatrix& x,
                                    std::span<const Label> y, TrainingSummary& summary) {
  std::vector<std::size_t> rows(x.rows());
  std::iota(rows.begin(), rows.end(), std::size_t{0});
  Rng rng(derive_seed(seed, "tree", 0));
  DecisionTree tree = DecisionTree::grow(x, y, std::move(rows), p, rng);
  summary.iterations = tree.nodes().size();
  summary.converged = true;
  summary.objective = static_cast<double>(tree.depth());
  return std::make_shared<TreeModel>(std::move(tree), x.cols());
}

}  // namespace hidsq
