#include "hidsq/models/knn.hpp"

#include <algorithm>
#include <utility>

namespace hidsq {

KnnModel::KnnModel(FeatureMatrix train, std::vector<Label> labels, std::size_t k)
    : x_(std::move(train)), y_(std::move(labels)), k_(k) {
  if (k_ == 0 || k_ > x_.rows() || y_.size() != x_.rows()) {
    throw std::invalid_argument("KnnModel: need 1 <= k <= rows and one label per row");
  }
}

std::vector<std::size_t> KnnModel::neighbors(std::span<const double> q) const {
  // Sorted insertion into a k-slot buffer; strict < keeps the earlier index
  // on equal distance.
  std::vector<std::pair<double, std::size_t>> best;
  best.reserve(k_ + 1);
  const std::size_t d = x_.cols();
  const double* data = x_.data().data();
  for (std::size_t i = 0; i < x_.rows(); ++i) {
    const double* r = data + i * d;
    double s = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
      const double t = r[j] - q[j];
      s += t * t;
    }
    if (best.size() == k_ && !(s < best.back().first)) continue;
    auto pos = std::upper_bound(best.begin(), best.end(), s,
                                [](double v, const std::pair<double, std::size_t>& e) { return v < e.first; });
    best.insert(pos, {s, i});
    if (best.size() > k_) best.pop_back();
  }
  std::vector<std::size_t> out;
  out.reserve(best.size());
  for (const auto& b : best) out.push_back(b.second);
  return out;
}

std::vector<double> KnnModel::score(const FeatureMatrix& x) const {
  std::vector<double> out(x.rows());
  for (std::size_t i = 0; i < x.rows(); ++i) {
    std::size_t pos = 0;
    for (auto n : neighbors(x.row(i))) pos += (y_[n] == kIntrusion);
    out[i] = static_cast<double>(pos) / static_cast<double>(k_);
  }
  return out;
}

nlohmann::json KnnModel::state_to_json() const {
  return {{"k", k_}, {"rows", x_.rows()}, {"cols", x_.cols()}, {"x", x_.data()}, {"y", y_}};
}

std::shared_ptr<KnnModel> KnnModel::from_json(const nlohmann::json& j) {
  FeatureMatrix x(j.at("rows").get<std::size_t>(), j.at("cols").get<std::size_t>(),
                  j.at("x").get<std::vector<double>>());
  return std::make_shared<KnnModel>(std::move(x), j.at("y").get<std::vector<Label>>(), j.at("k").get<std::size_t>());
}

std::shared_ptr<KnnModel> fit_knn(const KnnParams& p, const FeatureMatrix& x, std::span<const Label> y,
                                  TrainingSummary& summary) {
  std::size_t k = p.k;
  if (k > x.rows()) {
    summary.warning = "k=" + std::to_string(p.k) + " exceeds training rows; clamped to " + std::to_string(x.rows());
    k = x.rows();
  }
  summary.iterations = 0;
  summary.converged = true;
  return std::make_shared<KnnModel>(x, std::vector<Label>(y.begin(), y.end()), k);
}

}  // namespace hidsq
