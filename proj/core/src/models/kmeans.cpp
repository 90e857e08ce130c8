#include "hidsq/models/kmeans.hpp"

#include <cmath>
#include <limits>

#include "hidsq/error.hpp"

namespace hidsq {

namespace {

double sq_dist(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) {
    const double d = a[j] - b[j];
    s += d * d;
  }
  return s;
}

std::size_t nearest_centroid(const FeatureMatrix& c, std::span<const double> x, double* dist = nullptr) {
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < c.rows(); ++k) {
    const double d = sq_dist(c.row(k), x);
    if (d < best_d) {
      best_d = d;
      best = k;
    }
  }
  if (dist) *dist = best_d;
  return best;
}

}  // namespace

KMeansModel::KMeansModel(FeatureMatrix centroids, std::vector<Label> cluster_labels)
    : centroids_(std::move(centroids)), labels_(std::move(cluster_labels)) {
  if (labels_.size() != centroids_.rows()) throw std::invalid_argument("KMeansModel: label count mismatch");
  double total = 0.0;
  std::size_t pairs = 0;
  for (std::size_t a = 0; a < centroids_.rows(); ++a)
    for (std::size_t b = a + 1; b < centroids_.rows(); ++b) {
      total += std::sqrt(sq_dist(centroids_.row(a), centroids_.row(b)));
      ++pairs;
    }
  scale_ = pairs ? std::max(total / static_cast<double>(pairs), 1e-12) : 1.0;
}

std::size_t KMeansModel::nearest(std::span<const double> x) const { return nearest_centroid(centroids_, x); }

std::vector<double> KMeansModel::score(const FeatureMatrix& x) const {
  bool has[2] = {false, false};
  for (Label l : labels_) has[l] = true;
  std::vector<double> out(x.rows());
  if (!has[0] || !has[1]) {
    std::fill(out.begin(), out.end(), has[1] ? 1.0 : -1.0);
    return out;
  }
  for (std::size_t i = 0; i < x.rows(); ++i) {
    double d[2] = {std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()};
    for (std::size_t k = 0; k < centroids_.rows(); ++k) {
      d[labels_[k]] = std::min(d[labels_[k]], sq_dist(centroids_.row(k), x.row(i)));
    }
    out[i] = (std::sqrt(d[0]) - std::sqrt(d[1])) / scale_;
  }
  return out;
}

nlohmann::json KMeansModel::state_to_json() const {
  std::vector<int> labels(labels_.begin(), labels_.end());
  return {{"k", centroids_.rows()}, {"dim", centroids_.cols()}, {"centroids", centroids_.data()},
          {"cluster_labels", labels}};
}

std::shared_ptr<KMeansModel> KMeansModel::from_json(const nlohmann::json& j) {
  FeatureMatrix c(j.at("k").get<std::size_t>(), j.at("dim").get<std::size_t>(),
                  j.at("centroids").get<std::vector<double>>());
  std::vector<Label> labels;
  for (int l : j.at("cluster_labels").get<std::vector<int>>()) labels.push_back(static_cast<Label>(l));
  return std::make_shared<KMeansModel>(std::move(c), std::move(labels));
}

FeatureMatrix kmeans_plus_plus(const FeatureMatrix& x, std::size_t k, Rng& rng) {
  FeatureMatrix c(k, x.cols());
  auto set_row = [&](std::size_t dst, std::size_t src) {
    auto r = x.row(src);
    std::copy(r.begin(), r.end(), c.row(dst).begin());
  };
  set_row(0, rng.below(x.rows()));
  std::vector<double> d2(x.rows());
  for (std::size_t i = 0; i < x.rows(); ++i) d2[i] = sq_dist(x.row(i), c.row(0));
  for (std::size_t m = 1; m < k; ++m) {
    double total = 0.0;
    for (double v : d2) total += v;
    std::size_t pick = 0;
    if (total <= 0.0) {
      pick = rng.below(x.rows());
    } else {
      double r = rng.uniform() * total;
      for (pick = 0; pick + 1 < x.rows(); ++pick) {
        r -= d2[pick];
        if (r < 0.0) break;
      }
    }
    set_row(m, pick);
    for (std::size_t i = 0; i < x.rows(); ++i) d2[i] = std::min(d2[i], sq_dist(x.row(i), c.row(m)));
  }
  return c;
}

LloydResult lloyd(const FeatureMatrix& x, FeatureMatrix centroids, std::size_t max_iter, double tol_abs) {
  LloydResult r;
  const std::size_t k = centroids.rows(), d = x.cols();
  r.assignment.assign(x.rows(), 0);
  std::vector<double> dist(x.rows());
  auto assign = [&] {
    double obj = 0.0;
    for (std::size_t i = 0; i < x.rows(); ++i) {
      r.assignment[i] = nearest_centroid(centroids, x.row(i), &dist[i]);
      obj += dist[i];
    }
    return obj;
  };
  for (r.iterations = 0; r.iterations < max_iter;) {
    r.objective = assign();
    r.objective_trace.push_back(r.objective);
    ++r.iterations;

    FeatureMatrix next(k, d);
    std::vector<std::size_t> counts(k, 0);
    for (std::size_t i = 0; i < x.rows(); ++i) {
      ++counts[r.assignment[i]];
      auto dst = next.row(r.assignment[i]);
      auto src = x.row(i);
      for (std::size_t j = 0; j < d; ++j) dst[j] += src[j];
    }
    for (std::size_t c = 0; c < k; ++c) {
      if (counts[c] == 0) {
        // Empty cluster: reseed at the point farthest from its centroid.
        std::size_t far = 0;
        for (std::size_t i = 1; i < x.rows(); ++i)
          if (dist[i] > dist[far]) far = i;
        auto src = x.row(far);
        std::copy(src.begin(), src.end(), next.row(c).begin());
        dist[far] = 0.0;
        continue;
      }
      for (auto& v : next.row(c)) v /= static_cast<double>(counts[c]);
    }
    double shift = 0.0;
    for (std::size_t c = 0; c < k; ++c) shift += sq_dist(next.row(c), centroids.row(c));
    centroids = std::move(next);
    if (shift <= tol_abs) {
      r.converged = true;
      break;
    }
  }
  r.objective = assign();
  r.objective_trace.push_back(r.objective);
  r.centroids = std::move(centroids);
  return r;
}

std::shared_ptr<KMeansModel> fit_kmeans(const KMeansParams& p, std::uint64_t seed, const FeatureMatrix& x,
                                        std::span<const Label> y, TrainingSummary& summary) {
  if (x.rows() < p.k) throw ModelError("kmeans: fewer samples than clusters");
  double mean_var = 0.0;
  for (std::size_t j = 0; j < x.cols(); ++j) {
    double m = 0.0, v = 0.0;
    for (std::size_t i = 0; i < x.rows(); ++i) m += x(i, j);
    m /= static_cast<double>(x.rows());
    for (std::size_t i = 0; i < x.rows(); ++i) v += (x(i, j) - m) * (x(i, j) - m);
    mean_var += v / static_cast<double>(x.rows());
  }
  mean_var /= static_cast<double>(std::max<std::size_t>(1, x.cols()));
  const double tol_abs = p.tol * mean_var;

  LloydResult best;
  bool have = false;
  for (std::size_t run = 0; run < p.n_init; ++run) {
    Rng rng(derive_seed(seed, "kmeans-init", run));
    LloydResult r = lloyd(x, kmeans_plus_plus(x, p.k, rng), p.max_iter, tol_abs);
    if (!have || r.objective < best.objective) {
      best = std::move(r);
      have = true;
    }
  }

  std::vector<std::size_t> pos(p.k, 0), tot(p.k, 0);
  for (std::size_t i = 0; i < x.rows(); ++i) {
    ++tot[best.assignment[i]];
    pos[best.assignment[i]] += (y[i] == kIntrusion);
  }
  std::vector<Label> labels(p.k);
  for (std::size_t c = 0; c < p.k; ++c) labels[c] = (2 * pos[c] > tot[c]) ? kIntrusion : kNormal;

  summary.iterations = best.iterations;
  summary.converged = best.converged;
  summary.objective = best.objective;
  summary.objective_trace = best.objective_trace;
  if (!best.converged) summary.warning = "kmeans: reached max_iter before tolerance";
  return std::make_shared<KMeansModel>(std::move(best.centroids), std::move(labels));
}

}  // namespace hidsq
