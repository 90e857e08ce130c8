#include "hidsq/features.hpp"

#include <cmath>
#include <stdexcept>

namespace hidsq {

FeatureMatrix::FeatureMatrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows * cols) throw std::invalid_argument("FeatureMatrix: size mismatch");
}

FeatureMatrix FeatureMatrix::select_rows(std::span<const std::size_t> idx) const {
  FeatureMatrix out(idx.size(), cols_);
  for (std::size_t r = 0; r < idx.size(); ++r) {
    auto src = row(idx[r]);
    std::copy(src.begin(), src.end(), out.row(r).begin());
  }
  return out;
}

LabeledMatrix to_features(std::span<const LabeledSequence> seqs) {
  LabeledMatrix m;
  const std::size_t cols = seqs.empty() ? 0 : seqs.front().seq.size();
  m.x = FeatureMatrix(seqs.size(), cols);
  m.y.reserve(seqs.size());
  for (std::size_t i = 0; i < seqs.size(); ++i) {
    if (seqs[i].seq.size() != cols) throw std::invalid_argument("to_features: ragged sequences");
    for (std::size_t j = 0; j < cols; ++j) m.x(i, j) = static_cast<double>(seqs[i].seq.grams[j]);
    m.y.push_back(seqs[i].label);
  }
  return m;
}

FeatureMatrix to_features(std::span<const Sequence> seqs) {
  const std::size_t cols = seqs.empty() ? 0 : seqs.front().size();
  FeatureMatrix x(seqs.size(), cols);
  for (std::size_t i = 0; i < seqs.size(); ++i) {
    if (seqs[i].size() != cols) throw std::invalid_argument("to_features: ragged sequences");
    for (std::size_t j = 0; j < cols; ++j) x(i, j) = static_cast<double>(seqs[i].grams[j]);
  }
  return x;
}

Standardizer Standardizer::fit(const FeatureMatrix& x, double floor) {
  Standardizer s;
  const std::size_t d = x.cols();
  s.mean.assign(d, 0.0);
  s.scale.assign(d, 0.0);
  if (x.rows() == 0) {
    s.scale.assign(d, 1.0);
    return s;
  }
  for (std::size_t i = 0; i < x.rows(); ++i)
    for (std::size_t j = 0; j < d; ++j) s.mean[j] += x(i, j);
  for (auto& m : s.mean) m /= static_cast<double>(x.rows());
  for (std::size_t i = 0; i < x.rows(); ++i)
    for (std::size_t j = 0; j < d; ++j) {
      const double c = x(i, j) - s.mean[j];
      s.scale[j] += c * c;
    }
  for (auto& v : s.scale) v = std::max(std::sqrt(v / static_cast<double>(x.rows())), floor);
  return s;
}

void Standardizer::apply_row(std::span<const double> in, std::span<double> out) const {
  for (std::size_t j = 0; j < in.size(); ++j) out[j] = (in[j] - mean[j]) / scale[j];
}

FeatureMatrix Standardizer::apply(const FeatureMatrix& x) const {
  FeatureMatrix out(x.rows(), x.cols());
  for (std::size_t i = 0; i < x.rows(); ++i) apply_row(x.row(i), out.row(i));
  return out;
}

}  // namespace hidsq
