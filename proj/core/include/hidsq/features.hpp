#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "hidsq/preprocess.hpp"

namespace hidsq {

// Dense row-major matrix of feature vectors; each row is one n-gram with the
// syscall numbers cast to double.
class FeatureMatrix {
 public:
  FeatureMatrix() = default;
  FeatureMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols) {}
  FeatureMatrix(std::size_t rows, std::size_t cols, std::vector<double> data);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool empty() const noexcept { return rows_ == 0; }

  std::span<const double> row(std::size_t i) const { return {data_.data() + i * cols_, cols_}; }
  std::span<double> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }
  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }

  const std::vector<double>& data() const noexcept { return data_; }

  FeatureMatrix select_rows(std::span<const std::size_t> idx) const;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

struct LabeledMatrix {
  FeatureMatrix x;
  std::vector<Label> y;
};

LabeledMatrix to_features(std::span<const LabeledSequence> seqs);
FeatureMatrix to_features(std::span<const Sequence> seqs);

// Per-column mean / std (population), std floored at `floor`.
struct Standardizer {
  std::vector<double> mean;
  std::vector<double> scale;

  static Standardizer fit(const FeatureMatrix& x, double floor = 1e-12);
  FeatureMatrix apply(const FeatureMatrix& x) const;
  void apply_row(std::span<const double> in, std::span<double> out) const;
};

}  // namespace hidsq
