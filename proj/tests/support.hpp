#pragma once

// Helpers shared by the test binaries: scratch directories and independent
// brute-force oracles.

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "hidsq/features.hpp"
#include "hidsq/preprocess.hpp"

namespace hidsq::testing {

class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() / ("hidsq-" + tag + "-" + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& p) const { return path_ / p; }

 private:
  std::filesystem::path path_;
};

inline void write_text(const std::filesystem::path& p, const std::string& s) {
  std::filesystem::create_directories(p.parent_path());
  std::ofstream(p, std::ios::binary) << s;
}

inline std::string read_text(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Every regular file under root, relative path -> bytes.
inline std::vector<std::pair<std::string, std::string>> snapshot(const std::filesystem::path& root) {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& e : std::filesystem::recursive_directory_iterator(root)) {
    if (e.is_regular_file()) out.emplace_back(std::filesystem::relative(e.path(), root).string(), read_text(e.path()));
  }
  std::sort(out.begin(), out.end());
  return out;
}

// Fraction of (positive, negative) pairs ordered correctly, ties = 1/2.
inline double pair_count_auc(const std::vector<Label>& y, const std::vector<double>& s) {
  long double good = 0;
  std::size_t pos = 0, neg = 0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (y[i] != kIntrusion) continue;
    ++pos;
    for (std::size_t j = 0; j < y.size(); ++j) {
      if (y[j] != kNormal) continue;
      if (s[i] > s[j]) good += 1;
      if (s[i] == s[j]) good += 0.5L;
    }
  }
  for (Label l : y) neg += (l == kNormal);
  return static_cast<double>(good / (static_cast<long double>(pos) * static_cast<long double>(neg)));
}

// Exhaustive best-Gini split with exact rational comparison (numerator and
// denominator of the impurity sum kept as integers). Every threshold
// strictly between two distinct observed values is equivalent, so the
// candidate set is the midpoints. Returns {feature, threshold, found}.
struct OracleSplit {
  std::size_t feature = 0;
  double threshold = 0.0;
  bool found = false;
  // S = num / den, the quantity a best split maximizes
  long double num = 0;
  long double den = 1;
};

inline OracleSplit brute_force_split(const FeatureMatrix& x, const std::vector<Label>& y, std::size_t min_leaf) {
  OracleSplit best;
  const std::size_t m = x.rows();
  for (std::size_t f = 0; f < x.cols(); ++f) {
    std::vector<double> values;
    for (std::size_t i = 0; i < m; ++i) values.push_back(x(i, f));
    std::sort(values.begin(), values.end());
    values.erase(std::unique(values.begin(), values.end()), values.end());
    for (std::size_t k = 0; k + 1 < values.size(); ++k) {
      const double t = values[k] + (values[k + 1] - values[k]) / 2.0;
      std::size_t nl = 0, pl = 0, nr = 0, pr = 0;
      for (std::size_t i = 0; i < m; ++i) {
        if (x(i, f) <= t) {
          ++nl;
          pl += y[i];
        } else {
          ++nr;
          pr += y[i];
        }
      }
      if (nl < min_leaf || nr < min_leaf) continue;
      // m * weighted gini = nl * (1 - ...) + nr * (1 - ...)
      //                  = m - (pl^2 + (nl-pl)^2)/nl - (pr^2 + (nr-pr)^2)/nr
      // Minimizing it maximizes S = A/nl + B/nr = (A nr + B nl) / (nl nr).
      const long double a = static_cast<long double>(pl * pl + (nl - pl) * (nl - pl));
      const long double b = static_cast<long double>(pr * pr + (nr - pr) * (nr - pr));
      const long double num = a * nr + b * nl;
      const long double den = static_cast<long double>(nl) * nr;
      if (!best.found || num * best.den > best.num * den) {
        best = {f, t, true, num, den};
      }
    }
  }
  return best;
}

}  // namespace hidsq::testing
