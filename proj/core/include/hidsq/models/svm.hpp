#pragma once

#include <memory>
#include <optional>

#include "hidsq/models.hpp"

namespace hidsq {

// (gamma * <x, y> + coef0) ^ degree. Throws ModelError on a length mismatch
// and std::invalid_argument unless gamma > 0.
double kernel_poly(std::span<const double> x, std::span<const double> y, double gamma, double coef0,
                   int degree);

// Score is the signed decision value sum_i coef_i K(sv_i, x) - rho;
// threshold 0.
class SvmModel final : public Classifier {
 public:
  SvmModel(std::optional<Standardizer> scaler, FeatureMatrix support, std::vector<double> coef,
           double rho, double gamma, double coef0, int degree);

  const FeatureMatrix& support_vectors() const noexcept { return sv_; }
  const std::vector<double>& coefficients() const noexcept { return coef_; }
  double rho() const noexcept { return rho_; }
  double gamma() const noexcept { return gamma_; }

  std::size_t n_features() const override { return sv_.cols(); }
  std::vector<double> score(const FeatureMatrix& x) const override;
  double threshold() const override { return 0.0; }
  nlohmann::json state_to_json() const override;
  static std::shared_ptr<SvmModel> from_json(const nlohmann::json& j);

 private:
  std::optional<Standardizer> scaler_;
  FeatureMatrix sv_;
  std::vector<double> coef_;  // alpha_i * y_i, y in {-1, +1}
  double rho_;
  double gamma_;
  double coef0_;
  int degree_;
};

// Dual C-SVC solved by SMO with second-order working-set selection.
// summary.residual holds the final maximal KKT violation (m(a) - M(a)) and,
// with record_trace, summary.objective_trace the dual objective after each
// accepted update.
std::shared_ptr<SvmModel> fit_svm(const SvmParams& p, const FeatureMatrix& x, std::span<const Label> y,
                                  TrainingSummary& summary);

}  // namespace hidsq
