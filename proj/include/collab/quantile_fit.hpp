#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "collab/core.hpp"
#include "json.hpp"

namespace collab {

using FeatureMatrix = std::vector<std::vector<double>>;

// Linear conditional-quantile model w.x + b at level tau.
struct QuantileModel {
  double tau = 0.5;
  std::vector<double> weights;
  double bias = 0.0;

  double predict(std::span<const double> x) const;
};

struct FitConfig {
  double learning_rate = 0.05;
  int epochs = 2000;
  std::uint64_t seed = 0;
  bool standardize = true;

  void validate() const;
};

// rho_tau(u) = u * (tau - 1{u < 0}).
double pinball_loss(double u, double tau);

// Mean pinball loss of residuals y - model(x) over a dataset.
double mean_pinball_loss(const QuantileModel& m, const FeatureMatrix& xs,
                         std::span<const double> ys);

// Subgradient of mean_pinball_loss w.r.t. (weights..., bias). Residuals that
// are exactly zero contribute nothing.
std::vector<double> pinball_subgradient(const QuantileModel& m, const FeatureMatrix& xs,
                                        std::span<const double> ys);

// Lower empirical tau-quantile: the ceil(tau * n)-th order statistic.
double empirical_quantile(std::vector<double> values, double tau);

// Full-batch subgradient descent on the mean pinball loss with a constant
// step, starting from zero weights (plus a small seeded perturbation) and
// the empirical tau-quantile as bias. Subgradient steps are not monotone,
// so the iterate with the lowest loss is returned. Constant targets
// short-circuit to (0, y).
QuantileModel fit_pinball(const FeatureMatrix& xs, std::span<const double> ys, double tau,
                          const FitConfig& cfg);

// The four quantile functions behind a QuantileBandPair.
struct BandModels {
  QuantileModel eps_lo;  // tau = eps / 2
  QuantileModel eps_hi;  // tau = 1 - eps / 2
  QuantileModel del_lo;  // tau = delta / 2
  QuantileModel del_hi;  // tau = 1 - delta / 2

  std::size_t feature_dim() const { return eps_lo.weights.size(); }
};

BandModels fit_band_models(const FeatureMatrix& xs, std::span<const double> ys,
                           const TargetRates& rates, const FitConfig& cfg);

// Evaluates the four models at x and swaps any crossed pair.
QuantileBandPair predict_band(const BandModels& models, std::span<const double> x);

// Fits the four models on the labeled regression records.
BandModels fit_band_models(std::span<const Record> records, const TargetRates& rates,
                           const FitConfig& cfg);

// Sets each regression record's evidence to predict_band at its features.
void annotate_bands(std::span<Record> records, const BandModels& models);

void to_json(nlohmann::json& j, const QuantileModel& m);
void from_json(const nlohmann::json& j, QuantileModel& m);
void to_json(nlohmann::json& j, const BandModels& m);
void from_json(const nlohmann::json& j, BandModels& m);

}  // namespace collab
