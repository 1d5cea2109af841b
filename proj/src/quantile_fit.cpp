#include "collab/quantile_fit.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

namespace collab {

namespace {

void check_shapes(const FeatureMatrix& xs, std::span<const double> ys) {
  if (xs.size() != ys.size()) {
    throw std::invalid_argument("feature rows (" + std::to_string(xs.size()) +
                                ") and targets (" + std::to_string(ys.size()) + ") differ");
  }
  if (xs.empty()) return;
  const std::size_t d = xs.front().size();
  for (const auto& row : xs) {
    if (row.size() != d) throw std::invalid_argument("ragged feature matrix");
  }
}

double pinball_derivative(double u, double tau) {
  if (u > 0.0) return tau;
  if (u < 0.0) return tau - 1.0;
  return 0.0;
}

}  // namespace

double QuantileModel::predict(std::span<const double> x) const {
  if (x.size() != weights.size()) {
    throw std::invalid_argument("feature dimension " + std::to_string(x.size()) +
                                " does not match model dimension " +
                                std::to_string(weights.size()));
  }
  double out = bias;
  for (std::size_t j = 0; j < x.size(); ++j) out += weights[j] * x[j];
  return out;
}

void FitConfig::validate() const {
  if (!(learning_rate > 0.0)) throw std::invalid_argument("learning_rate must be positive");
  if (epochs < 1) throw std::invalid_argument("epochs must be at least 1");
}

double pinball_loss(double u, double tau) { return u >= 0.0 ? tau * u : (tau - 1.0) * u; }

double mean_pinball_loss(const QuantileModel& m, const FeatureMatrix& xs,
                         std::span<const double> ys) {
  check_shapes(xs, ys);
  double total = 0.0;
  for (std::size_t i = 0; i < ys.size(); ++i) total += pinball_loss(ys[i] - m.predict(xs[i]), m.tau);
  return ys.empty() ? 0.0 : total / static_cast<double>(ys.size());
}

std::vector<double> pinball_subgradient(const QuantileModel& m, const FeatureMatrix& xs,
                                        std::span<const double> ys) {
  check_shapes(xs, ys);
  const std::size_t d = m.weights.size();
  std::vector<double> grad(d + 1, 0.0);
  for (std::size_t i = 0; i < ys.size(); ++i) {
    const double g = -pinball_derivative(ys[i] - m.predict(xs[i]), m.tau);
    for (std::size_t j = 0; j < d; ++j) grad[j] += g * xs[i][j];
    grad[d] += g;
  }
  const double n = static_cast<double>(std::max<std::size_t>(ys.size(), 1));
  for (double& g : grad) g /= n;
  return grad;
}

double empirical_quantile(std::vector<double> values, double tau) {
  if (values.empty()) throw std::invalid_argument("empirical quantile of an empty sample");
  const auto n = values.size();
  auto k = static_cast<std::size_t>(std::ceil(tau * static_cast<double>(n)));
  k = std::clamp<std::size_t>(k, 1, n);
  std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(k - 1), values.end());
  return values[k - 1];
}

QuantileModel fit_pinball(const FeatureMatrix& xs, std::span<const double> ys, double tau,
                          const FitConfig& cfg) {
  if (!(tau > 0.0 && tau < 1.0)) throw std::invalid_argument("tau must lie in (0,1)");
  cfg.validate();
  check_shapes(xs, ys);
  if (ys.size() < 2) throw std::invalid_argument("fit_pinball needs at least two samples");

  const std::size_t n = ys.size();
  const std::size_t d = xs.front().size();

  QuantileModel model{tau, std::vector<double>(d, 0.0), 0.0};
  if (std::all_of(ys.begin(), ys.end(), [&](double y) { return y == ys.front(); })) {
    model.bias = ys.front();
    return model;
  }

  std::vector<double> center(d, 0.0), scale(d, 1.0);
  if (cfg.standardize) {
    for (std::size_t j = 0; j < d; ++j) {
      double mean = 0.0;
      for (const auto& row : xs) mean += row[j];
      mean /= static_cast<double>(n);
      double var = 0.0;
      for (const auto& row : xs) var += (row[j] - mean) * (row[j] - mean);
      const double sd = std::sqrt(var / static_cast<double>(n));
      center[j] = mean;
      scale[j] = sd > 0.0 ? sd : 1.0;
    }
  }
  FeatureMatrix zs(n, std::vector<double>(d));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < d; ++j) zs[i][j] = (xs[i][j] - center[j]) / scale[j];
  }

  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> init(-0.01, 0.01);
  QuantileModel cur{tau, std::vector<double>(d), 0.0};
  for (double& w : cur.weights) w = init(rng);
  cur.bias = empirical_quantile(std::vector<double>(ys.begin(), ys.end()), tau);

  std::vector<double> best(d + 1);
  double best_loss = kInf;
  for (int epoch = 0; epoch <= cfg.epochs; ++epoch) {
    const double loss = mean_pinball_loss(cur, zs, ys);
    if (loss < best_loss) {
      best_loss = loss;
      std::copy(cur.weights.begin(), cur.weights.end(), best.begin());
      best[d] = cur.bias;
    }
    if (epoch == cfg.epochs) break;
        const auto grad = pinball_subgradient(cur, zs, ys);
    for (std::size_t j = 0; j < d; ++j) cur.weights[j] -= cfg.learning_rate * grad[j];
    cur.bias -= cfg.learning_rate * grad[d];
  }
  // fold the standardization back into raw-feature coefficients
  model.bias = best[d];
  for (std::size_t j = 0; j < d; ++j) {
    model.weights[j] = best[j] / scale[j];
    model.bias -= best[j] * center[j] / scale[j];
  }
  return model;
}

BandModels fit_band_models(const FeatureMatrix& xs, std::span<const double> ys,
                           const TargetRates& rates, const FitConfig& cfg) {
  return BandModels{
      fit_pinball(xs, ys, rates.epsilon / 2.0, cfg),
      fit_pinball(xs, ys, 1.0 - rates.epsilon / 2.0, cfg),
      fit_pinball(xs, ys, rates.delta / 2.0, cfg),
      fit_pinball(xs, ys, 1.0 - rates.delta / 2.0, cfg),
  };
}

BandModels fit_band_models(std::span<const Record> records, const TargetRates& rates,
                           const FitConfig& cfg) {
  FeatureMatrix xs;
  std::vector<double> ys;
  for (const auto& r : records) {
    if (r.kind() != TaskKind::regression) throw std::invalid_argument("quantile fitting needs regression records");
    xs.push_back(r.features);
    ys.push_back(std::get<double>(r.truth()));
  }
  return fit_band_models(xs, ys, rates, cfg);
}

void annotate_bands(std::span<Record> records, const BandModels& models) {
  for (auto& r : records) r.evidence = predict_band(models, r.features);
}

QuantileBandPair predict_band(const BandModels& models, std::span<const double> x) {
  QuantileBandPair band{models.eps_lo.predict(x), models.eps_hi.predict(x),
                        models.del_lo.predict(x), models.del_hi.predict(x)};
  if (band.q_eps_lo > band.q_eps_hi) std::swap(band.q_eps_lo, band.q_eps_hi);
  if (band.q_del_lo > band.q_del_hi) std::swap(band.q_del_lo, band.q_del_hi);
  return band;
}

void to_json(nlohmann::json& j, const QuantileModel& m) {
  j = nlohmann::json{{"tau", m.tau}, {"weights", m.weights}, {"bias", m.bias}};
}

void from_json(const nlohmann::json& j, QuantileModel& m) {
  for (const auto& [key, _] : j.items()) {
    if (key != "tau" && key != "weights" && key != "bias") {
      throw std::invalid_argument("unknown quantile model field '" + key + "'");
    }
  }
  j.at("tau").get_to(m.tau);
  j.at("weights").get_to(m.weights);
  j.at("bias").get_to(m.bias);
  if (!(m.tau > 0.0 && m.tau < 1.0)) throw std::invalid_argument("model tau must lie in (0,1)");
}

void to_json(nlohmann::json& j, const BandModels& m) {
  j = nlohmann::json{{"eps_lo", m.eps_lo}, {"eps_hi", m.eps_hi},
                     {"del_lo", m.del_lo}, {"del_hi", m.del_hi}};
}

void from_json(const nlohmann::json& j, BandModels& m) {
  j.at("eps_lo").get_to(m.eps_lo);
  j.at("eps_hi").get_to(m.eps_hi);
  j.at("del_lo").get_to(m.del_lo);
  j.at("del_hi").get_to(m.del_hi);
  const auto d = m.eps_lo.weights.size();
  if (m.eps_hi.weights.size() != d || m.del_lo.weights.size() != d ||
      m.del_hi.weights.size() != d) {
    throw std::invalid_argument("band models disagree on feature dimension");
  }
}

}  // namespace collab
