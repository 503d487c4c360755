#pragma once

// Linear discriminant analysis with diagonal shrinkage, leave-one-out
// evaluation, and the first-order color statistics baseline.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <map>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "json.hpp"
#include "mcn/descriptor.hpp"
#include "mcn/error.hpp"
#include "mcn/image.hpp"

namespace mcn {

/// Per channel: mean, variance, entropy of the 256-bin intensity histogram,
/// third and fourth central moments. Channel-major, 15 values.
inline std::array<double, 15> color_statistics(const ColorImage& img) {
  if (img.channels() != 3)
    throw Unsupported("color statistics need an RGB image, got " + std::to_string(img.channels()) +
                      " channels");
  std::array<double, 15> out{};
  const std::size_t pixels = static_cast<std::size_t>(img.width()) * img.height();
  const auto px = img.data();
  const double n = static_cast<double>(pixels);
  const int levels = img.max_level() + 1;
  for (int c = 0; c < 3; ++c) {
    double sum = 0.0;
    for (std::size_t i = 0; i < pixels; ++i) sum += px[i * 3 + c];
    const double mu = sum / n;
    double m2 = 0.0, m3 = 0.0, m4 = 0.0;
    for (std::size_t i = 0; i < pixels; ++i) {
      const double d = px[i * 3 + c] - mu;
      m2 += d * d;
      m3 += d * d * d;
      m4 += d * d * d * d;
    }
    // 256 bins over [0, L]; for 8-bit images this is one bin per level.
    std::array<std::size_t, 256> hist{};
    for (std::size_t i = 0; i < pixels; ++i)
      ++hist[static_cast<std::size_t>(static_cast<long>(px[i * 3 + c]) * 256 / levels)];
    double entropy = 0.0;
    for (auto cnt : hist) {
      if (cnt == 0) continue;
      const double p = static_cast<double>(cnt) / n;
      entropy -= p * std::log(p);
    }
    out[static_cast<std::size_t>(c) * 5 + 0] = mu;
    out[static_cast<std::size_t>(c) * 5 + 1] = m2 / n;
    out[static_cast<std::size_t>(c) * 5 + 2] = entropy;
    out[static_cast<std::size_t>(c) * 5 + 3] = m3 / n;
    out[static_cast<std::size_t>(c) * 5 + 4] = m4 / n;
  }
  return out;
}

using FeatureRows = std::vector<std::vector<double>>;

inline constexpr double kDefaultShrinkage = 1e-4;

class LdaModel {
 public:
  /// Predicted class label for one sample; ties resolve to the smaller label.
  int predict(std::span<const double> x) const {
    detail::require(x.size() == dims_, "sample dimension does not match the model");
    Eigen::VectorXd z(static_cast<Eigen::Index>(kept_.size()));
    for (std::size_t i = 0; i < kept_.size(); ++i)
      z[static_cast<Eigen::Index>(i)] = (x[kept_[i]] - center_[i]) / scale_[i];
    const Eigen::VectorXd scores = coef_.transpose() * z + bias_;
    Eigen::Index best = 0;
    for (Eigen::Index c = 1; c < scores.size(); ++c)
      if (scores[c] > scores[best]) best = c;
    return classes_[static_cast<std::size_t>(best)];
  }

  const std::vector<int>& classes() const noexcept { return classes_; }
  const std::vector<double>& priors() const noexcept { return priors_; }
  /// Indices of input columns used by the discriminant.
  const std::vector<std::size_t>& kept_columns() const noexcept { return kept_; }

 private:
  friend LdaModel lda_fit(const FeatureRows&, std::span<const int>, double);

  std::size_t dims_ = 0;
  std::vector<int> classes_;
  std::vector<double> priors_;
  std::vector<std::size_t> kept_;
  std::vector<double> center_;
  std::vector<double> scale_;
  Eigen::MatrixXd coef_;  ///< kept x classes, Sigma^{-1} mu_c
  Eigen::VectorXd bias_;  ///< -1/2 mu_c' Sigma^{-1} mu_c + ln prior_c
};

/// Gaussian equal-covariance discriminant with
/// Sigma_lambda = (1 - lambda) Sigma_pooled + lambda diag(Sigma_pooled).
///
/// Columns are standardised internally; columns with no within-class spread
/// are dropped because no diagonal shrinkage can make them invertible.
inline LdaModel lda_fit(const FeatureRows& features, std::span<const int> labels, double lambda) {
  detail::require(features.size() == labels.size(), "feature/label count mismatch");
  detail::require(features.size() >= 2, "LDA needs at least 2 samples");
  detail::require(lambda >= 0.0 && lambda <= 1.0, "shrinkage lambda must lie in [0, 1]");
  const std::size_t n = features.size();
  const std::size_t p = features.front().size();
  for (const auto& row : features) detail::require(row.size() == p, "ragged feature matrix");

  LdaModel model;
  model.dims_ = p;
  std::map<int, std::size_t> class_index;
  for (int l : labels) class_index.emplace(l, 0);
  detail::require(class_index.size() >= 2, "LDA needs at least 2 classes");
  for (auto& [label, idx] : class_index) {
    idx = model.classes_.size();
    model.classes_.push_back(label);
  }
  const std::size_t k = model.classes_.size();
  std::vector<std::size_t> cls(n);
  std::vector<double> count(k, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    cls[i] = class_index.at(labels[i]);
    count[cls[i]] += 1.0;
  }

  // Standardise by overall mean / spread.
  Eigen::MatrixXd x(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(p));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < p; ++j)
      x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = features[i][j];
  const Eigen::RowVectorXd mean = x.colwise().mean();
  x.rowwise() -= mean;
  const Eigen::RowVectorXd spread = (x.colwise().squaredNorm() / static_cast<double>(n)).cwiseSqrt();

  Eigen::MatrixXd class_mean = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(p));
  for (std::size_t i = 0; i < n; ++i) class_mean.row(static_cast<Eigen::Index>(cls[i])) += x.row(static_cast<Eigen::Index>(i));
  for (std::size_t c = 0; c < k; ++c) class_mean.row(static_cast<Eigen::Index>(c)) /= count[c];
  Eigen::MatrixXd resid = x;
  for (std::size_t i = 0; i < n; ++i) resid.row(static_cast<Eigen::Index>(i)) -= class_mean.row(static_cast<Eigen::Index>(cls[i]));

  const double dof = static_cast<double>(n > k ? n - k : 1);
  for (std::size_t j = 0; j < p; ++j) {
    const double s = spread[static_cast<Eigen::Index>(j)];
    if (!(s > 0.0)) continue;
    const double within = resid.col(static_cast<Eigen::Index>(j)).squaredNorm() / dof / (s * s);
    if (within > 1e-20) model.kept_.push_back(j);
  }

  const auto q = static_cast<Eigen::Index>(model.kept_.size());
  model.priors_.resize(k);
  for (std::size_t c = 0; c < k; ++c) model.priors_[c] = count[c] / static_cast<double>(n);
  model.center_.resize(model.kept_.size());
  model.scale_.resize(model.kept_.size());
  Eigen::MatrixXd r(static_cast<Eigen::Index>(n), q);
  Eigen::MatrixXd mu(q, static_cast<Eigen::Index>(k));
  for (Eigen::Index a = 0; a < q; ++a) {
    const auto j = static_cast<Eigen::Index>(model.kept_[static_cast<std::size_t>(a)]);
    model.center_[static_cast<std::size_t>(a)] = mean[j];
    model.scale_[static_cast<std::size_t>(a)] = spread[j];
    r.col(a) = resid.col(j) / spread[j];
    mu.row(a) = class_mean.col(j).transpose() / spread[j];
  }

  model.bias_.resize(static_cast<Eigen::Index>(k));
  if (q == 0) {
    model.coef_ = Eigen::MatrixXd::Zero(0, static_cast<Eigen::Index>(k));
    for (std::size_t c = 0; c < k; ++c) model.bias_[static_cast<Eigen::Index>(c)] = std::log(model.priors_[c]);
    return model;
  }

  Eigen::MatrixXd sigma = (r.transpose() * r) / dof;
  if (lambda > 0.0) {
    const Eigen::VectorXd d = sigma.diagonal();
    sigma *= (1.0 - lambda);
    sigma.diagonal() += lambda * d;
  }
  const Eigen::LDLT<Eigen::MatrixXd> ldlt(sigma);
  const Eigen::VectorXd pivots = ldlt.vectorD().cwiseAbs();
  if (ldlt.info() != Eigen::Success || !ldlt.isPositive() ||
      pivots.minCoeff() <= 1e-12 * std::max(1.0, pivots.maxCoeff())) {
    throw NumericalSingularity(
        "pooled within-class covariance is singular; use a shrinkage lambda > 0");
  }
  model.coef_ = ldlt.solve(mu);
  for (std::size_t c = 0; c < k; ++c) {
    const auto ci = static_cast<Eigen::Index>(c);
    model.bias_[ci] = -0.5 * mu.col(ci).dot(model.coef_.col(ci)) + std::log(model.priors_[c]);
  }
  return model;
}

struct EvalReport {
  double accuracy = 0.0;
  std::vector<int> classes;
  std::vector<double> per_class_accuracy;
  std::vector<std::vector<std::size_t>> confusion;  ///< [true][predicted]
  std::vector<int> predictions;
  nlohmann::json config = nlohmann::json::object();
};

/// Leave-one-out: fit on all samples but one, predict the held-out one.
inline EvalReport loo_evaluate(const FeatureRows& features, std::span<const int> labels,
                               double lambda = kDefaultShrinkage, unsigned jobs = 1) {
  detail::require(features.size() == labels.size(), "feature/label count mismatch");
  std::map<int, std::size_t> per_class;
  for (int l : labels) ++per_class[l];
  detail::require(per_class.size() >= 2, "leave-one-out needs at least 2 classes");
  for (const auto& [label, cnt] : per_class)
    detail::require(cnt >= 2, "class " + std::to_string(label) +
                                  " has a single sample; leave-one-out needs >= 2 per class");

  const std::size_t n = features.size();
  std::vector<int> predictions(n);
  parallel_for(n, jobs, [&](std::size_t held) {
    FeatureRows train;
    std::vector<int> train_labels;
    train.reserve(n - 1);
    train_labels.reserve(n - 1);
    for (std::size_t i = 0; i < n; ++i) {
      if (i == held) continue;
      train.push_back(features[i]);
      train_labels.push_back(labels[i]);
    }
    predictions[held] = lda_fit(train, train_labels, lambda).predict(features[held]);
  });

  EvalReport rep;
  std::map<int, std::size_t> idx;
  for (const auto& [label, cnt] : per_class) {
    idx[label] = rep.classes.size();
    rep.classes.push_back(label);
  }
  const std::size_t k = rep.classes.size();
  rep.confusion.assign(k, std::vector<std::size_t>(k, 0));
  std::size_t correct = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto t = idx.at(labels[i]);
    const auto it = idx.find(predictions[i]);
    ++rep.confusion[t][it->second];
    if (predictions[i] == labels[i]) ++correct;
  }
  rep.accuracy = static_cast<double>(correct) / static_cast<double>(n);
  rep.per_class_accuracy.resize(k);
  for (std::size_t c = 0; c < k; ++c)
    rep.per_class_accuracy[c] =
        static_cast<double>(rep.confusion[c][c]) / static_cast<double>(per_class.at(rep.classes[c]));
  rep.predictions = std::move(predictions);
  return rep;
}

inline nlohmann::json report_to_json(const EvalReport& rep) {
  nlohmann::json j;
  j["accuracy"] = rep.accuracy;
  j["samples"] = rep.predictions.size();
  auto& table = j["per_class"] = nlohmann::json::array();
  for (std::size_t c = 0; c < rep.classes.size(); ++c) {
    std::size_t total = 0;
    for (auto v : rep.confusion[c]) total += v;
    table.push_back({{"label", rep.classes[c]},
                     {"samples", total},
                     {"correct", rep.confusion[c][c]},
                     {"accuracy", rep.per_class_accuracy[c]}});
  }
  j["classes"] = rep.classes;
  j["confusion"] = rep.confusion;
  j["config"] = rep.config;
  return j;
}

inline void write_report_text(std::ostream& os, const EvalReport& rep) {
  std::size_t total = rep.predictions.size();
  std::size_t correct = 0;
  for (std::size_t c = 0; c < rep.classes.size(); ++c) correct += rep.confusion[c][c];
  os << "leave-one-out LDA: " << correct << "/" << total << " correct, accuracy "
     << rep.accuracy * 100.0 << "%\n";
  if (!rep.config.empty()) os << "config: " << rep.config.dump() << "\n";
  os << "label  samples  accuracy\n";
  for (std::size_t c = 0; c < rep.classes.size(); ++c) {
    std::size_t samples = 0;
    for (auto v : rep.confusion[c]) samples += v;
    os << rep.classes[c] << "  " << samples << "  " << rep.per_class_accuracy[c] * 100.0 << "%\n";
  }
}

}  // namespace mcn
