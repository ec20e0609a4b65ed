#include "aircran/inference.hpp"

#include <cmath>
#include <stdexcept>

#include "aircran/simulate.hpp"

namespace aircran {

Classifier make_map_classifier(const AggregateStatistics& agg) {
  for (int d = 0; d < static_cast<int>(agg.post_variances.size()); ++d)
    if (!(agg.post_variances[d] > 0.0))
      throw std::invalid_argument(
          "make_map_classifier: post variances must be positive");
  Classifier clf;
  clf.kind = ClassifierKind::map_aggregate;
  clf.aggregate = agg;
  return clf;
}

Classifier make_linear_on_clean(const FeatureStatistics& stats) {
  const int L = stats.classes();
  const int D = stats.dims();
  Classifier clf;
  clf.kind = ClassifierKind::linear_on_clean;
  clf.weights.resize(L, D);
  clf.bias.resize(L);
  // Bayes rule for shared diagonal covariance is linear in the feature.
  for (int l = 0; l < L; ++l) {
    double b = 0.0;
    for (int d = 0; d < D; ++d) {
      double mu = stats.class_means(l, d);
      clf.weights(l, d) = mu / stats.feature_variances[d];
      b -= 0.5 * mu * mu / stats.feature_variances[d];
    }
    clf.bias[l] = b;
  }
  return clf;
}

int map_classify(const VectorXd& received, const AggregateStatistics& agg) {
  const int L = static_cast<int>(agg.post_means.rows());
  const int D = static_cast<int>(agg.post_means.cols());
  int best = 0;
  double best_score = -std::numeric_limits<double>::infinity();
  for (int l = 0; l < L; ++l) {
    double score = 0.0;
    for (int d = 0; d < D; ++d) {
      double diff = received[d] - agg.post_means(l, d);
      score -= diff * diff / agg.post_variances[d];
    }
    if (score > best_score) {  // strict: ties stay with the smallest label
      best_score = score;
      best = l;
    }
  }
  return best;
}

VectorXd rescale_to_clean(const VectorXd& received, const DesignSolution& sol) {
  const int D = sol.dims();
  VectorXd out = VectorXd::Zero(D);
  for (int d = 0; d < D; ++d) {
    double scale = sol.receive_strength.col(d).sum();
    if (scale > 0.0)
      out[d] = received[d] / scale;
    else if (scale < 0.0)
      throw std::runtime_error("rescale_to_clean: negative receive scale");
  }
  return out;
}

int classify(const Classifier& clf, const VectorXd& received,
             const DesignSolution& sol) {
  if (clf.kind == ClassifierKind::map_aggregate)
    return map_classify(received, clf.aggregate);
  VectorXd clean = rescale_to_clean(received, sol);
  const int L = static_cast<int>(clf.weights.rows());
  int best = 0;
  double best_score = -std::numeric_limits<double>::infinity();
  for (int l = 0; l < L; ++l) {
    double score = clf.weights.row(l).dot(clean) + clf.bias[l];
    if (score > best_score) {
      best_score = score;
      best = l;
    }
  }
  return best;
}

AccuracyEstimate estimate_accuracy(const Classifier& clf,
                                   const DesignSolution& sol,
                                   const FeatureStatistics& stats,
                                   const ChannelSet& channels,
                                   const SystemConfig& cfg, long long n_samples,
                                   Rng& rng) {
  if (n_samples < 1)
    throw std::invalid_argument("estimate_accuracy: n_samples must be >= 1");
  const int L = stats.classes();
  long long correct = 0;
  long long done = 0;
  // Balanced classes: label cycles through 0..L-1.
  for (long long i = 0; i < n_samples; ++i) {
    int label = static_cast<int>(i % L);
    ForwardSample s = simulate_sample(sol, stats, channels, cfg, label, rng);
    if (classify(clf, s.received, sol) == label) ++correct;
    ++done;
  }
  AccuracyEstimate est;
  est.n = done;
  est.accuracy = static_cast<double>(correct) / static_cast<double>(done);
  est.stderr_ = std::sqrt(est.accuracy * (1.0 - est.accuracy) /
                          static_cast<double>(done));
  return est;
}

}  // namespace aircran
