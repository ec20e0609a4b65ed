#pragma once

#include "aircran/metrics.hpp"
#include "aircran/rng.hpp"
#include "aircran/types.hpp"

namespace aircran {

enum class ClassifierKind { map_aggregate, linear_on_clean };

/// MAP decision under the received mixture (equal priors), or a linear
/// classifier built from the clean statistics and applied to rescaled
/// features.
struct Classifier {
  ClassifierKind kind = ClassifierKind::map_aggregate;
  AggregateStatistics aggregate;  // for map_aggregate
  MatrixXd weights;               // L x D, for linear_on_clean
  VectorXd bias;                  // L
};

Classifier make_map_classifier(const AggregateStatistics& agg);
Classifier make_linear_on_clean(const FeatureStatistics& stats);

/// argmax_l sum_d -(s - mu_hat_l)^2 / sigma_hat^2; ties break toward the
/// smallest label.
int map_classify(const VectorXd& received, const AggregateStatistics& agg);

/// Undoes the aggregation scaling: s(d) / sum_k c_k(d); dimensions with zero
/// total strength are set to 0.
VectorXd rescale_to_clean(const VectorXd& received, const DesignSolution& sol);

int classify(const Classifier& clf, const VectorXd& received,
             const DesignSolution& sol);

struct AccuracyEstimate {
  double accuracy = 0.0;
  double stderr_ = 0.0;  // binomial standard error
  long long n = 0;
};

/// Monte-Carlo accuracy over balanced classes through the full forward chain.
AccuracyEstimate estimate_accuracy(const Classifier& clf,
                                   const DesignSolution& sol,
                                   const FeatureStatistics& stats,
                                   const ChannelSet& channels,
                                   const SystemConfig& cfg, long long n_samples,
                                   Rng& rng);

}  // namespace aircran
