#pragma once

#include <iosfwd>
#include <vector>

#include "aircran/rng.hpp"
#include "aircran/types.hpp"

namespace aircran {

struct ForwardSample {
  int true_class = 0;    // 0-based label
  VectorXd ground_truth;  // x-tilde, length D
  VectorXd received;      // s-hat, length D
};

/// Ground-true feature draw x ~ N(mu_l, diag(var)) plus independent
/// per-device sensing noise N(0, eps_k^2 I). Returns K rows, D columns; the
/// clean draw is written to ground_truth.
MatrixXd sample_local_features(const FeatureStatistics& stats,
                               const SystemConfig& cfg, int label,
                               VectorXd& ground_truth, Rng& rng);

/**
 * One pass through the chain: zero-forcing transmit scalars, per-RRH AWGN,
 * Gaussian-test-channel quantization noise, receive beamforming, real part.
 * The signal term equals sum_k c_k(d) s_k(d) exactly.
 */
VectorXd forward_pass(const DesignSolution& sol, const MatrixXd& local_features,
                      const ChannelSet& channels, const SystemConfig& cfg,
                      Rng& rng);

ForwardSample simulate_sample(const DesignSolution& sol,
                              const FeatureStatistics& stats,
                              const ChannelSet& channels,
                              const SystemConfig& cfg, int label, Rng& rng);

/// Instantaneous precoding powers |b_k(d)|^2 = c_k(d)^2 / |m_d^H h_k|^2 and
/// the list of (k, d) entries exceeding P_hat_k (1 + 1e-7).
struct PowerAudit {
  MatrixXd power;  // K x D
  std::vector<std::pair<int, int>> flags;
};

PowerAudit transmit_power_audit(const DesignSolution& sol,
                                const ChannelSet& channels,
                                const SystemConfig& cfg);

/// CSV dump `trial,class,d,s_hat`.
void dump_samples(const std::vector<ForwardSample>& samples, std::ostream& out);

}  // namespace aircran
