#include "aircran/simulate.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>

namespace aircran {

MatrixXd sample_local_features(const FeatureStatistics& stats,
                               const SystemConfig& cfg, int label,
                               VectorXd& ground_truth, Rng& rng) {
  const int D = stats.dims();
  if (label < 0 || label >= stats.classes())
    throw std::invalid_argument("sample_local_features: label out of range");
  ground_truth.resize(D);
  for (int d = 0; d < D; ++d)
    ground_truth[d] = stats.class_means(label, d) +
                      std::sqrt(stats.feature_variances[d]) * rng.normal();
  MatrixXd local(cfg.K, D);
  for (int k = 0; k < cfg.K; ++k) {
    double eps = std::sqrt(cfg.sensing_noise_power[k]);
    for (int d = 0; d < D; ++d)
      local(k, d) = ground_truth[d] + (eps > 0.0 ? eps * rng.normal() : 0.0);
  }
  return local;
}

VectorXd forward_pass(const DesignSolution& sol, const MatrixXd& local_features,
                      const ChannelSet& channels, const SystemConfig& cfg,
                      Rng& rng) {
  const int D = sol.dims();
  const int K = sol.devices();
  const int MN = channels.antennas_total();
  VectorXd received(D);
  for (int d = 0; d < D; ++d) {
    const VectorXcd& m = sol.beamformers[static_cast<std::size_t>(d)];
    VectorXcd y = VectorXcd::Zero(MN);
    for (int k = 0; k < K; ++k) {
      double ck = sol.receive_strength(k, d);
      if (ck == 0.0) continue;
      cplx mh = m.dot(channels.h[static_cast<std::size_t>(k)]);  // m^H h_k
      double g = std::norm(mh);
      if (!(g > 0.0))
        throw std::runtime_error(
            "forward_pass: vanishing effective channel for device " +
            std::to_string(k) + " with positive receive strength");
      cplx b = ck * std::conj(mh) / g;
      y += channels.h[static_cast<std::size_t>(k)] * (b * local_features(k, d));
    }
    for (int i = 0; i < MN; ++i) {
      y[i] += rng.cnormal(cfg.awgn_power);
      y[i] += rng.cnormal(sol.quantization_diag[i]);
    }
    received[d] = std::real(m.dot(y));
  }
  return received;
}

ForwardSample simulate_sample(const DesignSolution& sol,
                              const FeatureStatistics& stats,
                              const ChannelSet& channels,
                              const SystemConfig& cfg, int label, Rng& rng) {
  ForwardSample s;
  s.true_class = label;
  MatrixXd local = sample_local_features(stats, cfg, label, s.ground_truth, rng);
  s.received = forward_pass(sol, local, channels, cfg, rng);
  return s;
}

PowerAudit transmit_power_audit(const DesignSolution& sol,
                                const ChannelSet& channels,
                                const SystemConfig& cfg) {
  const int D = sol.dims();
  const int K = sol.devices();
  PowerAudit audit;
  audit.power = MatrixXd::Zero(K, D);
  for (int d = 0; d < D; ++d) {
    const VectorXcd& m = sol.beamformers[static_cast<std::size_t>(d)];
    for (int k = 0; k < K; ++k) {
      double ck = sol.receive_strength(k, d);
      if (ck == 0.0) continue;
      double g = std::norm(m.dot(channels.h[static_cast<std::size_t>(k)]));
      double p = ck * ck / g;
      audit.power(k, d) = p;
      if (p > cfg.max_precoding_power[k] * (1.0 + 1e-7))
        audit.flags.emplace_back(k, d);
    }
  }
  return audit;
}

void dump_samples(const std::vector<ForwardSample>& samples,
                  std::ostream& out) {
  out << "trial,class,d,s_hat\n";
  char buf[48];
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto& s = samples[i];
    for (int d = 0; d < static_cast<int>(s.received.size()); ++d) {
      std::snprintf(buf, sizeof(buf), "%.17g", s.received[d]);
      out << i << ',' << s.true_class + 1 << ',' << d + 1 << ',' << buf
          << "\n";
    }
  }
}

}  // namespace aircran
