#include "aircran/metrics.hpp"

#include <cmath>
#include <stdexcept>

#include <Eigen/Cholesky>

namespace aircran {

ConstraintConstants build_constants(const SystemConfig& cfg,
                                    const ChannelSet& channels,
                                    const FeatureStatistics& stats) {
  const int L = stats.classes();
  const int D = stats.dims();
  ConstraintConstants cc;
  cc.kappa = VectorXd::Zero(D);
  double pair_norm = 2.0 / (static_cast<double>(L) * (L - 1));
  for (int d = 0; d < D; ++d) {
    double acc = 0.0;
    for (int l = 0; l < L; ++l)
      for (int lp = l + 1; lp < L; ++lp) {
        double diff = stats.class_means(l, d) - stats.class_means(lp, d);
        acc += diff * diff;
      }
    cc.kappa[d] = pair_norm * acc;
  }

  const int MN = channels.antennas_total();
  // The rate bound uses the single maximum precoding power over all devices.
  double p_hat = cfg.max_precoding_power.maxCoeff();
  MatrixXcd A = MatrixXcd::Zero(MN, MN);
  for (const auto& hk : channels.h) A += p_hat * (hk * hk.adjoint());
  A += cfg.awgn_power * MatrixXcd::Identity(MN, MN);
  cc.A = 0.5 * (A + A.adjoint().eval());  // kill floating-point asymmetry
  return cc;
}

double pairwise_discriminant_gain(const FeatureStatistics& stats, int l,
                                  int lp) {
  if (l == lp || l < 0 || lp < 0 || l >= stats.classes() ||
      lp >= stats.classes())
    throw std::invalid_argument("pairwise_discriminant_gain: bad class pair");
  double g = 0.0;
  for (int d = 0; d < stats.dims(); ++d) {
    double diff = stats.class_means(l, d) - stats.class_means(lp, d);
    g += diff * diff / stats.feature_variances[d];
  }
  return g;
}

double overall_discriminant_gain(const FeatureStatistics& stats) {
  const int L = stats.classes();
  double acc = 0.0;
  for (int l = 0; l < L; ++l)
    for (int lp = l + 1; lp < L; ++lp)
      acc += pairwise_discriminant_gain(stats, l, lp);
  return 2.0 / (static_cast<double>(L) * (L - 1)) * acc;
}

VectorXd per_dimension_gain(const FeatureStatistics& stats) {
  const int L = stats.classes();
  const int D = stats.dims();
  VectorXd g = VectorXd::Zero(D);
  double pair_norm = 2.0 / (static_cast<double>(L) * (L - 1));
  for (int d = 0; d < D; ++d) {
    double acc = 0.0;
    for (int l = 0; l < L; ++l)
      for (int lp = l + 1; lp < L; ++lp) {
        double diff = stats.class_means(l, d) - stats.class_means(lp, d);
        acc += diff * diff;
      }
    g[d] = pair_norm * acc / stats.feature_variances[d];
  }
  return g;
}

AggregateStatistics aggregate_statistics(const DesignSolution& sol,
                                         const FeatureStatistics& stats,
                                         const SystemConfig& cfg) {
  const int L = stats.classes();
  const int D = stats.dims();
  const int K = sol.devices();
  AggregateStatistics agg;
  agg.post_means.resize(L, D);
  agg.post_variances.resize(D);
  agg.equivalent_noise.resize(D);
  for (int d = 0; d < D; ++d) {
    const VectorXcd& m = sol.beamformers[static_cast<std::size_t>(d)];
    VectorXcd noisy = (cfg.awgn_power * m.array() +
                       sol.quantization_diag.array() * m.array())
                          .matrix();
    double sigma2 = 0.5 * std::real(m.dot(noisy));  // 0.5 m^H (szI + Q) m
    double csum = sol.receive_strength.col(d).sum();
    double sens = 0.0;
    for (int k = 0; k < K; ++k) {
      double ck = sol.receive_strength(k, d);
      sens += ck * ck * cfg.sensing_noise_power[k];
    }
    agg.equivalent_noise[d] = sigma2;
    agg.post_variances[d] =
        csum * csum * stats.feature_variances[d] + sens + sigma2;
    for (int l = 0; l < L; ++l)
      agg.post_means(l, d) = csum * stats.class_means(l, d);
  }
  return agg;
}

double received_discriminant_gain(const DesignSolution& sol,
                                  const FeatureStatistics& stats,
                                  const SystemConfig& cfg) {
  AggregateStatistics agg = aggregate_statistics(sol, stats, cfg);
  const int L = stats.classes();
  const int D = stats.dims();
  double pair_norm = 2.0 / (static_cast<double>(L) * (L - 1));
  double acc = 0.0;
  for (int d = 0; d < D; ++d) {
    if (agg.post_variances[d] <= 0.0) continue;
    for (int l = 0; l < L; ++l)
      for (int lp = l + 1; lp < L; ++lp) {
        double diff = agg.post_means(l, d) - agg.post_means(lp, d);
        acc += diff * diff / agg.post_variances[d];
      }
  }
  return pair_norm * acc;
}

double fronthaul_rate(const VectorXd& q, const ConstraintConstants& constants) {
  const int MN = static_cast<int>(q.size());
  for (int i = 0; i < MN; ++i)
    if (!(q[i] > 0.0))
      throw std::invalid_argument("fronthaul_rate: q must be positive");
  MatrixXcd num = constants.A;
  num.diagonal().real() += q;
  Eigen::LLT<MatrixXcd> llt(num);
  if (llt.info() != Eigen::Success)
    throw std::runtime_error("fronthaul_rate: A + diag(q) not positive "
                             "definite");
  double log2det = 0.0;
  for (int i = 0; i < MN; ++i)
    log2det += 2.0 * std::log2(std::real(llt.matrixL()(i, i)));
  double denom = 0.0;
  for (int i = 0; i < MN; ++i) denom += std::log2(q[i]);
  return log2det - denom;
}

double lambda_value(const VectorXd& c_col, const VectorXcd& m_d,
                    const VectorXd& q, const FeatureStatistics& stats,
                    const SystemConfig& cfg, int d) {
  const int L = stats.classes();
  double pair_norm = 2.0 / (static_cast<double>(L) * (L - 1));
  double kappa = 0.0;
  for (int l = 0; l < L; ++l)
    for (int lp = l + 1; lp < L; ++lp) {
      double diff = stats.class_means(l, d) - stats.class_means(lp, d);
      kappa += pair_norm * diff * diff;
    }
  if (kappa <= 0.0)
    throw std::domain_error("lambda_value: dimension " + std::to_string(d) +
                            " is inactive (all class means equal)");
  double csum = c_col.sum();
  double sens = 0.0;
  for (int k = 0; k < static_cast<int>(c_col.size()); ++k)
    sens += c_col[k] * c_col[k] * cfg.sensing_noise_power[k];
  VectorXcd noisy =
      (cfg.awgn_power * m_d.array() + q.array() * m_d.array()).matrix();
  double noise = 0.5 * std::real(m_d.dot(noisy));
  return (csum * csum * stats.feature_variances[d] + sens + noise) / kappa;
}

double gamma1(double alpha_d, const VectorXd& c_col) {
  if (!(alpha_d > 0.0))
    throw std::invalid_argument("gamma1: alpha must be positive");
  double csum = c_col.sum();
  return csum * csum / alpha_d;
}

double gamma2(const VectorXd& m_tilde, const MatrixXd& H_tilde) {
  return m_tilde.dot(H_tilde * m_tilde);
}

FeasibilityReport feasibility_report(const DesignSolution& sol,
                                     const ChannelSet& channels,
                                     const SystemConfig& cfg,
                                     const FeatureStatistics& stats) {
  FeasibilityReport rep;
  const int K = sol.devices();
  const int D = sol.dims();
  rep.min_receive_strength = sol.receive_strength.minCoeff();
  double energy = 0.0;
  rep.max_power_violation = -std::numeric_limits<double>::infinity();
  for (int d = 0; d < D; ++d) {
    const VectorXcd& m = sol.beamformers[static_cast<std::size_t>(d)];
    for (int k = 0; k < K; ++k) {
      double ck = sol.receive_strength(k, d);
      if (ck == 0.0) {
        rep.max_power_violation =
            std::max(rep.max_power_violation, -cfg.max_precoding_power[k]);
        continue;
      }
      double g = std::norm(m.dot(channels.h[static_cast<std::size_t>(k)]));
      double power = ck * ck / g;  // |b_k(d)|^2
      rep.max_power_violation =
          std::max(rep.max_power_violation, power - cfg.max_precoding_power[k]);
      energy += power * cfg.signal_second_moment[k] * cfg.slot_duration;
    }
  }
  rep.energy_violation = energy - cfg.energy_budget;
  ConstraintConstants cc = build_constants(cfg, channels, stats);
  rep.rate_violation =
      fronthaul_rate(sol.quantization_diag, cc) - cfg.fronthaul_capacity;
  return rep;
}

}  // namespace aircran
