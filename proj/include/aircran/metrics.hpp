#pragma once

#include "aircran/types.hpp"

namespace aircran {

/**
 * Instance constants shared by the constraint functions:
 *  kappa(d) = (2/(L(L-1))) * sum_{l<l'} (mu_l(d) - mu_l'(d))^2
 *  A = P_hat_max * sum_k h_k h_k^H + sigma_z^2 I   (Hermitian PSD, MN x MN)
 */
struct ConstraintConstants {
  VectorXd kappa;  // length D
  MatrixXcd A;     // MN x MN
};

ConstraintConstants build_constants(const SystemConfig& cfg,
                                    const ChannelSet& channels,
                                    const FeatureStatistics& stats);

/// Symmetric-KL separation of classes l and lp: sum_d (mu_l - mu_lp)^2 / var_d.
double pairwise_discriminant_gain(const FeatureStatistics& stats, int l,
                                  int lp);

/// Average over all unordered class pairs; equals the sum over dimensions of
/// the per-dimension gains.
double overall_discriminant_gain(const FeatureStatistics& stats);

/// Per-dimension overall gain, kappa_d / var_d summed form.
VectorXd per_dimension_gain(const FeatureStatistics& stats);

/// Post-aggregation mixture statistics of the received feature:
///   mu_hat_l(d) = sum_k c_k(d) mu_l(d)
///   sigma^2(d)  = 0.5 m_d^H (sigma_z^2 I + diag(q)) m_d
///   sigma_hat_d^2 = (sum_k c)^2 var_d + sum_k c^2 eps_k^2 + sigma^2(d)
AggregateStatistics aggregate_statistics(const DesignSolution& sol,
                                         const FeatureStatistics& stats,
                                         const SystemConfig& cfg);

/// Overall discriminant gain of the received feature (on AggregateStatistics).
double received_discriminant_gain(const DesignSolution& sol,
                                  const FeatureStatistics& stats,
                                  const SystemConfig& cfg);

/// Rate-distortion fronthaul rate in bits per channel use:
///   log2 det(A + diag(q)) - sum_i log2 q_i.
/// Strictly decreasing in every q_i. Throws on non-positive q.
double fronthaul_rate(const VectorXd& q, const ConstraintConstants& constants);

/// Lambda for dimension d: (signal variance + sensing + equivalent noise)
/// divided by kappa_d. Throws std::domain_error when kappa_d == 0 (inactive
/// dimension).
double lambda_value(const VectorXd& c_col, const VectorXcd& m_d,
                    const VectorXd& q, const FeatureStatistics& stats,
                    const SystemConfig& cfg, int d);

/// Gamma1(alpha, c) = (sum_k c_k)^2 / alpha.
double gamma1(double alpha_d, const VectorXd& c_col);

/// Gamma2 in the lifted real domain: mt^T Ht mt (= |m^H h|^2).
double gamma2(const VectorXd& m_tilde, const MatrixXd& H_tilde);

/// Feasibility audit of a full design against power, energy, fronthaul and
/// sign constraints. All residuals <= tol means feasible.
struct FeasibilityReport {
  double max_power_violation = 0.0;   // max_k,d (|b|^2 - P_hat_k)
  double energy_violation = 0.0;      // sum_kd |b|^2 w_k T - E
  double rate_violation = 0.0;        // fronthaul_rate(q) - C
  double min_receive_strength = 0.0;  // min entry of c
  bool feasible(double tol) const {
    return max_power_violation <= tol && energy_violation <= tol &&
           rate_violation <= tol && min_receive_strength >= -tol;
  }
};

FeasibilityReport feasibility_report(const DesignSolution& sol,
                                     const ChannelSet& channels,
                                     const SystemConfig& cfg,
                                     const FeatureStatistics& stats);

}  // namespace aircran
