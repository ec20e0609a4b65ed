#pragma once

#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace aircran {

using Eigen::MatrixXcd;
using Eigen::MatrixXd;
using Eigen::VectorXcd;
using Eigen::VectorXd;
using cplx = std::complex<double>;

/// Thrown by validate_config and the config/plan parsers; the message names
/// the offending field.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/**
 * All scalar network and resource parameters of one instance.
 *
 * Per-device vectors (max_precoding_power, signal_second_moment,
 * sensing_noise_power) always have length K after validation; the config
 * parser broadcasts scalars.
 */
struct SystemConfig {
  int K = 0;  // devices
  int M = 0;  // RRHs
  int N = 0;  // antennas per RRH
  int D = 0;  // feature dimensions == time slots
  int L = 0;  // classes

  double fronthaul_capacity = 0.0;  // C, bits per channel use (total over RRHs)
  VectorXd max_precoding_power;     // P_hat_k, length K, dimensionless
  double energy_budget = 0.0;       // E, joules
  double slot_duration = 0.0;       // T, seconds
  VectorXd signal_second_moment;    // E[s_k^2(d)], length K
  double awgn_power = 0.0;          // sigma_z^2, watts
  VectorXd sensing_noise_power;     // eps_k^2, length K
  std::uint64_t rng_seed = 0;

  int antennas_total() const { return M * N; }
};

/// Class means and the shared diagonal covariance of the ground-true feature
/// vector. Holds the per-dimension class-conditional variance; the equivalent
/// uplink noise and the AWGN power live elsewhere.
struct FeatureStatistics {
  MatrixXd class_means;      // L x D
  VectorXd feature_variances;  // length D, all > 0

  int classes() const { return static_cast<int>(class_means.rows()); }
  int dims() const { return static_cast<int>(class_means.cols()); }
};

/**
 * Complex uplink channels between every device and every RRH.
 *
 * Stored concatenated per device (length M*N). Ordering contract used
 * everywhere: index i = m*N + n is RRH m, antenna n (0-based).
 */
struct ChannelSet {
  int M = 0;
  int N = 0;
  std::vector<VectorXcd> h;  // K vectors of length M*N

  int devices() const { return static_cast<int>(h.size()); }
  int antennas_total() const { return M * N; }

  /// Per-RRH view of device k's channel (length N).
  Eigen::VectorBlock<const VectorXcd> per_rrh(int k, int m) const {
    return h[static_cast<std::size_t>(k)].segment(m * N, N);
  }
};

/// The optimization variables of the joint design.
struct DesignSolution {
  MatrixXd receive_strength;            // c, K x D, entries >= 0
  std::vector<VectorXcd> beamformers;   // m_d, D vectors of length M*N
  VectorXd quantization_diag;           // q, length M*N, entries > 0
  VectorXd aux_gain;                    // alpha, length D
  MatrixXd aux_energy;                  // beta, K x D

  int devices() const { return static_cast<int>(receive_strength.rows()); }
  int dims() const { return static_cast<int>(receive_strength.cols()); }
};

/// Post-aggregation mixture statistics at the central processor.
struct AggregateStatistics {
  MatrixXd post_means;      // mu_hat, L x D
  VectorXd post_variances;  // sigma_hat^2, length D
  VectorXd equivalent_noise;  // sigma^2(d) = 0.5 m^H (sigma_z^2 I + Q) m
};

/// Checks every SystemConfig invariant; returns cfg unchanged on success.
/// Throws ConfigError naming the offending field otherwise.
SystemConfig validate_config(SystemConfig cfg);

/// Budget of the implemented energy constraint
///   sum_{k,d} c_k(d)^2 * w_k / |m_d^H h_k|^2 <= normalized_energy(cfg),
/// with w_k = E[s_k^2(d)] kept inside the per-term weights. Equals E/T.
double normalized_energy(const SystemConfig& cfg);

}  // namespace aircran
