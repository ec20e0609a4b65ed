#pragma once

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "aircran/convex.hpp"
#include "aircran/metrics.hpp"
#include "aircran/types.hpp"

namespace aircran {

// Floors keeping Taylor expansions and barriers defined.
inline constexpr double kAlphaFloor = 1e-8;
inline constexpr double kBetaFloor = 1e-12;
inline constexpr double kQFloor = 1e-12;

/// Real lift of the complex quadratic forms: mt = [Re m; Im m],
/// Ht_k = [[Re(hh^H), -Im(hh^H)], [Im(hh^H), Re(hh^H)]], Qt analogous.
struct RealLift {
  std::vector<MatrixXd> H_tilde;  // K matrices, 2MN x 2MN, symmetric PSD
  MatrixXd Q_tilde;               // 2MN x 2MN
};

VectorXd lift_vector(const VectorXcd& m);
VectorXcd unlift_vector(const VectorXd& mt);
MatrixXd lift_hermitian(const MatrixXcd& G);

RealLift complex_to_real_lift(const ChannelSet& channels, const VectorXd& q);

/// First-order minorant of Gamma1(alpha, c) = (sum c)^2 / alpha at
/// (alpha0, c0); tight at the anchor, a global lower bound on alpha > 0.
struct Gamma1Linearization {
  double grad_alpha = 0.0;  // -(sum c0 / alpha0)^2
  double grad_c = 0.0;      // 2 sum c0 / alpha0, same for every device
  double constant = 0.0;
  double value(double alpha, const VectorXd& c) const {
    return constant + grad_alpha * alpha + grad_c * c.sum();
  }
};

Gamma1Linearization linearize_gamma1(double alpha0, const VectorXd& c0);

/// First-order minorant of the PSD quadratic Gamma2(mt) = mt' H mt at mt0.
struct Gamma2Linearization {
  VectorXd grad;           // 2 H mt0
  double constant = 0.0;   // -mt0' H mt0
  double value(const VectorXd& mt) const { return grad.dot(mt) + constant; }
};

Gamma2Linearization linearize_gamma2(const VectorXd& mt0, const MatrixXd& H);

/// An emitted convex subproblem plus the anchor point in its variable layout
/// and the index maps back into the design.
struct Subproblem {
  ConvexProgram prog;
  VectorXd anchor_point;
  std::vector<int> active_dims;
  int kind = 0;  // 1 or 2
  bool has_beamformers = true;

  int idx_alpha(int di) const;
  int idx_c(int k, int di) const;
  int idx_beta(int k, int di) const;
  int idx_mt(int j, int di) const;
  int idx_q(int i) const;

  int K = 0, MN = 0;
};

/// Problem (47): variables (alpha, c, beta, m-lift), fronthaul noise fixed at
/// the anchor's q. With optimize_beamformers=false the beamformers stay at
/// the anchor (used by the uniform-beamforming baseline).
Subproblem build_subproblem1(const DesignSolution& anchor,
                             const SystemConfig& cfg,
                             const FeatureStatistics& stats,
                             const ChannelSet& channels,
                             bool optimize_beamformers = true);

/// Problem (48): variables (alpha, q); (c, m) fixed at the anchor; Gamma1
/// expanded only in alpha.
Subproblem build_subproblem2(const DesignSolution& anchor,
                             const SystemConfig& cfg,
                             const FeatureStatistics& stats,
                             const ConstraintConstants& constants);

void apply_subproblem_solution(const Subproblem& sub, const VectorXd& x,
                               DesignSolution& sol);

/// alpha(d) at the Lambda = Gamma1 equality: kappa_d (sum_k c)^2 / sigma_hat_d^2.
VectorXd equality_alpha(const DesignSolution& sol,
                        const FeatureStatistics& stats,
                        const SystemConfig& cfg);

/// Strictly feasible start: matched-filter beamformers, uniform receive
/// strength at 50% power/energy margin, uniform quantization slightly above
/// the capacity-tight level, alpha/beta at slightly slackened equality.
DesignSolution initial_feasible_point(const SystemConfig& cfg,
                                      const ChannelSet& channels,
                                      const FeatureStatistics& stats);

struct TraceRow {
  int iter = 0;
  int half = 0;
  double objective = 0.0;
  int subproblem = 0;
  int newton_steps = 0;
  double violation = 0.0;
};

struct ScaState {
  DesignSolution solution;
  int iterations = 0;
  std::vector<double> objective_trace;  // G[0..t], one entry per full iteration
  std::vector<TraceRow> rows;
  SolveStatus status = SolveStatus::optimal;
  std::string message;
};

/// Exact rescaling of an instance so channel magnitudes are O(1); all
/// constraint and objective values are invariant under (h, sigma_z^2, q, m)
/// -> (h/theta, sigma_z^2/theta^2, q/theta^2, theta m).
struct NormalizedInstance {
  SystemConfig cfg;
  ChannelSet channels;
  double theta = 1.0;
};

NormalizedInstance normalize_instance(const SystemConfig& cfg,
                                      const ChannelSet& channels);
DesignSolution denormalize_solution(DesignSolution sol, double theta);

/// Algorithm: alternate the two SCA subproblems, refreshing anchors each
/// half-iteration; stop when the gain increase falls below eps_stop. The
/// objective trace is non-decreasing (non-improving half-steps are rejected).
std::pair<DesignSolution, ScaState> run_algorithm1(
    const SystemConfig& cfg, const ChannelSet& channels,
    const FeatureStatistics& stats, double eps_stop = 1e-3,
    int max_iters = 50);

/// Convergence trace CSV: iter,half,objective,subproblem,newton_steps,violation
/// plus a trailing scheme column when a scheme name is given.
void write_trace_csv(const ScaState& state, std::ostream& out,
                     const std::string& scheme = std::string());

}  // namespace aircran
