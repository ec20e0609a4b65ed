#pragma once

#include <utility>

#include "aircran/metrics.hpp"
#include "aircran/sca.hpp"
#include "aircran/types.hpp"

namespace aircran {

enum class BaselineKind {
  uniform_quantization = 1,  // Q = lambda I, joint (c, m) optimization
  uniform_beamforming = 2,   // m_d = 1, joint (c, q) optimization
  fixed_precoding = 3,       // b_k(d) = b0, joint (m, q) optimization
};

struct BaselineSpec {
  BaselineKind kind = BaselineKind::uniform_quantization;
  // Fixed precoding level for kind 3; <= 0 selects the largest uniform value
  // meeting every power cap and 90% of the energy budget.
  double fixed_precoding_level = 0.0;
};

/// lambda > 0 with fronthaul_rate(lambda * 1) == C within 1e-8 bits, found by
/// bisection on the strictly decreasing rate.
double uniform_quantization_lambda(const ConstraintConstants& constants,
                                   double C);

/// Runs the requested comparison scheme; returns a constraint-feasible
/// solution and a monotone trace.
std::pair<DesignSolution, ScaState> run_baseline(const BaselineSpec& spec,
                                                 const SystemConfig& cfg,
                                                 const ChannelSet& channels,
                                                 const FeatureStatistics& stats,
                                                 double eps_stop = 1e-3,
                                                 int max_iters = 50);

}  // namespace aircran
