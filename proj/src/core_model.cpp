#include "aircran/types.hpp"

#include <cmath>
#include <sstream>

namespace aircran {

namespace {

void require(bool ok, const std::string& msg) {
  if (!ok) throw ConfigError(msg);
}

void check_per_device(const VectorXd& v, int K, const std::string& name,
                      bool strictly_positive) {
  require(v.size() == K, name + ": expected " + std::to_string(K) +
                             " entries, got " + std::to_string(v.size()));
  for (int k = 0; k < K; ++k) {
    require(std::isfinite(v[k]), name + ": entry " + std::to_string(k) +
                                     " is not finite");
    if (strictly_positive)
      require(v[k] > 0.0, name + ": entry " + std::to_string(k) +
                              " must be positive");
    else
      require(v[k] >= 0.0, name + ": entry " + std::to_string(k) +
                               " must be nonnegative");
  }
}

}  // namespace

SystemConfig validate_config(SystemConfig cfg) {
  require(cfg.K >= 1, "K: device count must be >= 1");
  require(cfg.M >= 1, "M: RRH count must be >= 1");
  require(cfg.N >= 1, "N: antennas per RRH must be >= 1");
  require(cfg.D >= 1, "D: feature dimension must be >= 1");
  require(cfg.L >= 2, "L: class count must be >= 2");
  require(std::isfinite(cfg.fronthaul_capacity) && cfg.fronthaul_capacity > 0.0,
          "fronthaul_capacity: must be positive");
  require(std::isfinite(cfg.energy_budget) && cfg.energy_budget > 0.0,
          "energy_budget: must be positive");
  require(std::isfinite(cfg.slot_duration) && cfg.slot_duration > 0.0,
          "slot_duration: must be positive");
  require(std::isfinite(cfg.awgn_power) && cfg.awgn_power > 0.0,
          "awgn_power: must be positive");
  check_per_device(cfg.max_precoding_power, cfg.K, "max_precoding_power",
                   /*strictly_positive=*/true);
  check_per_device(cfg.signal_second_moment, cfg.K, "signal_second_moment",
                   /*strictly_positive=*/true);
  check_per_device(cfg.sensing_noise_power, cfg.K, "sensing_noise_power",
                   /*strictly_positive=*/false);

  double ebar = cfg.energy_budget / cfg.slot_duration;
  require(std::isfinite(ebar) && ebar > 0.0,
          "energy_budget/slot_duration: normalized energy must be finite and "
          "positive");
  return cfg;
}

double normalized_energy(const SystemConfig& cfg) {
  return cfg.energy_budget / cfg.slot_duration;
}

}  // namespace aircran
