#pragma once

#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "aircran/types.hpp"

namespace aircran {

/**
 * Flat key-value config file, TOML-style syntax:
 *
 *   # comment
 *   K = 5
 *   fronthaul_capacity = 16.0
 *   max_precoding_power = [0.2, 0.2, 0.1]   # or a scalar, broadcast to K
 *   schemes = ["proposed", "baseline1"]
 *
 * One flat namespace; later keys override earlier ones.
 */
class KeyValueFile {
 public:
  static KeyValueFile parse_file(const std::string& path);
  static KeyValueFile parse_string(const std::string& text);

  bool has(const std::string& key) const;

  double get_real(const std::string& key) const;
  double get_real_or(const std::string& key, double fallback) const;
  long long get_int(const std::string& key) const;
  long long get_int_or(const std::string& key, long long fallback) const;
  std::string get_string(const std::string& key) const;
  std::string get_string_or(const std::string& key,
                            const std::string& fallback) const;
  std::vector<double> get_real_list(const std::string& key) const;
  std::vector<std::string> get_string_list(const std::string& key) const;

  /// Per-device field: accepts a scalar (broadcast to length K) or a list of
  /// exactly K entries.
  VectorXd get_per_device(const std::string& key, int K) const;

  const std::map<std::string, std::string>& raw() const { return entries_; }

 private:
  std::map<std::string, std::string> entries_;  // key -> raw value text
};

/// Builds a validated SystemConfig from a parsed file. awgn_power may be
/// given directly or derived from noise PSD and bandwidth (keys
/// noise_psd_dbm_hz, noise_figure_db, bandwidth_hz).
SystemConfig config_from_file(const KeyValueFile& kv);

/// Interchange format: per-field dense blocks, column-major, explicit
/// dimension header, hexfloat entries (exact round-trip).
void save_design(const DesignSolution& sol, std::ostream& out);
DesignSolution load_design(std::istream& in);

void save_design_file(const DesignSolution& sol, const std::string& path);
DesignSolution load_design_file(const std::string& path);

}  // namespace aircran
