#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "rotsol/hamiltonians.hpp"

namespace rotsol {

/// Flat `key = value` text with dotted keys. '#' starts a comment; values may be quoted.
/// Throws InputError on malformed lines or duplicate keys.
std::map<std::string, std::string> parse_key_values(const std::string& text);

enum class ThatMode { automatic, explicit_values };

struct RunConfig {
  SystemSpec system;
  double M = 0.0;
  SurfaceRule surface = SurfaceRule::growth;
  IntVec k;
  double delta = 0.3;
  ThatMode that_mode = ThatMode::automatic;
  std::vector<double> that_values;
  bool sign_sweep = true;
  int d_cut_override = 0;
  int nt_override = 0;
  int start_directions = 0;  ///< 0: 2 for one momentum dimension, 8 otherwise
  int start_q_per_dim = 4;
  double start_perturbation = 1e-3;
  double tol_fp = 1e-11;
  double tol_crit = 1e-9;
  double distinct_tol = 0.0;  ///< 0: 1e-4 (1 + r'')
  std::uint64_t seed = 1;
  std::string out_dir = "out";

  /// Key/value echo in a stable order.
  std::vector<std::pair<std::string, std::string>> echo() const;
};

/// Builds and validates a RunConfig. `require_rotation` enforces a nonzero k (solve).
RunConfig parse_run_config(const std::string& text, bool require_rotation = true);
RunConfig load_run_config(const std::string& path, bool require_rotation = true);

}  // namespace rotsol
