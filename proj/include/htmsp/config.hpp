#pragma once

#include <cmath>
#include <cstdint>
#include <string>

#include "htmsp/errors.hpp"

namespace htmsp {

enum class InitMode { kRandomWeight, kRuleBased };
enum class InhibitMode { kPercentile, kMean };

inline std::string to_string(InitMode m) {
  return m == InitMode::kRandomWeight ? "random_weight" : "rule_based";
}

inline std::string to_string(InhibitMode m) {
  return m == InhibitMode::kPercentile ? "percentile" : "mean";
}

// Every SP hyperparameter in one validated record.
struct SpConfig {
  int gamma = 5;             // hypercube edge length, input-grid units
  double rho = 0.5;          // potential-connection fraction, (0, 1]
  double theta_c = 0.5;      // connection threshold on permanence
  double theta_s = 0.0;      // stimulus threshold on overlap
  double s = 0.2;            // target activation density, (0, 1]
  double phi = 2.0;          // inhibition radius, column-grid units
  double eta = 1.0;          // boost adaptation rate
  int avg_window = 100;      // activity-averaging window (config key big_t)
  double perm_delta = 0.05;  // Hebbian increment/decrement magnitude
  InitMode init_mode = InitMode::kRuleBased;
  InhibitMode inhibit_mode = InhibitMode::kMean;
  std::uint64_t seed = 42;

  void validate() const;
};

inline void SpConfig::validate() const {
  if (gamma < 1) throw ConfigError("gamma must be >= 1, got " + std::to_string(gamma));
  if (!(rho > 0.0 && rho <= 1.0))
    throw ConfigError("rho must be in (0, 1] (rho = 0 leaves every column disconnected), got " +
                      std::to_string(rho));
  if (!(theta_c >= 0.0 && theta_c <= 1.0))
    throw ConfigError("theta_c must be in [0, 1], got " + std::to_string(theta_c));
  if (!(theta_s >= 0.0))
    throw ConfigError("theta_s must be >= 0, got " + std::to_string(theta_s));
  if (!(s > 0.0 && s <= 1.0))
    throw ConfigError("s must be in (0, 1], got " + std::to_string(s));
  if (!(phi > 0.0)) throw ConfigError("phi must be > 0, got " + std::to_string(phi));
  if (!(eta >= 0.0)) throw ConfigError("eta must be >= 0, got " + std::to_string(eta));
  if (avg_window < 1)
    throw ConfigError("big_t must be >= 1, got " + std::to_string(avg_window));
  if (!(perm_delta >= 0.0 && perm_delta <= 1.0))
    throw ConfigError("perm_delta must be in [0, 1], got " + std::to_string(perm_delta));
}

}  // namespace htmsp
