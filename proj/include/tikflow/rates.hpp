#pragma once

// Rate-regime classifier over the (q, p) parameter square and empirical
// log-log slope fitting used to certify the predicted exponents.

#include "tikflow/ipg.hpp"

#include <map>
#include <span>
#include <string>
#include <vector>

namespace tikflow {

struct ConditionCheck {
  std::string name;
  bool holds;
  double threshold;  // index / time / witness constant, meaning per check
};

struct RegimeReport {
  enum class Setting { continuous, discrete } setting;
  std::string theorem_case;  // "none" when no hypothesis matches
  std::vector<ConditionCheck> condition_checks;
  // exponents with the delta power folded in; keys among:
  // gap, velocity, dist_to_path, gradient, step_norm
  std::map<std::string, double> predicted_exponents;
  std::vector<std::string> notes;
};

RegimeReport predict_rates(const FlowParams& params);
RegimeReport predict_rates(const StepParams& params);

struct SlopeFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  double window_lo = 0.0, window_hi = 1.0;  // fractions of the log range
  bool used_envelope = false;
  bool exhausted = false;  // all values at the 1e-15 floor inside the window
};

// OLS on (log abscissa, log value) inside [window] given as fractions of the
// log-abscissa range; optional running-minimum envelope preprocessing.
SlopeFit fit_loglog_slope(std::span<const double> abscissa,
                          std::span<const double> value,
                          std::pair<double, double> window = {0.5, 1.0},
                          bool envelope = true);

}  // namespace tikflow
