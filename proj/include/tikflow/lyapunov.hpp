#pragma once

// Continuous energy functionals along trajectories and audits of the
// integrated decay inequalities / Tikhonov-path bounds behind the rate
// certificates.

#include "tikflow/ode.hpp"

#include <span>

namespace tikflow {

struct LyapunovKnobs {
  double b;       // anchor weight, 0 < b < alpha
  double lambda;  // proof weight
  double K = 1.0;
  double r = 0.0;   // max{q, p-q}, recomputed
  double K2 = 0.0;  // (p+K1)^2, recomputed
  bool lambda_fallback = false;  // true when the interval rule was empty
};

// b = alpha/2; lambda = midpoint of (alpha/a, alpha/b - 1) when nonempty,
// else min(alpha, a)/4 (flagged); r, K2 recomputed from params.
LyapunovKnobs default_knobs(const FlowParams& params);

enum class EnergyKind { Eb, strong };

struct DecayReport {
  int first_nonneg_index = 0;
  double onset_t = 0.0;
  double max_violation = 0.0;
  bool passed = false;
  double fitted_source_constant = 0.0;
};

// Anchored energy
//   (delta(t) t^{2q} - beta (b + 2q t^{q-1} - alpha) t^q) (g(x) - g(x*))
//   + a/2 t^{2q-p} ||x||^2
//   + 1/2 ||b (x - x*) + t^q (xdot + beta grad g(x))||^2
//   + b/2 (alpha - b - q t^{q-1}) ||x - x*||^2.
double energy_Eb(const TrajectorySample& sample, const LyapunovKnobs& knobs,
                 const FlowParams& params, const ObjectiveOracle& oracle,
                 const Vec& xstar);

// Path-anchored energy with g_t(x) = g(x) + (a / (2 delta(t) t^p)) ||x||^2 and
// x_t the minimizer of g_t:
//   delta(t) t^{2q} (g_t(x) - g_t(x_t))
//   + b/2 (alpha - b - q t^{q-1}) ||x - x_t||^2
//   + 1/2 ||b (x - x_t) + t^q (xdot + beta grad g(x))||^2.
double energy_strong(const TrajectorySample& sample, const LyapunovKnobs& knobs,
                     const FlowParams& params, const ObjectiveOracle& oracle);

// Tikhonov weight at time t: epsilon(t) = a / (delta(t) t^p).
double path_epsilon(double t, const FlowParams& params);

// First sample index where both coefficient signs of energy_Eb hold
// (gap coefficient >= 0 and alpha - b - q t^{q-1} >= 0); -1 if never.
int eb_onset_index(const Trajectory& traj, const LyapunovKnobs& knobs,
                   const FlowParams& params);

// Core check of E(t_j) <= E(t_i) + C * integral_{t_i}^{t_j} s^{q-p} ds over
// all pairs i < j: C fitted as the smallest constant making the first half
// pass, violation measured on the second half.
DecayReport integrated_decay_check(std::span<const double> t, std::span<const double> E,
                                   double q, double p, double tol);

DecayReport decay_audit(const Trajectory& traj, EnergyKind kind,
                        const LyapunovKnobs& knobs, const FlowParams& params,
                        const ObjectiveOracle& oracle);

// Threshold t* after which t^p delta'(t) + p t^{p-1} delta(t) >= a*beta
// (strong-convergence hypothesis), solved in closed form for the power law.
// Returns t0 when the condition already holds there, +inf when it never does.
double strong_condition_threshold(const FlowParams& params);

}  // namespace tikflow
