#pragma once

// Damped inertial flow with vanishing Tikhonov term and time scaling,
// integrated through the Hessian-free first-order reformulation
//   y = xdot + beta * grad g(x),
//   xdot = y - beta*grad g(x)
//   ydot = -(alpha/t^q) y - (delta(t) - beta*alpha/t^q) grad g(x) - (a/t^p) x.
// One parameter family covers the special cases beta=0, delta==1 (plain
// vanishing damping) and q=p=0 (constant damping / constant weight).

#include "tikflow/problems.hpp"

#include <cmath>
#include <limits>
#include <vector>

namespace tikflow {

// Time scaling delta(t) = c * t^theta, non-decreasing (theta >= 0).
struct DeltaSpec {
  double c = 1.0;
  double theta = 0.0;
  double operator()(double t) const { return c * std::pow(t, theta); }
  double deriv(double t) const {
    return theta == 0.0 ? 0.0 : c * theta * std::pow(t, theta - 1.0);
  }
};

struct FlowParams {
  double alpha = 1.0;  // > 0
  double beta = 0.0;   // >= 0, Hessian-driven damping weight
  double a = 0.0;      // >= 0, Tikhonov weight numerator
  double p = 0.0;      // >= 0, Tikhonov decay exponent
  double q = 0.0;      // in [0,1), viscous damping decay exponent
  DeltaSpec delta;
  double t0 = 1.0;  // > 0
  // Witness constant for the t*delta'(t) < K1*delta(t) condition; for the
  // power law any K1 > theta works (recorded as theta + 1 when unset).
  std::optional<double> K1;

  void validate() const;
};

struct PhaseState {
  double t;
  Vec x;
  Vec y;  // y = xdot + beta * grad g(x)
};

struct TrajectorySample {
  double t;
  Vec x;
  Vec xdot;  // reconstructed as y - beta*grad g(x), never differenced
  double g_gap;
  double grad_norm;
  double dist_min_norm;  // NaN when the minimum-norm point is unknown
  double energy_Eb = std::numeric_limits<double>::quiet_NaN();
  double energy_E = std::numeric_limits<double>::quiet_NaN();
  double step_size;  // accepted step in effect at this sample
};

struct RunStats {
  long accepted = 0;
  long rejected = 0;
  double avg_step = 0.0;
  double wall_time_s = 0.0;
};

struct Trajectory {
  std::vector<TrajectorySample> samples;
  RunStats stats;
};

struct Tolerances {
  double rtol = 1e-6;
  double atol = 1e-9;
};

struct StiffnessError : std::runtime_error {
  double t;
  StiffnessError(double at, double h)
      : std::runtime_error("step size underflow at t = " + std::to_string(at) +
                           " (h = " + std::to_string(h) + ")"),
        t(at) {}
};

// Right-hand side of the reformulated system; exactly one gradient call.
std::pair<Vec, Vec> phase_rhs(double t, const PhaseState& state,
                              const FlowParams& params, const ObjectiveOracle& oracle);

// Conservative one-sided Lipschitz envelope of the reformulated field:
// L(t) = sqrt2 + sqrt2*alpha/t^q + sqrt2*beta*Lg
//        + 2*Lg*|delta(t) - beta*alpha/t^q| + 2a/t^p.
double lipschitz_envelope(double t, const FlowParams& params, double Lg);

// Adaptive Dormand-Prince 5(4), PI step controller, cubic Hermite dense
// output on a logarithmic grid of n_samples points from t0 to t_end.
Trajectory integrate(const FlowParams& params, const ObjectiveOracle& oracle,
                     const Vec& x0, const Vec& v0, double t_end,
                     Tolerances tol = {}, int n_samples = 400);

}  // namespace tikflow
