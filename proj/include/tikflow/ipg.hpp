#pragma once

// Implicit inertial proximal gradient discretization of the flow, its
// degenerate baselines, the discrete energy sequences, the appendix
// coefficient sequences with sign/onset scans, and the growth-condition /
// Tikhonov-drift checks.

#include "tikflow/ode.hpp"

#include <string>
#include <vector>

namespace tikflow {

struct StepParams {
  double h = 1.0;  // > 0
  double alpha = 1.0;
  double beta = 0.0;
  double a = 0.0;
  double p = 0.0;
  double q = 0.0;  // in [0,1)
  DeltaSpec delta;  // delta_k = delta(k*h), non-decreasing

  double delta_k(long k) const { return delta(k * h); }
  double q_k(long k) const { return std::pow(k * h, q); }
  double a_k(long k) const { return a * std::pow(k * h, -p); }
  void validate() const;
};

struct StepCoefficients {
  double d;    // inertia weight d_k
  double rho;  // prox step rho_k = d_k (beta h + h^2 delta_k)
  double a_k;
  double q_k;
};

StepCoefficients step_coefficients(long k, const StepParams& params);

// One update: y_k = x_k + d_k (x_k - x_{k-1} + beta h grad g(x_k)),
// x_{k+1} = prox(rho_k, y_k - h^2 d_k a_k x_k).
Vec ipga_step(long k, const Vec& xk, const Vec& xkm1, const StepParams& params,
              const ObjectiveOracle& oracle);

// Residual norms of the three equivalent forms of the update at a triple
// (x_{k-1}, x_k, x_{k+1}): the second-difference form, the resolvent form,
// and the q_k-scaled form.  step_residual() is the second-difference form.
double step_residual(long k, const Vec& xkm1, const Vec& xk, const Vec& xkp1,
                     const StepParams& params, const ObjectiveOracle& oracle);
double step_residual_resolvent(long k, const Vec& xkm1, const Vec& xk, const Vec& xkp1,
                               const StepParams& params, const ObjectiveOracle& oracle);
double step_residual_scaled(long k, const Vec& xkm1, const Vec& xk, const Vec& xkp1,
                            const StepParams& params, const ObjectiveOracle& oracle);

enum class Baseline { full, no_hessian, no_decay };

struct IterateRecord {
  long k;
  Vec x;
  double g_gap;
  double grad_norm;
  double dist_min_norm;
  double step_norm;  // ||x_k - x_{k-1}||
  double d_k, rho_k, a_k;
  double energy_calE = std::numeric_limits<double>::quiet_NaN();
  double energy_E = std::numeric_limits<double>::quiet_NaN();
};

struct IterateLog {
  std::vector<IterateRecord> records;  // k = 1..K
  Vec x0;                              // pre-initial iterate
  StepParams params_used;              // after baseline substitution
  double wall_time_s = 0.0;
};

// Runs K-1 updates producing records x_1..x_K.  no_hessian forces beta=0;
// no_decay forces p=q=0 (same h, alpha, beta, a, delta_k).
IterateLog run_ipga(const StepParams& params, const ObjectiveOracle& oracle,
                    const Vec& x0, const Vec& x1, long K,
                    Baseline baseline = Baseline::full);

enum class DiscreteEnergyKind { calE, E };

// Default proof weights for the two discrete energies.
double default_lambda_calE(const StepParams& params);  // (alpha h - h^q)/2
double default_lambda_E(const StepParams& params);     // alpha h / 4

// Energy value per record (aligned with log.records).  kind=calE anchors at
// xstar in argmin g; kind=E anchors at the discrete Tikhonov points (xstar
// ignored).
std::vector<double> discrete_energy(const IterateLog& log, DiscreteEnergyKind kind,
                                    double lambda, const ObjectiveOracle& oracle,
                                    const Vec& xstar);

// Proof-side scalar sequences at index k (k >= 2; several reference k-1).
struct AppendixRecord {
  // Tied to the constant-anchor energy
  double m, n, zeta, ell, mu, B_cal;
  // Tied to the path-anchored energy
  double b, B, gamma, xi, eta, sigma, nu, omega, tau, s_k;
};

AppendixRecord appendix_sequences(long k, const StepParams& params, double lambda,
                                  double s);

struct OnsetScan {
  std::string name;
  long onset;          // smallest index from which the sign condition holds
                       // through kmax; -1 when it never settles
  bool holds_to_end;
  double ratio_at_end;  // sequence / reference power at kmax (NaN when n/a)
};

std::vector<OnsetScan> appendix_onset_scan(const StepParams& params, double lambda,
                                           double s, long kmax);

struct GrowthReport {
  long first_ok = -1;       // smallest k from which the condition holds onward
  bool holds_to_end = false;
  long c0_first_ok = -1;    // same for delta_k^2 >= c0 k^(p-q); -1 if unchecked
};

GrowthReport growth_condition_check(const StepParams& params, double c, long k_begin,
                                    long k_end, std::optional<double> c0 = {});

struct DriftCheck {
  double drift;       // ||xbar_{k+1} - xbar_k||
  double bound;       // min-form two-sided bound
  double asym_bound;  // (1+c) p / (k - c p) * ||xbar*||
  bool ok;
};

DriftCheck discrete_tikhonov_drift(long k, const ObjectiveOracle& oracle,
                                   const StepParams& params, double c);

}  // namespace tikflow
