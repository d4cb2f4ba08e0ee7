#include "tikflow/ipg.hpp"

#include <chrono>
#include <cmath>

namespace tikflow {

void StepParams::validate() const {
  if (!(h > 0.0)) throw std::invalid_argument("StepParams: h must be > 0");
  if (!(alpha > 0.0)) throw std::invalid_argument("StepParams: alpha must be > 0");
  if (beta < 0.0) throw std::invalid_argument("StepParams: beta must be >= 0");
  if (a < 0.0) throw std::invalid_argument("StepParams: a must be >= 0");
  if (p < 0.0) throw std::invalid_argument("StepParams: p must be >= 0");
  if (q < 0.0 || q >= 1.0) throw std::invalid_argument("StepParams: q must be in [0,1)");
  if (!(delta.c > 0.0) || delta.theta < 0.0)
    throw std::invalid_argument("StepParams: delta_k must be positive non-decreasing");
}

StepCoefficients step_coefficients(long k, const StepParams& params) {
  if (k < 1) throw std::invalid_argument("step_coefficients: k must be >= 1");
  const double kh = k * params.h;
  const double d = std::pow(kh, params.q + params.p) /
                   (std::pow(kh, params.q + params.p) +
                    params.alpha * params.h * std::pow(kh, params.p) +
                    params.a * params.h * params.h * std::pow(kh, params.q));
  StepCoefficients c;
  c.d = d;
  c.rho = d * (params.beta * params.h + params.h * params.h * params.delta_k(k));
  c.a_k = params.a_k(k);
  c.q_k = params.q_k(k);
  return c;
}

Vec ipga_step(long k, const Vec& xk, const Vec& xkm1, const StepParams& params,
              const ObjectiveOracle& oracle) {
  const StepCoefficients c = step_coefficients(k, params);
  const Vec grad = oracle.gradient(xk);
  const Vec y = xk + c.d * (xk - xkm1 + params.beta * params.h * grad);
  return prox(oracle, c.rho, y - params.h * params.h * c.d * c.a_k * xk);
}

double step_residual(long k, const Vec& xkm1, const Vec& xk, const Vec& xkp1,
                     const StepParams& params, const ObjectiveOracle& oracle) {
  const double h = params.h, kh = k * h;
  const Vec r = (xkp1 - 2.0 * xk + xkm1) / (h * h) +
                (params.alpha / std::pow(kh, params.q)) * (xkp1 - xk) / h +
                params.beta * (oracle.gradient(xkp1) - oracle.gradient(xk)) / h +
                params.delta_k(k) * oracle.gradient(xkp1) + params.a_k(k) * xkp1;
  return r.norm();
}

double step_residual_resolvent(long k, const Vec& xkm1, const Vec& xk, const Vec& xkp1,
                               const StepParams& params, const ObjectiveOracle& oracle) {
  const StepCoefficients c = step_coefficients(k, params);
  const Vec y = xk + c.d * (xk - xkm1 + params.beta * params.h * oracle.gradient(xk));
  const Vec v = y - params.h * params.h * c.d * c.a_k * xk;
  return (xkp1 + c.rho * oracle.gradient(xkp1) - v).norm();
}

double step_residual_scaled(long k, const Vec& xkm1, const Vec& xk, const Vec& xkp1,
                            const StepParams& params, const ObjectiveOracle& oracle) {
  const double h = params.h;
  const double qk = params.q_k(k);
  const Vec r = qk * (xkp1 - 2.0 * xk + xkm1) + params.alpha * h * (xkp1 - xk) +
                h * (params.beta + h * params.delta_k(k)) * qk * oracle.gradient(xkp1) -
                h * params.beta * qk * oracle.gradient(xk) +
                h * h * qk * params.a_k(k) * xkp1;
  return r.norm();
}

IterateLog run_ipga(const StepParams& params, const ObjectiveOracle& oracle,
                    const Vec& x0, const Vec& x1, long K, Baseline baseline) {
  params.validate();
  if (K < 2) throw std::invalid_argument("run_ipga: K must be >= 2");
  StepParams eff = params;
  if (baseline == Baseline::no_hessian) eff.beta = 0.0;
  if (baseline == Baseline::no_decay) {
    eff.p = 0.0;
    eff.q = 0.0;
  }

  const auto t_wall = std::chrono::steady_clock::now();
  IterateLog log;
  log.x0 = x0;
  log.params_used = eff;
  log.records.reserve(K);

  const Vec* xbar = oracle.known_min_norm_solution ? &*oracle.known_min_norm_solution
                                                   : nullptr;
  const double gstar = oracle.known_min_value.value_or(0.0);

  auto record = [&](long k, const Vec& x, const Vec& xprev) {
    IterateRecord r;
    r.k = k;
    r.x = x;
    r.g_gap = std::max(oracle.value(x) - gstar, 0.0);
    r.grad_norm = oracle.gradient(x).norm();
    r.dist_min_norm =
        xbar ? (x - *xbar).norm() : std::numeric_limits<double>::quiet_NaN();
    r.step_norm = (x - xprev).norm();
    const StepCoefficients c = step_coefficients(k, eff);
    r.d_k = c.d;
    r.rho_k = c.rho;
    r.a_k = c.a_k;
    log.records.push_back(std::move(r));
  };

  record(1, x1, x0);
  Vec xm = x0, xc = x1;
  for (long k = 1; k < K; ++k) {
    Vec xn = ipga_step(k, xc, xm, eff, oracle);
    record(k + 1, xn, xc);
    xm = std::move(xc);
    xc = std::move(xn);
  }
  log.wall_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_wall).count();
  return log;
}

double default_lambda_calE(const StepParams& params) {
  return 0.5 * (params.alpha * params.h - std::pow(params.h, params.q));
}

double default_lambda_E(const StepParams& params) {
  return 0.25 * params.alpha * params.h;
}

// ---------------------------------------------------------------------------
// Scalar proof sequences.  All are pure functions of (k, params, lambda, s).

namespace {

double ell_k(long k, const StepParams& P, double lam) {
  return P.q_k(k) - P.q_k(k + 1) + P.alpha * P.h - lam;
}

double Bcal_k(long k, const StepParams& P) {
  return P.beta * (P.q_k(k) - P.q_k(k + 1)) + P.h * P.q_k(k) * P.delta_k(k);
}

double mu_k(long k, const StepParams& P, double lam) {
  return P.h * (P.q_k(k + 1) + ell_k(k, P, lam)) * Bcal_k(k, P) +
         P.h * P.beta * ell_k(k, P, lam) * P.q_k(k + 1);
}

double B_k(long k, const StepParams& P) {
  return P.h * (P.beta + P.h * P.delta_k(k)) * P.q_k(k);
}

double b_k(long k, const StepParams& P) {
  return (P.q_k(k - 1) + P.alpha * P.h) * B_k(k - 1, P) -
         P.h * P.beta * P.q_k(k) * P.q_k(k);
}

double gamma_k(long k, const StepParams& P, double lam) {
  return P.q_k(k - 1) - P.q_k(k) + P.alpha * P.h - lam +
         0.5 * P.h * P.h * P.q_k(k - 1) * P.a_k(k - 1);
}

// xi_k (pairs with grad at index k+1 inside the energy)
double xi_k(long k, const StepParams& P, double lam) {
  const double Bk = B_k(k, P), qk1 = P.q_k(k + 1);
  return 0.5 * Bk * Bk - P.h * P.h * P.beta * P.beta * qk1 * qk1 -
         2.0 * lam * P.beta * P.beta * qk1 * qk1 / (P.q_k(k) * P.a_k(k));
}

// eta_k (pairs with the step at index k+1 inside the energy)
double eta_k(long k, const StepParams& P, double lam) {
  const double qa = P.q_k(k) + P.alpha * P.h;
  const double h2qa = P.h * P.h * P.q_k(k) * P.a_k(k);
  const double qk1 = P.q_k(k + 1);
  return qa * qa - qk1 * qk1 - lam * qk1 - 3.0 * lam * (qa + h2qa) + qa * h2qa;
}

double sigma_k(long k, const StepParams& P) {
  const double h2qa = P.h * P.h * P.q_k(k - 1) * P.a_k(k - 1);
  return (P.q_k(k - 1) + P.alpha * P.h - h2qa) * h2qa -
         b_k(k, P) * P.a_k(k) / P.delta_k(k);
}

}  // namespace

AppendixRecord appendix_sequences(long k, const StepParams& params, double lambda,
                                  double s) {
  if (k < 2) throw std::invalid_argument("appendix_sequences: k must be >= 2");
  const StepParams& P = params;
  AppendixRecord r;
  const double h = P.h;
  r.ell = ell_k(k, P, lambda);
  r.B_cal = Bcal_k(k, P);
  r.mu = mu_k(k, P, lambda);
  r.m = 0.5 * h * h * P.beta * P.q_k(k + 1) * (2.0 * r.B_cal - P.beta * P.q_k(k + 1));
  r.n = 0.5 * lambda *
        (h * h * P.q_k(k) * P.a_k(k) + r.ell - ell_k(k + 1, P, lambda));
  r.zeta = 0.5 * h * h *
           (P.q_k(k) * P.a_k(k) *
                (lambda + r.ell + P.q_k(k + 1) - h * h * P.q_k(k) * P.a_k(k)) -
            P.q_k(k + 1) * P.a_k(k + 1) * (P.q_k(k + 2) + ell_k(k + 1, P, lambda)));

  r.B = B_k(k, P);
  r.b = b_k(k, P);
  r.gamma = gamma_k(k, P, lambda);
  r.xi = xi_k(k, P, lambda);
  r.eta = eta_k(k, P, lambda);
  r.sigma = sigma_k(k, P);
  r.nu = r.b + lambda * r.B - b_k(k + 1, P);
  r.s_k = s * std::pow(k * h, P.q - P.p);
  const double h2qa = h * h * P.q_k(k) * P.a_k(k);
  r.omega = 0.5 * lambda *
            (-2.0 * P.q_k(k) -
             2.0 * (P.q_k(k) + P.alpha * h + h2qa - P.q_k(k + 1)) * r.s_k +
             P.q_k(k + 1) + P.q_k(k - 1) +
             0.5 * h * h * P.q_k(k - 1) * P.a_k(k - 1));
  r.tau = 0.5 * ((b_k(k + 1, P) - lambda * r.B) * P.a_k(k) / P.delta_k(k) -
                 (P.q_k(k) + P.alpha * h - lambda) * h2qa + r.sigma);
  return r;
}

std::vector<OnsetScan> appendix_onset_scan(const StepParams& params, double lambda,
                                           double s, long kmax) {
  struct Item {
    const char* name;
    std::function<double(const AppendixRecord&)> val;
    double ref_exp;  // reference power for the end ratio; NaN = raw value
  };
  const double nan = std::numeric_limits<double>::quiet_NaN();
  const double qp = params.q - params.p;
  std::vector<Item> items = {
      {"m", [](const AppendixRecord& r) { return r.m; }, nan},
      {"n", [](const AppendixRecord& r) { return r.n; }, qp},
      {"zeta", [](const AppendixRecord& r) { return r.zeta; }, qp},
      {"ell", [](const AppendixRecord& r) { return r.ell; }, 0.0},
      {"b", [](const AppendixRecord& r) { return r.b; }, nan},
      {"gamma", [](const AppendixRecord& r) { return r.gamma; }, 0.0},
      {"xi", [](const AppendixRecord& r) { return r.xi; }, nan},
      {"eta", [](const AppendixRecord& r) { return r.eta; }, params.q},
      {"sigma", [](const AppendixRecord& r) { return r.sigma; }, nan},
      {"nu", [](const AppendixRecord& r) { return r.nu; }, nan},
      {"omega", [](const AppendixRecord& r) { return r.omega; }, qp},
      {"tau_minus_half_sigma",
       [](const AppendixRecord& r) { return r.tau - 0.5 * r.sigma; }, nan},
  };
  std::vector<long> last_fail(items.size(), 1);
  for (long k = 2; k <= kmax; ++k) {
    const AppendixRecord r = appendix_sequences(k, params, lambda, s);
    for (std::size_t i = 0; i < items.size(); ++i)
      if (!(items[i].val(r) >= 0.0)) last_fail[i] = k;
  }
  const AppendixRecord end = appendix_sequences(kmax, params, lambda, s);
  std::vector<OnsetScan> out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    OnsetScan sc;
    sc.name = items[i].name;
    sc.holds_to_end = last_fail[i] < kmax;
    sc.onset = sc.holds_to_end ? last_fail[i] + 1 : -1;
    sc.ratio_at_end = std::isnan(items[i].ref_exp)
                          ? items[i].val(end)
                          : items[i].val(end) / std::pow(kmax, items[i].ref_exp);
    out.push_back(std::move(sc));
  }
  return out;
}

// ---------------------------------------------------------------------------

std::vector<double> discrete_energy(const IterateLog& log, DiscreteEnergyKind kind,
                                    double lambda, const ObjectiveOracle& oracle,
                                    const Vec& xstar) {
  const StepParams& P = log.params_used;
  const double h = P.h;
  std::vector<double> out;
  out.reserve(log.records.size());
  for (std::size_t i = 0; i < log.records.size(); ++i) {
    const long k = log.records[i].k;
    const Vec& xk = log.records[i].x;
    const Vec& xkm1 = i == 0 ? log.x0 : log.records[i - 1].x;
    const Vec grad = oracle.gradient(xk);
    const double qk = P.q_k(k);
    if (kind == DiscreteEnergyKind::calE) {
      const double ell = ell_k(k, P, lambda);
      const Vec theta = lambda * (xk - xstar) +
                        qk * (xk - xkm1 + h * P.beta * grad);
      const double gap = oracle.value(xk) -
                         (oracle.known_min_value ? *oracle.known_min_value
                                                 : oracle.value(xstar));
      out.push_back(mu_k(k, P, lambda) * gap + 0.5 * theta.squaredNorm() +
                    0.5 * lambda * ell * (xk - xstar).squaredNorm() +
                    0.5 * h * h * qk * P.a_k(k) * (P.q_k(k + 1) + ell) *
                        xk.squaredNorm());
    } else {
      if (k < 2) {
        out.push_back(std::numeric_limits<double>::quiet_NaN());
        continue;
      }
      const double eps = P.a_k(k) / P.delta_k(k);
      const Vec xbar = tikhonov_minimizer(oracle, {eps, 1e-12, 200});
      auto gk = [&](const Vec& z) {
        return oracle.value(z) + 0.5 * eps * z.squaredNorm();
      };
      const Vec v = lambda * (xk - xbar) + qk * (xk - xkm1 + h * P.beta * grad);
      out.push_back(b_k(k, P) * (gk(xk) - gk(xbar)) + 0.5 * v.squaredNorm() +
                    0.5 * lambda * gamma_k(k, P, lambda) * (xk - xbar).squaredNorm() +
                    0.5 * xi_k(k - 1, P, lambda) * grad.squaredNorm() +
                    0.5 * eta_k(k - 1, P, lambda) * (xk - xkm1).squaredNorm() +
                    0.5 * sigma_k(k, P) * xk.squaredNorm());
    }
  }
  return out;
}

GrowthReport growth_condition_check(const StepParams& params, double c, long k_begin,
                                    long k_end, std::optional<double> c0) {
  if (!(c > 0.0)) throw std::invalid_argument("growth_condition_check: c must be > 0");
  GrowthReport rep;
  long last_fail = k_begin - 1, last_fail_c0 = k_begin - 1;
  for (long k = k_begin; k <= k_end; ++k) {
    const double kp = std::pow(static_cast<double>(k), params.p);
    const double kp1 = std::pow(static_cast<double>(k + 1), params.p);
    const double denom = (1.0 + c) * kp - c * kp1;
    const bool ok = denom > 0.0 &&
                    params.delta_k(k + 1) <= kp / denom * params.delta_k(k);
    if (!ok) last_fail = k;
    if (c0) {
      const double dk = params.delta_k(k);
      if (!(dk * dk >=
            *c0 * std::pow(static_cast<double>(k), params.p - params.q)))
        last_fail_c0 = k;
    }
  }
  rep.holds_to_end = last_fail < k_end;
  rep.first_ok = rep.holds_to_end ? last_fail + 1 : -1;
  if (c0) rep.c0_first_ok = last_fail_c0 < k_end ? last_fail_c0 + 1 : -1;
  return rep;
}

DriftCheck discrete_tikhonov_drift(long k, const ObjectiveOracle& oracle,
                                   const StepParams& params, double c) {
  const double eps_k = params.a_k(k) / params.delta_k(k);
  const double eps_k1 = params.a_k(k + 1) / params.delta_k(k + 1);
  const Vec xk = tikhonov_minimizer(oracle, {eps_k, 1e-12, 200});
  const Vec xk1 = tikhonov_minimizer(oracle, {eps_k1, 1e-12, 200});
  DriftCheck d;
  d.drift = (xk1 - xk).norm();
  const double ratio = eps_k / eps_k1;  // delta_{k+1} a_k / (delta_k a_{k+1})
  d.bound = std::min((ratio - 1.0) * xk.norm(), (1.0 - 1.0 / ratio) * xk1.norm());
  const Vec xbar = min_norm_solution(oracle);
  d.asym_bound = k > c * params.p
                     ? (1.0 + c) * params.p / (k - c * params.p) * xbar.norm()
                     : std::numeric_limits<double>::infinity();
  d.ok = d.drift <= d.bound * (1.0 + 1e-6);
  return d;
}

}  // namespace tikflow
