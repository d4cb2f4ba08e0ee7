#include "tikflow/ode.hpp"

#include <algorithm>
#include <chrono>

namespace tikflow {

void FlowParams::validate() const {
  if (!(alpha > 0.0)) throw std::invalid_argument("FlowParams: alpha must be > 0");
  if (beta < 0.0) throw std::invalid_argument("FlowParams: beta must be >= 0");
  if (a < 0.0) throw std::invalid_argument("FlowParams: a must be >= 0");
  if (p < 0.0) throw std::invalid_argument("FlowParams: p must be >= 0");
  if (q < 0.0 || q >= 1.0) throw std::invalid_argument("FlowParams: q must be in [0,1)");
  if (!(delta.c > 0.0)) throw std::invalid_argument("FlowParams: delta.c must be > 0");
  if (delta.theta < 0.0) throw std::invalid_argument("FlowParams: delta.theta must be >= 0");
  if (!(t0 > 0.0)) throw std::invalid_argument("FlowParams: t0 must be > 0");
}

std::pair<Vec, Vec> phase_rhs(double t, const PhaseState& state,
                              const FlowParams& params, const ObjectiveOracle& oracle) {
  oracle.require_domain(state.x);
  const Vec grad = oracle.gradient(state.x);
  const double damp = params.alpha / std::pow(t, params.q);
  Vec xdot = state.y - params.beta * grad;
  Vec ydot = -damp * state.y - (params.delta(t) - params.beta * damp) * grad -
             (params.a / std::pow(t, params.p)) * state.x;
  return {std::move(xdot), std::move(ydot)};
}

double lipschitz_envelope(double t, const FlowParams& params, double Lg) {
  const double s2 = std::sqrt(2.0);
  const double damp = params.alpha / std::pow(t, params.q);
  return s2 + s2 * damp + s2 * params.beta * Lg +
         2.0 * Lg * std::abs(params.delta(t) - params.beta * damp) +
         2.0 * params.a / std::pow(t, params.p);
}

namespace {

// Dormand-Prince 5(4) tableau (FSAL).
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                 a64 = 49.0 / 176, a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                 b5 = -2187.0 / 6784, b6 = 11.0 / 84;
// difference between 5th and embedded 4th order weights
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                 e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

struct RhsWrap {
  const FlowParams& params;
  const ObjectiveOracle& oracle;
  Vec operator()(double t, const Vec& u) const {
    const int n = oracle.dimension;
    PhaseState s{t, u.head(n), u.tail(n)};
    auto [xd, yd] = phase_rhs(t, s, params, oracle);
    Vec out(2 * n);
    out.head(n) = xd;
    out.tail(n) = yd;
    return out;
  }
};

double error_norm(const Vec& err, const Vec& u_old, const Vec& u_new, Tolerances tol) {
  double acc = 0.0;
  for (Eigen::Index i = 0; i < err.size(); ++i) {
    const double sc =
        tol.atol + tol.rtol * std::max(std::abs(u_old[i]), std::abs(u_new[i]));
    const double r = err[i] / sc;
    acc += r * r;
  }
  return std::sqrt(acc / static_cast<double>(err.size()));
}

// cubic Hermite over one accepted step
Vec hermite(double t, double tn, double h, const Vec& u0, const Vec& u1,
            const Vec& f0, const Vec& f1) {
  const double s = (t - tn) / h;
  const double s2 = s * s, s3 = s2 * s;
  // increment form: exact at the endpoints and for constant segments
  const double h10 = s3 - 2 * s2 + s;
  const double h01 = -2 * s3 + 3 * s2, h11 = s3 - s2;
  return u0 + h01 * (u1 - u0) + (h10 * h) * f0 + (h11 * h) * f1;
}

}  // namespace

Trajectory integrate(const FlowParams& params, const ObjectiveOracle& oracle,
                     const Vec& x0, const Vec& v0, double t_end, Tolerances tol,
                     int n_samples) {
  params.validate();
  if (!(t_end > params.t0)) throw std::invalid_argument("integrate: t_end must exceed t0");
  if (n_samples < 2) throw std::invalid_argument("integrate: need >= 2 samples");
  oracle.require_domain(x0);

  const auto t_start_wall = std::chrono::steady_clock::now();
  const int n = oracle.dimension;
  RhsWrap rhs{params, oracle};

  // initial phase state: y0 = v0 + beta * grad g(x0)
  Vec u(2 * n);
  u.head(n) = x0;
  u.tail(n) = v0 + params.beta * oracle.gradient(x0);

  // logarithmic output grid
  std::vector<double> grid(n_samples);
  const double lr = std::log(t_end / params.t0);
  for (int i = 0; i < n_samples; ++i)
    grid[i] = params.t0 * std::exp(lr * i / (n_samples - 1));
  grid.back() = t_end;

  Trajectory traj;
  traj.samples.reserve(n_samples);

  double t = params.t0;
  double h = 1e-3 * params.t0;
  double errold = 1e-4;
  Vec f1 = rhs(t, u);
  std::size_t gi = 0;

  auto emit = [&](double ts, const Vec& us, double step) {
    TrajectorySample s;
    s.t = ts;
    s.x = us.head(n);
    const Vec grad = oracle.gradient(s.x);
    s.xdot = us.tail(n) - params.beta * grad;
    s.grad_norm = grad.norm();
    s.g_gap = oracle.value(s.x);  // g* subtracted below
    s.dist_min_norm = oracle.known_min_norm_solution
                          ? (s.x - *oracle.known_min_norm_solution).norm()
                          : std::numeric_limits<double>::quiet_NaN();
    s.step_size = step;
    traj.samples.push_back(std::move(s));
  };

  // grid point at t0
  while (gi < grid.size() && grid[gi] <= t * (1 + 1e-15)) emit(grid[gi++], u, h);

  Vec k2(2 * n), k3(2 * n), k4(2 * n), k5(2 * n), k6(2 * n), k7(2 * n);
  while (t < t_end) {
    h = std::min(h, t_end - t);
    if (h < 1e-14 * t) throw StiffnessError(t, h);

    const Vec& k1 = f1;
    k2 = rhs(t + c2 * h, u + h * (a21 * k1));
    k3 = rhs(t + c3 * h, u + h * (a31 * k1 + a32 * k2));
    k4 = rhs(t + c4 * h, u + h * (a41 * k1 + a42 * k2 + a43 * k3));
    k5 = rhs(t + c5 * h, u + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
    k6 = rhs(t + h, u + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
    Vec u_new = u + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
    k7 = rhs(t + h, u_new);  // FSAL
    Vec err = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
    const double errn = error_norm(err, u, u_new, tol);

    if (errn <= 1.0) {
      // dense output across [t, t+h]
      const double tn = t, hn = h;
      while (gi < grid.size() && grid[gi] <= tn + hn * (1 + 1e-12)) {
        const double ts = std::min(grid[gi], tn + hn);
        emit(ts, hermite(ts, tn, hn, u, u_new, k1, k7), hn);
        ++gi;
      }
      t += h;
      u.swap(u_new);
      f1.swap(k7);
      ++traj.stats.accepted;
      const double e = std::max(errn, 1e-10);
      double fac = 0.9 * std::pow(e, -0.17) * std::pow(errold, 0.04);
      h *= std::clamp(fac, 0.2, 5.0);
      errold = e;
    } else {
      ++traj.stats.rejected;
      h *= std::clamp(0.9 * std::pow(errn, -0.2), 0.2, 0.9);
    }
  }
  while (gi < grid.size()) emit(grid[gi++], u, h);

  // subtract g* (known value, or the best value observed as a floor estimate)
  double gstar;
  if (oracle.known_min_value) {
    gstar = *oracle.known_min_value;
  } else {
    gstar = std::numeric_limits<double>::infinity();
    for (const auto& s : traj.samples) gstar = std::min(gstar, s.g_gap);
  }
  for (auto& s : traj.samples) s.g_gap = std::max(s.g_gap - gstar, 0.0);

  traj.stats.avg_step = (t_end - params.t0) / std::max<long>(traj.stats.accepted, 1);
  traj.stats.wall_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start_wall)
          .count();
  return traj;
}

}  // namespace tikflow
