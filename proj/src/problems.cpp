#include "tikflow/problems.hpp"

#include <cmath>

namespace tikflow {

bool ObjectiveOracle::in_domain(const Vec& x) const {
  if (!feasible_lower) return true;
  for (int i = 0; i < dimension; ++i)
    if (!(x[i] > (*feasible_lower)[i])) return false;
  return true;
}

void ObjectiveOracle::require_domain(const Vec& x) const {
  if (x.size() != dimension)
    throw DomainError(name + ": point has dimension " + std::to_string(x.size()) +
                      ", oracle expects " + std::to_string(dimension));
  if (!in_domain(x))
    throw DomainError(name + ": point outside open feasible domain");
}

std::pair<double, Vec> evaluate(const ObjectiveOracle& oracle, const Vec& x) {
  oracle.require_domain(x);
  return {oracle.value(x), oracle.gradient(x)};
}

// ---------------------------------------------------------------------------
// RNG: counter-based bit mixer (splitmix64 finalizer) + Box-Muller.

namespace {

std::uint64_t mix64(std::uint64_t seed, std::uint64_t i) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ull * (i + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

// uniform on (0,1): 53-bit mantissa, offset by half an ulp so 0 is excluded
double uniform01(std::uint64_t seed, std::uint64_t i) {
  return (static_cast<double>(mix64(seed, i) >> 11) + 0.5) * 0x1.0p-53;
}

}  // namespace

double standard_normal(std::uint64_t seed, std::uint64_t index) {
  const std::uint64_t pair = index / 2;
  const double u1 = uniform01(seed, 2 * pair);
  const double u2 = uniform01(seed, 2 * pair + 1);
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double phi = 2.0 * M_PI * u2;
  return (index % 2 == 0) ? r * std::cos(phi) : r * std::sin(phi);
}

// ---------------------------------------------------------------------------
// Inner Newton machinery shared by prox and tikhonov_minimizer.  Solves
// grad g(x) + shift*x = target  (shift >= 0) staying strictly interior.

namespace {

Mat dense_hessian(const ObjectiveOracle& oracle, const Vec& x) {
  const int n = oracle.dimension;
  Mat H(n, n);
  if (oracle.hessian_vec) {
    Vec e = Vec::Zero(n);
    for (int j = 0; j < n; ++j) {
      e[j] = 1.0;
      H.col(j) = oracle.hessian_vec(x, e);
      e[j] = 0.0;
    }
  } else {
    // central finite differences of the gradient
    const double h0 = 1e-6 * (1.0 + x.norm());
    Vec xp = x, xm = x;
    for (int j = 0; j < n; ++j) {
      xp[j] += h0;
      xm[j] -= h0;
      H.col(j) = (oracle.gradient(xp) - oracle.gradient(xm)) / (2.0 * h0);
      xp[j] = x[j];
      xm[j] = x[j];
    }
    H = 0.5 * (H + H.transpose()).eval();
  }
  return H;
}

// Largest step fraction in [0,1] keeping x + tau*d strictly inside the box,
// with a 0.99 fraction-to-boundary margin.
double boundary_fraction(const ObjectiveOracle& oracle, const Vec& x, const Vec& d) {
  if (!oracle.feasible_lower) return 1.0;
  double tau = 1.0;
  for (int i = 0; i < oracle.dimension; ++i) {
    if (d[i] < 0.0) {
      const double room = x[i] - (*oracle.feasible_lower)[i];
      tau = std::min(tau, 0.99 * room / -d[i]);
    }
  }
  return tau;
}

Vec interior_start(const ObjectiveOracle& oracle, const Vec& hint) {
  if (oracle.in_domain(hint)) return hint;
  Vec x = hint;
  for (int i = 0; i < oracle.dimension; ++i) {
    const double lo = (*oracle.feasible_lower)[i];
    if (!(x[i] > lo)) x[i] = lo + 0.5;
  }
  return x;
}

// Damped Newton for F(x) = grad g(x) + shift*x - target = 0.
Vec newton_shifted(const ObjectiveOracle& oracle, double shift, const Vec& target,
                   const Vec& start, double tol, int max_iter, const char* ctx) {
  Vec x = interior_start(oracle, start);
  Vec F = oracle.gradient(x) + shift * x - target;
  double res = F.norm();
  for (int it = 0; it < max_iter; ++it) {
    if (res <= tol) return x;
    Mat J = dense_hessian(oracle, x);
    J.diagonal().array() += shift;
    Vec d = J.ldlt().solve(-F);
    double tau = boundary_fraction(oracle, x, d);
    // backtrack on the residual norm
    for (int bt = 0; bt < 60; ++bt) {
      Vec xt = x + tau * d;
      if (oracle.in_domain(xt)) {
        Vec Ft = oracle.gradient(xt) + shift * xt - target;
        if (Ft.norm() < res || tau < 1e-14) {
          x = xt;
          F = Ft;
          res = F.norm();
          break;
        }
      }
      tau *= 0.5;
    }
  }
  if (res <= tol) return x;
  throw SolveError(std::string(ctx) + " inner Newton did not converge", res);
}

}  // namespace

Vec prox(const ObjectiveOracle& oracle, double rho, const Vec& y) {
  if (rho < 0.0) throw std::invalid_argument("prox: rho must be >= 0");
  if (rho == 0.0) return y;
  if (oracle.quadratic) {
    const auto& Q = *oracle.quadratic;
    Mat M = rho * Q.A;
    M.diagonal().array() += 1.0;
    return M.ldlt().solve(y - rho * Q.c);
  }
  // x + rho*grad g(x) = y  <=>  grad g(x) + (1/rho) x = y/rho
  const double tol = 1e-12 * (1.0 + y.norm()) / rho;
  return newton_shifted(oracle, 1.0 / rho, y / rho, y, tol, 100, "prox");
}

Vec tikhonov_minimizer(const ObjectiveOracle& oracle, const TikhonovKnobs& knobs) {
  if (!(knobs.epsilon > 0.0))
    throw std::invalid_argument("tikhonov_minimizer: epsilon must be > 0");
  if (oracle.quadratic) {
    const auto& Q = *oracle.quadratic;
    Mat M = Q.A;
    M.diagonal().array() += knobs.epsilon;
    return M.ldlt().solve(-Q.c);
  }
  Vec start = Vec::Zero(oracle.dimension);
  return newton_shifted(oracle, knobs.epsilon, Vec::Zero(oracle.dimension), start,
                        knobs.inner_tol, knobs.inner_max_iter, "tikhonov");
}

Vec min_norm_solution(const ObjectiveOracle& oracle) {
  if (oracle.known_min_norm_solution) return *oracle.known_min_norm_solution;
  // Vanishing-regularization ladder: the Tikhonov path converges to the
  // projection of 0 onto argmin g.
  Vec prev;
  for (double eps : {1e-2, 1e-4, 1e-6, 1e-8}) {
    Vec cur = tikhonov_minimizer(oracle, {eps, 1e-12, 200});
    if (prev.size() > 0 && (cur - prev).norm() < 1e-7) return cur;
    prev = cur;
  }
  if (oracle.quadratic) return prev;  // exact linear solves: ladder end is it
  throw std::runtime_error(oracle.name + ": unknown solution set");
}

// ---------------------------------------------------------------------------
// Built-in problems.

ObjectiveOracle quadratic2d() {
  ObjectiveOracle o;
  o.name = "quadratic2d";
  o.dimension = 2;
  QuadraticForm Q;
  Q.A = (Mat(2, 2) << 10, 10, 10, 10).finished();
  Q.c = Vec::Constant(2, -10.0);
  Q.c0 = 5.0;
  o.quadratic = Q;
  o.value = [](const Vec& x) {
    const double s = x[0] + x[1] - 1.0;
    return 5.0 * s * s;
  };
  o.gradient = [](const Vec& x) {
    const double s = x[0] + x[1] - 1.0;
    return Vec::Constant(2, 10.0 * s).eval();
  };
  o.hessian_vec = [Q](const Vec&, const Vec& v) { return (Q.A * v).eval(); };
  o.lipschitz_grad = 20.0;  // spectral norm of A
  o.known_min_value = 0.0;
  o.known_min_norm_solution = Vec::Constant(2, 0.5);
  return o;
}

ObjectiveOracle logbarrier2d() {
  ObjectiveOracle o;
  o.name = "logbarrier2d";
  o.dimension = 2;
  o.feasible_lower = Vec::Constant(2, -1.0);
  o.value = [](const Vec& x) {
    return x[0] + x[1] * x[1] - 2.0 * std::log(x[0] + 1.0) - 2.0 * std::log(x[1] + 1.0);
  };
  o.gradient = [](const Vec& x) {
    Vec g(2);
    g[0] = 1.0 - 2.0 / (x[0] + 1.0);
    g[1] = 2.0 * x[1] - 2.0 / (x[1] + 1.0);
    return g;
  };
  o.hessian_vec = [](const Vec& x, const Vec& v) {
    Vec r(2);
    const double d0 = x[0] + 1.0, d1 = x[1] + 1.0;
    r[0] = 2.0 / (d0 * d0) * v[0];
    r[1] = (2.0 + 2.0 / (d1 * d1)) * v[1];
    return r;
  };
  // The gradient is not globally Lipschitz near the barrier; this constant is
  // the Hessian bound on the compact box [-0.5, 3]^2 where the experiment runs.
  o.lipschitz_grad = 10.0;
  Vec xbar(2);
  xbar << 1.0, (std::sqrt(5.0) - 1.0) / 2.0;
  o.known_min_norm_solution = xbar;
  o.known_min_value = o.value(xbar);
  return o;
}

ObjectiveOracle make_l2reg_problem(std::uint64_t seed, int m, int n) {
  if (m < 1 || n < 1) throw std::invalid_argument("l2reg: m, n must be >= 1");
  Mat K(m, n);
  std::uint64_t idx = 0;
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j) K(i, j) = standard_normal(seed, idx++);
  Vec b(m);
  for (int i = 0; i < m; ++i) b[i] = standard_normal(seed, idx++);

  ObjectiveOracle o;
  o.name = "l2reg";
  o.dimension = n;
  QuadraticForm Q;
  Q.A = K.transpose() * K;
  Q.A.diagonal().array() += 2.0;
  Q.c = -K.transpose() * b;
  Q.c0 = 0.5 * b.squaredNorm();
  o.quadratic = Q;
  const Mat A = Q.A;
  const Vec c = Q.c;
  const double c0 = Q.c0;
  o.value = [A, c, c0](const Vec& x) { return 0.5 * x.dot(A * x) + c.dot(x) + c0; };
  o.gradient = [A, c](const Vec& x) { return (A * x + c).eval(); };
  o.hessian_vec = [A](const Vec&, const Vec& v) { return (A * v).eval(); };

  // ||K'K||_2 by power iteration (+2 for the ridge term)
  Vec v = Vec::Ones(n).normalized();
  const Mat KtK = K.transpose() * K;
  double lam = 0.0;
  for (int it = 0; it < 500; ++it) {
    Vec w = KtK * v;
    const double nl = w.norm();
    if (nl == 0.0) break;
    w /= nl;
    if (std::abs(nl - lam) <= 1e-12 * nl) {
      lam = nl;
      break;
    }
    lam = nl;
    v = w;
  }
  o.lipschitz_grad = lam + 2.0;

  // strongly convex: unique minimizer solves (K'K + 2I) x = K'b
  Vec xbar = A.ldlt().solve(-c);
  o.known_min_norm_solution = xbar;
  o.known_min_value = o.value(xbar);
  return o;
}

ObjectiveOracle zero_objective(int dim) {
  ObjectiveOracle o;
  o.name = "zero";
  o.dimension = dim;
  QuadraticForm Q;
  Q.A = Mat::Zero(dim, dim);
  Q.c = Vec::Zero(dim);
  o.quadratic = Q;
  o.value = [](const Vec&) { return 0.0; };
  o.gradient = [dim](const Vec&) { return Vec::Zero(dim).eval(); };
  o.hessian_vec = [dim](const Vec&, const Vec&) { return Vec::Zero(dim).eval(); };
  o.lipschitz_grad = 0.0;
  o.known_min_value = 0.0;
  o.known_min_norm_solution = Vec::Zero(dim);
  return o;
}

ObjectiveOracle make_problem(const std::string& name, std::uint64_t seed, int m, int n) {
  if (name == "quadratic2d") return quadratic2d();
  if (name == "logbarrier2d") return logbarrier2d();
  if (name == "l2reg") return make_l2reg_problem(seed, m, n);
  throw std::invalid_argument("unknown problem name: " + name);
}

}  // namespace tikflow
