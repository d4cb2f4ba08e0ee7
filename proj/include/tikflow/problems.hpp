#pragma once

// Convex objective oracles and the Tikhonov / minimum-norm machinery built
// on top of them.  An oracle bundles value/gradient callbacks with optional
// structure (explicit quadratic form, Hessian products, known minimizer
// data) that downstream solvers exploit when present.

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>

namespace tikflow {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

struct DomainError : std::runtime_error {
  explicit DomainError(const std::string& what) : std::runtime_error(what) {}
};

// Thrown by inner iterative solvers (prox / Tikhonov Newton loops) when the
// residual target is not met within the iteration budget.
struct SolveError : std::runtime_error {
  double residual;
  SolveError(const std::string& what, double res)
      : std::runtime_error(what + " (last residual " + std::to_string(res) + ")"),
        residual(res) {}
};

// g(x) = 0.5 x'Ax + c'x + c0 with A symmetric PSD.
struct QuadraticForm {
  Mat A;
  Vec c;
  double c0 = 0.0;
};

struct ObjectiveOracle {
  int dimension = 0;
  std::function<double(const Vec&)> value;
  std::function<Vec(const Vec&)> gradient;
  // Optional Hessian-vector product; used by Newton inner solvers.
  std::function<Vec(const Vec&, const Vec&)> hessian_vec;

  std::optional<QuadraticForm> quadratic;
  std::optional<double> lipschitz_grad;
  std::optional<double> known_min_value;
  std::optional<Vec> known_min_norm_solution;
  // Open box domain: x_i > feasible_lower_i for every i (absent = all of R^n).
  std::optional<Vec> feasible_lower;

  std::string name;

  bool in_domain(const Vec& x) const;
  void require_domain(const Vec& x) const;  // throws DomainError
};

struct TikhonovKnobs {
  double epsilon;
  double inner_tol = 1e-10;
  int inner_max_iter = 100;
};

// Joint value + gradient evaluation with domain checking.
std::pair<double, Vec> evaluate(const ObjectiveOracle& oracle, const Vec& x);

// Resolvent: solves x + rho * grad g(x) = y.  Exact linear solve for
// quadratic oracles, damped Newton (tol 1e-12, max 100 iters) otherwise.
Vec prox(const ObjectiveOracle& oracle, double rho, const Vec& y);

// Unique minimizer of g(x) + (epsilon/2) ||x||^2.
Vec tikhonov_minimizer(const ObjectiveOracle& oracle, const TikhonovKnobs& knobs);

// Projection of the origin onto argmin g.
Vec min_norm_solution(const ObjectiveOracle& oracle);

// Built-in problems -------------------------------------------------------

// g(x) = 5 (x1 + x2 - 1)^2; argmin is the line x1 + x2 = 1.
ObjectiveOracle quadratic2d();

// g(x) = x1 + x2^2 - 2 ln(x1+1) - 2 ln(x2+1) on the open box x_i > -1.
ObjectiveOracle logbarrier2d();

// g(x) = 0.5 ||Kx - b||^2 + ||x||^2 with K (m x n), b (m) standard normal,
// drawn from a counter-based seeded generator (reproducible by seed).
ObjectiveOracle make_l2reg_problem(std::uint64_t seed, int m, int n);

// g == 0 in the given dimension (testing / formula-collapse cases).
ObjectiveOracle zero_objective(int dim);

// Problem lookup by name for the CLI: quadratic2d | logbarrier2d | l2reg.
ObjectiveOracle make_problem(const std::string& name, std::uint64_t seed, int m, int n);

// Deterministic counter-based standard normal stream (Box-Muller over a
// splitmix64-style bit mixer).  Value j of stream `seed` is pure in (seed, j).
double standard_normal(std::uint64_t seed, std::uint64_t index);

}  // namespace tikflow
