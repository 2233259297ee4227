#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "ppr/types.hpp"

namespace ppr {

/// Hermitian positive semidefinite operator known only through its action.
struct PsdOperator {
  Index dim = 0;
  std::function<CVec(const CVec&)> apply;
};

/// u -> Re{H u} for real u; the operator behind real-field normal equations.
PsdOperator real_part(PsdOperator op);

/// Dense matrix of an operator (N applications).
CMat densify(const PsdOperator& op);

struct EigenPair {
  double value = 0.0;
  CVec vector;
  std::vector<double> rayleigh;  // Rayleigh quotient per iteration
};

/// Leading eigenpair by power iteration from a seeded Gaussian start. With
/// real_start the start vector is real, so real operators stay real.
EigenPair power_method(const PsdOperator& op, int iters, std::uint64_t seed, bool real_start = false);
EigenPair power_method(const PsdOperator& op, int iters, CVec start);

struct CgResult {
  CVec x;
  int iterations = 0;
  double residual_norm = 0.0;   // ||rhs - H x||
  bool converged = false;       // residual_norm <= tol ||rhs||
  std::vector<double> residuals;
};

/// Conjugate gradient on H x = rhs.
CgResult cg_solve(const PsdOperator& op, const CVec& rhs, int max_iters, double tol,
                  const CVec* x0 = nullptr);

/// Real roots of c2 x^2 + c1 x + c0 in ascending order (degree drops when
/// leading coefficients vanish).
std::vector<double> quadratic_real_roots(double c2, double c1, double c0);

/// Real roots of c3 x^3 + c2 x^2 + c1 x + c0, ascending, repeated roots listed
/// with multiplicity. Trigonometric form for three real roots, Cardano for
/// one, then one Newton polish per root.
std::vector<double> cubic_real_roots(double c3, double c2, double c1, double c0);

/// sign(z) max(|z| - tau, 0).
Complex soft_threshold(Complex z, double tau);

/// Cost with gradient written into `grad` (real inner product on C^N).
using CostGradFn = std::function<double(const CVec& x, CVec& grad)>;

struct LbfgsOptions {
  int memory = 10;
  int max_iters = 100;
  double wolfe_c1 = 1e-4;
  double wolfe_c2 = 0.9;
  int max_line_search = 40;
  double grad_tol = 0.0;  // stop when ||g|| <= grad_tol
};

struct LbfgsResult {
  CVec x;
  double cost = 0.0;
  int iterations = 0;
  std::vector<double> costs;  // after each iteration
  bool converged = false;
  bool line_search_failed = false;
};

/// Limited-memory BFGS, two-loop recursion with a strong-Wolfe line search.
/// `on_iter(k, x, cost)` runs after every accepted step.
LbfgsResult lbfgs_minimize(const CostGradFn& fn, CVec x0, const LbfgsOptions& opts,
                           const std::function<void(int, const CVec&, double)>& on_iter = {});

/// Central differences along each real axis (and each imaginary axis when
/// complex), assembled as the gradient for Re<g, d>.
CVec finite_diff_grad(const std::function<double(const CVec&)>& cost, const CVec& x, double eps,
                      bool complex_field);

}  // namespace ppr
