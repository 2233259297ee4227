#pragma once

#include <optional>

#include "ppr/init_eval.hpp"
#include "ppr/mm.hpp"
#include "ppr/objectives.hpp"

namespace ppr {

/// Iterates of the splitting v = A x with scaled dual eta.
struct AdmmState {
  CVec x;
  CVec v;
  CVec eta;
  double rho = 8.0;
  int k = 0;
};

/// sign(A x - eta) entrywise, sign(0) = 1.
CVec update_v_phase(const CVec& ax, const CVec& eta);

/// Positive root of (2 + rho) m^2 - rho t m - 2 y = 0 (b = 0).
double update_v_magnitude_b0(double t, double y, double rho);

/// Among nonnegative roots of (2+rho) m^3 - rho t m^2 + (2b - 2y + rho b) m - rho b t,
/// the one minimizing (m^2 + b) - y log(m^2 + b) + rho/2 (m - t)^2.
double update_v_magnitude_bpos(double t, double y, double b, double rho);

/// The scalar Lagrangian term minimized by the magnitude update.
double magnitude_lagrangian(double m, double t, double y, double b, double rho);

/// Full v-update: phase of A x - eta times the per-entry magnitude.
CVec update_v(const CVec& ax, const CVec& eta, const RVec& y, const RVec& b, double rho);

struct AdmmInnerConfig {
  Index direct_threshold = 64;
  int cg_iters = 100;
  double cg_tol = 1e-10;
  int reg_iters = 50;
  double reg_tol = 1e-8;
};

/// Solves x-updates against one model, reusing the dense factorization of
/// A'A (or its diagonal) across calls.
class XUpdater {
 public:
  XUpdater(const ForwardModel& model, Field field, AdmmInnerConfig cfg = {});

  /// argmin_x ||A x - (v + eta)||^2 (model offset included in A x).
  CVec solve(const CVec& v, const CVec& eta) const;
  /// argmin_x rho/2 ||A x - v - eta||^2 + beta R(x) by nonlinear CG from x0.
  CVec solve_huber(const CVec& v, const CVec& eta, double rho, const HuberTV& reg, const CVec& x0,
                   bool* converged = nullptr) const;
  /// Same with an orthonormal l1 regularizer, by accelerated proximal gradient.
  CVec solve_l1(const CVec& v, const CVec& eta, double rho, const ProxL1& reg, const CVec& x0,
                bool* converged = nullptr) const;

  bool uses_diagonal() const { return diag_.has_value(); }
  bool uses_dense() const { return dense_; }

 private:
  QuadraticModel least_squares_model(const CVec& v, const CVec& eta, double rho, const CVec& x0) const;

  const ForwardModel& model_;
  Field field_;
  AdmmInnerConfig cfg_;
  std::optional<RVec> diag_;
  bool dense_ = false;
  CMat chol_l_;  // lower Cholesky factor of the (real-part) normal matrix
};

/// eta + (v - A x).
CVec update_dual(const CVec& eta, const CVec& v, const CVec& ax);

/// Residual balancing every 10th iteration.
double update_rho(double rho, double primal_res_norm, double dual_res_norm, int k);

struct AdmmOptions {
  double rho0 = 8.0;
  int n_iters = 100;
  bool adapt_rho = true;
  AdmmInnerConfig inner;
  std::optional<ProxL1> prox;  // takes precedence over problem.reg
  TraceOptions trace;
};

struct AdmmRun {
  RunState state;
  AdmmState final;
  std::vector<double> primal_residuals;  // ||A x_k - v_k||
  std::vector<double> dual_residuals;    // rho ||A'(v_k - v_{k-1})||
  std::vector<double> rhos;
};

/// ADMM for the Poisson model: v, then x, then eta each iteration, with
/// v0 = A x0 and eta0 = 0.
AdmmRun run_admm(const Problem& problem, const CVec& x0, const AdmmOptions& opts);

}  // namespace ppr
