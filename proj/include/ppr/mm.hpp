#pragma once

#include <memory>
#include <optional>

#include "ppr/init_eval.hpp"
#include "ppr/numerics.hpp"
#include "ppr/objectives.hpp"

namespace ppr {

enum class CurvatureKind { Max, Improved, OptimalNumeric };
std::string to_string(CurvatureKind k);

/// 2 + y / (4b). Throws DomainError when b = 0 and y > 0 (no quadratic
/// majorizer exists); y = 0 gives the exact curvature 2.
double curvature_max(double y, double b);

/// c(s) = psi_ddot(u(s)) with u(s) = (b + sqrt(b^2 + b|s|^2)) / |s|, c(0) = 2.
double curvature_improved(Complex s, double y, double b);

/// Default grid size for the numerically optimal curvature.
inline constexpr int kOptimalCurvaturePoints = 4001;

/// sup over r != s of 2 (phi(r) - phi(s) - phi'(s)(r - s)) / (r - s)^2, found on
/// a uniform grid over [-R, R], R = max(20, 4|s|, 8 sqrt(b)), a log-spaced tail
/// beyond it and a golden-section polish; clipped to [2, c_imp].
double curvature_optimal_numeric(Complex s, double y, double b, int points = kOptimalCurvaturePoints);

/// Diagonal W for all measurements at s = A x_k.
RVec curvature_weights(CurvatureKind kind, const CVec& s, const RVec& y, const RVec& b);

/// Quadratic model value + Re<x - center, grad> + 1/2 (x - center)' H (x - center).
struct QuadraticModel {
  PsdOperator hessian;
  CVec center;
  CVec grad;     // gradient at center
  double value = 0.0;
  Field field = Field::Complex;

  double operator()(const CVec& x) const;
  CVec gradient(const CVec& x) const;
};

/// Quadratic majorizer q(x; x_k) of the Poisson cost.
struct MajorizerContext {
  CVec anchor;   // x_k
  CVec s;        // A x_k (including any model offset)
  RVec weights;  // W
  QuadraticModel quad;
};

MajorizerContext build_majorizer(const Objective& obj, const CVec& xk, CurvatureKind kind, Field field);
double majorizer_value(const MajorizerContext& ctx, const CVec& x);

/// Orthonormal sparsifying transform (T'T = TT' = I), so the l1 prox is
/// T' soft(T z).
class OrthonormalTransform {
 public:
  virtual ~OrthonormalTransform() = default;
  virtual Index size() const = 0;
  virtual CVec apply(const CVec& x) const = 0;
  virtual CVec adjoint(const CVec& z) const = 0;
};

class IdentityTransform final : public OrthonormalTransform {
 public:
  explicit IdentityTransform(Index n) : n_(n) {}
  Index size() const override { return n_; }
  CVec apply(const CVec& x) const override { return x; }
  CVec adjoint(const CVec& z) const override { return z; }

 private:
  Index n_;
};

/// Full-depth orthonormal Haar wavelet; length must be a power of two.
class HaarTransform final : public OrthonormalTransform {
 public:
  explicit HaarTransform(Index n);
  Index size() const override { return n_; }
  CVec apply(const CVec& x) const override;
  CVec adjoint(const CVec& z) const override;

 private:
  Index n_;
};

/// beta ||T x||_1 with T orthonormal.
struct ProxL1 {
  double beta = 0.0;
  std::shared_ptr<const OrthonormalTransform> transform;

  double cost(const CVec& x) const;
  /// argmin_x 1/2 ||x - z||^2 + tau beta ||T x||_1.
  CVec prox(const CVec& z, double tau) const;
};

struct InnerConfig {
  Index direct_threshold = 64;  // dense solve for N <= this
  int cg_iters = 30;
  double cg_tol = 1e-9;
  int prox_iters = 50;
  double prox_tol = 1e-8;
  int ncg_iters = 30;
  double ncg_tol = 1e-9;
  int power_iters = 30;
  double lipschitz_safety = 1.05;
};

struct InnerResult {
  CVec x;
  bool converged = true;
  int iterations = 0;
  std::vector<double> objective;  // inner objective after each accepted step
};

/// Exact minimizer of the quadratic model (dense Cholesky or CG).
InnerResult minimize_quadratic(const QuadraticModel& q, const InnerConfig& cfg);
/// Accelerated proximal gradient with function-value restart on q + beta ||T x||_1.
InnerResult minimize_quadratic_l1(const QuadraticModel& q, const ProxL1& reg, const CVec& x0,
                                  const InnerConfig& cfg);
/// Nonlinear CG (Polak-Ribiere+) on q + beta 1'h.(T x; alpha), each step from
/// the Huber quadratic majorizer along the search direction.
InnerResult minimize_quadratic_huber(const QuadraticModel& q, const HuberTV& reg, const CVec& x0,
                                     const InnerConfig& cfg);

InnerResult mm_update_unregularized(const MajorizerContext& ctx, const InnerConfig& cfg);
InnerResult mm_update_prox_l1(const MajorizerContext& ctx, const ProxL1& reg, const InnerConfig& cfg);
InnerResult mm_update_huber(const MajorizerContext& ctx, const HuberTV& reg, const InnerConfig& cfg);

struct MmOptions {
  CurvatureKind curvature = CurvatureKind::Improved;
  int n_outer = 100;
  InnerConfig inner;
  std::optional<ProxL1> prox;  // prox-friendly l1 regularizer; takes precedence over problem.reg
  TraceOptions trace;
};

/// MM for the Poisson model. Unregularized, Huber-TV (problem.reg) or
/// prox-friendly l1 (opts.prox) branches.
RunState run_mm(const Problem& problem, const CVec& x0, const MmOptions& opts);

}  // namespace ppr
