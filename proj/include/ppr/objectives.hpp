#pragma once

#include <memory>
#include <optional>

#include "ppr/forward_model.hpp"

namespace ppr {

// ---------------------------------------------------------------------------
// Scalar kernels of the Poisson negative log-likelihood
//   psi(v; y, b) = (|v|^2 + b) - y log(|v|^2 + b),   0 log 0 := 0.

double psi(Complex v, double y, double b);
/// Ascent direction 2 v (1 - y / (|v|^2 + b)).
Complex psi_dot(Complex v, double y, double b);
/// Curvature of psi along |v|: 2 + 2 y (|v|^2 - b) / (|v|^2 + b)^2.
double psi_ddot(Complex v, double y, double b);

/// Expected |psi_dot|^2 under y ~ Poisson(|v|^2 + b): 4|v|^2 / (|v|^2 + b).
double fisher_marginal_poisson(Complex v, double b);
/// Same quantity for the Gaussian intensity cost: 16 |v|^2 (|v|^2 + b).
double fisher_marginal_gaussian(Complex v, double b);

// Huber function on the modulus of t.
double huber(Complex t, double alpha);
Complex huber_dot(Complex t, double alpha);
/// Huber's optimal quadratic curvature hdot(t)/t = min(alpha/|t|, 1); 1 at t = 0.
double huber_weight(Complex t, double alpha);

// ---------------------------------------------------------------------------

enum class NoiseModel { Poisson, Gaussian };

/// Separable data-fit cost sum_i marginal(v_i; y_i, b_i) with v = A x.
class Objective {
 public:
  Objective(ForwardModel model, RVec y);
  virtual ~Objective() = default;

  virtual NoiseModel noise() const = 0;
  virtual double marginal_cost(Complex v, double y, double b) const = 0;
  virtual Complex marginal_gradient(Complex v, double y, double b) const = 0;
  virtual double marginal_fisher(Complex v, double b) const = 0;

  const ForwardModel& model() const { return model_; }
  const RVec& y() const { return y_; }
  Index rows() const { return model_.rows(); }
  Index cols() const { return model_.cols(); }

  double cost(const CVec& x) const { return cost_at(model_.apply(x)); }
  /// Cost given the measurement-domain vector v = A x.
  double cost_at(const CVec& v) const;
  CVec marginal_gradients(const CVec& v) const;
  /// A' marginal_gradients(A x), real part for real fields.
  CVec gradient(const CVec& x, Field field) const { return gradient_at(model_.apply(x), field); }
  CVec gradient_at(const CVec& v, Field field) const;
  /// Per-measurement Fisher weights, the diagonal D1.
  RVec fisher_weights(const CVec& v) const;

 private:
  ForwardModel model_;
  RVec y_;
};

class PoissonObjective final : public Objective {
 public:
  using Objective::Objective;
  NoiseModel noise() const override { return NoiseModel::Poisson; }
  double marginal_cost(Complex v, double y, double b) const override { return psi(v, y, b); }
  Complex marginal_gradient(Complex v, double y, double b) const override { return psi_dot(v, y, b); }
  double marginal_fisher(Complex v, double b) const override { return fisher_marginal_poisson(v, b); }
};

/// g(x) = sum_i (y_i - b_i - |a_i' x|^2)^2.
class GaussianObjective final : public Objective {
 public:
  using Objective::Objective;
  NoiseModel noise() const override { return NoiseModel::Gaussian; }
  double marginal_cost(Complex v, double y, double b) const override;
  Complex marginal_gradient(Complex v, double y, double b) const override;
  double marginal_fisher(Complex v, double b) const override { return fisher_marginal_gaussian(v, b); }
};

std::shared_ptr<const Objective> make_objective(NoiseModel noise, ForwardModel model, RVec y);

// ---------------------------------------------------------------------------

/// Anisotropic first differences: a 1-D chain (K = N - 1) or stacked
/// horizontal then vertical differences of an H x W image with no rows across
/// the boundary (K = H(W-1) + (H-1)W).
class FiniteDifference {
 public:
  static FiniteDifference chain(Index n);
  static FiniteDifference image(Index height, Index width);

  Index rows() const;
  Index cols() const { return height_ * width_; }
  CVec apply(const CVec& x) const;
  CVec adjoint(const CVec& z) const;

 private:
  FiniteDifference(Index h, Index w) : height_(h), width_(w) {}
  Index height_;
  Index width_;
};

/// beta * sum_k h([T x]_k; alpha).
struct HuberTV {
  double beta = 32.0;
  double alpha = 0.1;
  FiniteDifference diff;

  HuberTV(double beta, double alpha, FiniteDifference diff);

  /// R(x) = 1' h.(T x; alpha), without beta.
  double roughness(const CVec& x) const;
  /// beta R(x).
  double cost(const CVec& x) const { return beta * roughness(x); }
  /// beta T' hdot.(T x; alpha).
  CVec gradient(const CVec& x) const;
  /// D2 diagonal min.(alpha / |T x|, 1).
  RVec weights(const CVec& x) const;
};

/// Regularized objective Psi(x) = f(x) + beta R(x) over a given field.
struct Problem {
  std::shared_ptr<const Objective> data;
  std::optional<HuberTV> reg;
  Field field = Field::Complex;

  const ForwardModel& model() const { return data->model(); }
  double cost(const CVec& x) const;
  CVec gradient(const CVec& x) const;
};

}  // namespace ppr
