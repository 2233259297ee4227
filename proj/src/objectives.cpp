#include "ppr/objectives.hpp"

#include <cmath>

namespace ppr {

double psi(Complex v, double y, double b) {
  const double t = std::norm(v) + b;
  if (y == 0.0) return t;
  if (t <= 0.0) throw DomainError("psi: |v|^2 + b = 0 with y > 0");
  return t - y * std::log(t);
}

Complex psi_dot(Complex v, double y, double b) {
  if (y == 0.0) return 2.0 * v;
  const double t = std::norm(v) + b;
  if (t <= 0.0) throw DomainError("psi_dot: |v|^2 + b = 0 with y > 0");
  return 2.0 * v * (1.0 - y / t);
}

double psi_ddot(Complex v, double y, double b) {
  if (y == 0.0) return 2.0;
  const double r2 = std::norm(v);
  const double t = r2 + b;
  if (t <= 0.0) throw DomainError("psi_ddot: |v|^2 + b = 0 with y > 0");
  return 2.0 + 2.0 * y * (r2 - b) / (t * t);
}

double fisher_marginal_poisson(Complex v, double b) {
  const double r2 = std::norm(v);
  if (r2 == 0.0) return 0.0;
  return 4.0 * r2 / (r2 + b);
}

double fisher_marginal_gaussian(Complex v, double b) {
  const double r2 = std::norm(v);
  return 16.0 * r2 * (r2 + b);
}

double huber(Complex t, double alpha) {
  const double a = std::abs(t);
  if (a < alpha) return 0.5 * a * a;
  return alpha * a - 0.5 * alpha * alpha;
}

Complex huber_dot(Complex t, double alpha) {
  const double a = std::abs(t);
  if (a < alpha) return t;
  return alpha * t / a;
}

double huber_weight(Complex t, double alpha) {
  const double a = std::abs(t);
  if (a <= alpha) return 1.0;
  return alpha / a;
}

// ---------------------------------------------------------------------------

Objective::Objective(ForwardModel model, RVec y) : model_(std::move(model)), y_(std::move(y)) {
  require_size(y_.size(), model_.rows(), "measurements");
  if (!y_.allFinite() || (y_.array() < 0.0).any()) {
    throw std::invalid_argument("measurements must be finite and nonnegative");
  }
}

double Objective::cost_at(const CVec& v) const {
  require_size(v.size(), rows(), "cost_at");
  const RVec& b = model_.background();
  double total = 0.0;
  for (Index i = 0; i < v.size(); ++i) total += marginal_cost(v[i], y_[i], b[i]);
  return total;
}

CVec Objective::marginal_gradients(const CVec& v) const {
  require_size(v.size(), rows(), "marginal_gradients");
  const RVec& b = model_.background();
  CVec g(v.size());
  for (Index i = 0; i < v.size(); ++i) g[i] = marginal_gradient(v[i], y_[i], b[i]);
  return g;
}

CVec Objective::gradient_at(const CVec& v, Field field) const {
  CVec g = model_.adjoint(marginal_gradients(v));
  restrict_gradient(g, field);
  return g;
}

RVec Objective::fisher_weights(const CVec& v) const {
  require_size(v.size(), rows(), "fisher_weights");
  const RVec& b = model_.background();
  RVec w(v.size());
  for (Index i = 0; i < v.size(); ++i) w[i] = marginal_fisher(v[i], b[i]);
  return w;
}

double GaussianObjective::marginal_cost(Complex v, double y, double b) const {
  const double r = y - b - std::norm(v);
  return r * r;
}

Complex GaussianObjective::marginal_gradient(Complex v, double y, double b) const {
  return 4.0 * (std::norm(v) - y + b) * v;
}

std::shared_ptr<const Objective> make_objective(NoiseModel noise, ForwardModel model, RVec y) {
  if (noise == NoiseModel::Poisson) return std::make_shared<PoissonObjective>(std::move(model), std::move(y));
  return std::make_shared<GaussianObjective>(std::move(model), std::move(y));
}

// ---------------------------------------------------------------------------

FiniteDifference FiniteDifference::chain(Index n) {
  if (n < 1) throw DimensionError("finite difference needs N >= 1");
  return FiniteDifference(1, n);
}

FiniteDifference FiniteDifference::image(Index height, Index width) {
  if (height < 1 || width < 1) throw DimensionError("finite difference needs a non-empty image");
  return FiniteDifference(height, width);
}

Index FiniteDifference::rows() const { return height_ * (width_ - 1) + (height_ - 1) * width_; }

CVec FiniteDifference::apply(const CVec& x) const {
  require_size(x.size(), cols(), "finite difference apply");
  CVec z(rows());
  Index k = 0;
  for (Index r = 0; r < height_; ++r)
    for (Index c = 0; c + 1 < width_; ++c) z[k++] = x[r * width_ + c + 1] - x[r * width_ + c];
  for (Index r = 0; r + 1 < height_; ++r)
    for (Index c = 0; c < width_; ++c) z[k++] = x[(r + 1) * width_ + c] - x[r * width_ + c];
  return z;
}

CVec FiniteDifference::adjoint(const CVec& z) const {
  require_size(z.size(), rows(), "finite difference adjoint");
  CVec x = CVec::Zero(cols());
  Index k = 0;
  for (Index r = 0; r < height_; ++r)
    for (Index c = 0; c + 1 < width_; ++c, ++k) {
      x[r * width_ + c + 1] += z[k];
      x[r * width_ + c] -= z[k];
    }
  for (Index r = 0; r + 1 < height_; ++r)
    for (Index c = 0; c < width_; ++c, ++k) {
      x[(r + 1) * width_ + c] += z[k];
      x[r * width_ + c] -= z[k];
    }
  return x;
}

HuberTV::HuberTV(double beta_, double alpha_, FiniteDifference diff_)
    : beta(beta_), alpha(alpha_), diff(diff_) {
  if (!(beta >= 0.0)) throw std::invalid_argument("Huber-TV beta must be >= 0");
  if (!(alpha > 0.0)) throw std::invalid_argument("Huber-TV alpha must be > 0");
}

double HuberTV::roughness(const CVec& x) const {
  const CVec t = diff.apply(x);
  double total = 0.0;
  for (Index k = 0; k < t.size(); ++k) total += huber(t[k], alpha);
  return total;
}

CVec HuberTV::gradient(const CVec& x) const {
  CVec t = diff.apply(x);
  for (Index k = 0; k < t.size(); ++k) t[k] = huber_dot(t[k], alpha);
  return beta * diff.adjoint(t);
}

RVec HuberTV::weights(const CVec& x) const {
  const CVec t = diff.apply(x);
  RVec w(t.size());
  for (Index k = 0; k < t.size(); ++k) w[k] = huber_weight(t[k], alpha);
  return w;
}

double Problem::cost(const CVec& x) const {
  double c = data->cost(x);
  if (reg) c += reg->cost(x);
  return c;
}

CVec Problem::gradient(const CVec& x) const {
  CVec g = data->gradient(x, field);
  if (reg) {
    CVec gr = reg->gradient(x);
    restrict_gradient(gr, field);
    g += gr;
  }
  return g;
}

}  // namespace ppr
