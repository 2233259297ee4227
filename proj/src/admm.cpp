#include "ppr/admm.hpp"

#include <cmath>
#include <limits>

#include <Eigen/Cholesky>

#include "ppr/log.hpp"
#include "ppr/numerics.hpp"

namespace ppr {

CVec update_v_phase(const CVec& ax, const CVec& eta) {
  require_size(eta.size(), ax.size(), "dual variable");
  CVec out(ax.size());
  for (Index i = 0; i < ax.size(); ++i) {
    const Complex d = ax[i] - eta[i];
    const double a = std::abs(d);
    out[i] = a > 0.0 ? d / a : Complex(1.0, 0.0);
  }
  return out;
}

double update_v_magnitude_b0(double t, double y, double rho) {
  if (!(rho > 0.0)) throw std::invalid_argument("rho must be positive");
  const double disc = rho * rho * t * t + 8.0 * y * (2.0 + rho);
  return (rho * t + std::sqrt(disc)) / (2.0 * (2.0 + rho));
}

double magnitude_lagrangian(double m, double t, double y, double b, double rho) {
  const double u = m * m + b;
  const double data = y > 0.0 ? u - y * std::log(u) : u;
  return data + 0.5 * rho * (m - t) * (m - t);
}

double update_v_magnitude_bpos(double t, double y, double b, double rho) {
  if (!(rho > 0.0)) throw std::invalid_argument("rho must be positive");
  if (!(b > 0.0)) throw DomainError("update_v_magnitude_bpos needs b > 0");
  const auto roots = cubic_real_roots(2.0 + rho, -rho * t, 2.0 * b - 2.0 * y + rho * b, -rho * b * t);
  const double slack = 1e-12 * std::max(1.0, std::abs(t));
  double best = std::numeric_limits<double>::quiet_NaN();
  double best_val = std::numeric_limits<double>::infinity();
  for (double r : roots) {
    if (r < -slack) continue;
    const double m = std::max(r, 0.0);
    const double val = magnitude_lagrangian(m, t, y, b, rho);
    if (val < best_val) {
      best_val = val;
      best = m;
    }
  }
  if (std::isnan(best)) {
    throw std::logic_error("magnitude cubic has no nonnegative root (t=" + std::to_string(t) +
                           ", y=" + std::to_string(y) + ", b=" + std::to_string(b) + ")");
  }
  return best;
}

CVec update_v(const CVec& ax, const CVec& eta, const RVec& y, const RVec& b, double rho) {
  require_size(y.size(), ax.size(), "measurements");
  require_size(b.size(), ax.size(), "background");
  CVec v = update_v_phase(ax, eta);
  for (Index i = 0; i < ax.size(); ++i) {
    const double t = std::abs(ax[i] - eta[i]);
    const double m = b[i] > 0.0 ? update_v_magnitude_bpos(t, y[i], b[i], rho)
                                : update_v_magnitude_b0(t, y[i], rho);
    v[i] *= m;
  }
  return v;
}

// ---------------------------------------------------------------------------

namespace {

PsdOperator normal_operator(const ForwardModel& model, Field field, double weight) {
  const ForwardModel* m = &model;
  PsdOperator op{model.cols(), [m, weight](const CVec& u) -> CVec {
                   return weight * m->adjoint(m->apply_linear(u));
                 }};
  if (is_real_field(field)) op = real_part(std::move(op));
  return op;
}

}  // namespace

XUpdater::XUpdater(const ForwardModel& model, Field field, AdmmInnerConfig cfg)
    : model_(model), field_(field), cfg_(cfg) {
  diag_ = model.normal_diagonal();
  if (diag_) {
    if (!(diag_->minCoeff() > 0.0)) throw DegenerateError("A'A has a zero diagonal entry");
    return;
  }
  if (model.cols() <= cfg_.direct_threshold) {
    CMat h = densify(normal_operator(model, field, 1.0));
    h = 0.5 * (h + h.adjoint());
    Eigen::LLT<CMat> llt(h);
    const RVec d = llt.matrixLLT().diagonal().real();
    if (llt.info() != Eigen::Success || !(d.minCoeff() > 1e-12 * std::max(1.0, d.maxCoeff()))) {
      throw DegenerateError("normal matrix A'A is singular");
    }
    chol_l_ = llt.matrixL();
    dense_ = true;
  }
}

CVec XUpdater::solve(const CVec& v, const CVec& eta) const {
  CVec rhs = model_.adjoint(v + eta - model_.offset());
  restrict_gradient(rhs, field_);
  CVec x;
  if (diag_) {
    x = rhs.cwiseQuotient(diag_->cast<Complex>());
  } else if (dense_) {
    x = chol_l_.triangularView<Eigen::Lower>().solve(rhs);
    x = chol_l_.adjoint().triangularView<Eigen::Upper>().solve(x);
  } else {
    CgResult cg = cg_solve(normal_operator(model_, field_, 1.0), rhs, cfg_.cg_iters, cfg_.cg_tol);
    if (!cg.converged) log::debug("x-update CG stopped at residual " + std::to_string(cg.residual_norm));
    x = std::move(cg.x);
  }
  restrict_gradient(x, field_);
  return x;
}

QuadraticModel XUpdater::least_squares_model(const CVec& v, const CVec& eta, double rho,
                                             const CVec& x0) const {
  QuadraticModel q;
  q.field = field_;
  q.center = x0;
  const CVec res = model_.apply(x0) - v - eta;
  q.value = 0.5 * rho * res.squaredNorm();
  q.grad = rho * model_.adjoint(res);
  restrict_gradient(q.grad, field_);
  q.hessian = normal_operator(model_, field_, rho);
  return q;
}

CVec XUpdater::solve_huber(const CVec& v, const CVec& eta, double rho, const HuberTV& reg,
                           const CVec& x0, bool* converged) const {
  InnerConfig ic;
  ic.ncg_iters = cfg_.reg_iters;
  ic.ncg_tol = cfg_.reg_tol;
  InnerResult r = minimize_quadratic_huber(least_squares_model(v, eta, rho, x0), reg, x0, ic);
  if (converged) *converged = r.converged;
  return std::move(r.x);
}

CVec XUpdater::solve_l1(const CVec& v, const CVec& eta, double rho, const ProxL1& reg, const CVec& x0,
                        bool* converged) const {
  InnerConfig ic;
  ic.prox_iters = cfg_.reg_iters;
  ic.prox_tol = cfg_.reg_tol;
  InnerResult r = minimize_quadratic_l1(least_squares_model(v, eta, rho, x0), reg, x0, ic);
  if (converged) *converged = r.converged;
  return std::move(r.x);
}

CVec update_dual(const CVec& eta, const CVec& v, const CVec& ax) {
  require_size(v.size(), eta.size(), "dual update v");
  require_size(ax.size(), eta.size(), "dual update Ax");
  return eta + (v - ax);
}

double update_rho(double rho, double primal_res_norm, double dual_res_norm, int k) {
  if (k <= 0 || k % 10 != 0) return rho;
  if (primal_res_norm > 10.0 * dual_res_norm) return 2.0 * rho;
  if (dual_res_norm > 100.0 * rho * primal_res_norm) return 0.5 * rho;
  return rho;
}

// ---------------------------------------------------------------------------

AdmmRun run_admm(const Problem& problem, const CVec& x0, const AdmmOptions& opts) {
  const Objective& obj = *problem.data;
  if (obj.noise() != NoiseModel::Poisson) throw std::invalid_argument("ADMM is defined for the Poisson cost");
  if (!(opts.rho0 > 0.0)) throw std::invalid_argument("rho0 must be positive");
  if (opts.n_iters < 0) throw std::invalid_argument("n_iters must be >= 0");
  const ForwardModel& model = obj.model();

  AdmmRun run;
  AdmmState& s = run.final;
  s.x = x0;
  require_size(s.x.size(), obj.cols(), "run_admm x0");
  project_to_field(s.x, problem.field);
  s.rho = opts.rho0;
  CVec ax = model.apply(s.x);
  s.v = ax;
  s.eta = CVec::Zero(ax.size());
  if (opts.n_iters == 0) {
    run.state.x = s.x;
    return run;
  }

  auto total_cost = [&](const CVec& x, const CVec& ax_) {
    double c = obj.cost_at(ax_);
    if (opts.prox) {
      c += opts.prox->cost(x);
    } else if (problem.reg) {
      c += problem.reg->cost(x);
    }
    return c;
  };

  TraceRecorder rec(opts.trace);
  std::optional<XUpdater> xu;
  for (int k = 1; k <= opts.n_iters; ++k) {
    rec.start_update();
    double cost = 0.0;
    try {
      if (!xu) xu.emplace(model, problem.field, opts.inner);
      CVec v_new = update_v(ax, s.eta, obj.y(), model.background(), s.rho);
      bool ok = true;
      if (opts.prox) {
        s.x = xu->solve_l1(v_new, s.eta, s.rho, *opts.prox, s.x, &ok);
      } else if (problem.reg) {
        s.x = xu->solve_huber(v_new, s.eta, s.rho, *problem.reg, s.x, &ok);
      } else {
        s.x = xu->solve(v_new, s.eta);
      }
      if (!ok) ++run.state.inner_nonconverged;
      project_to_field(s.x, problem.field);
      ax = model.apply(s.x);
      s.eta = update_dual(s.eta, v_new, ax);
      const double r = (ax - v_new).norm();
      const double d = s.rho * model.adjoint(v_new - s.v).norm();
      s.v = std::move(v_new);
      run.primal_residuals.push_back(r);
      run.dual_residuals.push_back(d);
      run.rhos.push_back(s.rho);
      if (opts.adapt_rho) s.rho = update_rho(s.rho, r, d, k);
      s.k = k;
      cost = total_cost(s.x, ax);
      if (!std::isfinite(cost)) throw std::runtime_error("non-finite cost");
    } catch (const std::exception& e) {
      rec.stop_update();
      run.state.trace.status = RunStatus::NumericalFailure;
      run.state.trace.message = "iteration " + std::to_string(k) + ": " + e.what();
      log::warn("run_admm stopped: " + run.state.trace.message);
      break;
    }
    rec.stop_update();
    rec.record(run.state.trace, k, s.x, cost);
  }
  run.state.x = s.x;
  return run;
}

}  // namespace ppr
