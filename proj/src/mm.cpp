#include "ppr/mm.hpp"

#include <cmath>
#include <limits>
#include <vector>

#include <Eigen/Cholesky>

#include "ppr/log.hpp"

namespace ppr {

std::string to_string(CurvatureKind k) {
  switch (k) {
    case CurvatureKind::Max: return "max";
    case CurvatureKind::Improved: return "improved";
    case CurvatureKind::OptimalNumeric: return "optimal";
  }
  return "improved";
}

double curvature_max(double y, double b) {
  if (y == 0.0) return 2.0;
  if (!(b > 0.0)) throw DomainError("curvature_max: b = 0 with y > 0 has unbounded curvature");
  return 2.0 + y / (4.0 * b);
}

double curvature_improved(Complex s, double y, double b) {
  if (y == 0.0) return 2.0;
  if (!(b > 0.0)) throw DomainError("curvature_improved: b = 0 with y > 0 has no quadratic majorizer");
  // Evaluate psi_ddot at u(s) through w = 1/u(s), which stays finite as s -> 0.
  const double a = std::abs(s);
  const double w = a / (b + std::sqrt(b * b + b * a * a));
  const double w2 = w * w;
  const double den = 1.0 + b * w2;
  return 2.0 + 2.0 * y * w2 * (1.0 - b * w2) / (den * den);
}

namespace {

// 2 (phi(r) - phi(s) - phi'(s)(r - s)) / (r - s)^2 without cancellation:
// it equals 2 - 2y [ (log1p(d) - d) / h^2 + 1 / (s^2 + b) ], d = h (r + s) / (s^2 + b).
double majorizer_ratio(double r, double s, double y, double b) {
  const double h = r - s;
  const double sb = s * s + b;
  const double d = h * (r + s) / sb;
  double term;
  if (std::abs(d) < 1e-2) {
    // (log1p(d) - d) / h^2 = ((r + s) / sb)^2 * sum_{k>=2} (-1)^{k+1} d^{k-2} / k
    double series = 0.0;
    double pw = 1.0;
    for (int k = 2; k <= 12; ++k) {
      series += ((k % 2 == 0) ? -1.0 : 1.0) * pw / k;
      pw *= d;
    }
    const double g = (r + s) / sb;
    term = g * g * series;
  } else {
    term = (std::log1p(d) - d) / (h * h);
  }
  return 2.0 - 2.0 * y * (term + 1.0 / sb);
}

}  // namespace

double curvature_optimal_numeric(Complex s, double y, double b, int points) {
  if (y == 0.0) return 2.0;
  if (!(b > 0.0)) throw DomainError("curvature_optimal_numeric: b = 0 with y > 0");
  if (points < 2) throw std::invalid_argument("optimal curvature grid needs >= 2 points");
  const double a = std::abs(s);
  const double range = std::max({20.0, 4.0 * a, 8.0 * std::sqrt(b)});
  const double h = 2.0 * range / (points - 1);

  // Uniform grid on [-R, R] plus a log-spaced tail out to 1e6 R on both sides:
  // for small |s| the ratio can peak well outside [-R, R].
  constexpr int kTail = 400;
  std::vector<double> rs;
  rs.reserve(static_cast<std::size_t>(points + 2 * kTail));
  for (int j = kTail; j >= 1; --j) rs.push_back(-range * std::pow(1e6, static_cast<double>(j) / kTail));
  for (int j = 0; j < points; ++j) rs.push_back(-range + h * j);
  for (int j = 1; j <= kTail; ++j) rs.push_back(range * std::pow(1e6, static_cast<double>(j) / kTail));

  auto f = [&](double r) {
    return std::abs(r - a) < 1e-8 ? -std::numeric_limits<double>::infinity() : majorizer_ratio(r, a, y, b);
  };
  double best = -std::numeric_limits<double>::infinity();
  std::size_t ib = 0;
  for (std::size_t i = 0; i < rs.size(); ++i) {
    const double v = f(rs[i]);
    if (v > best) {
      best = v;
      ib = i;
    }
  }
  // Golden-section polish between the neighbours of the best grid point.
  const double g = 0.5 * (std::sqrt(5.0) - 1.0);
  double lo = rs[ib > 0 ? ib - 1 : ib], hi = rs[ib + 1 < rs.size() ? ib + 1 : ib];
  double c = hi - g * (hi - lo), d = lo + g * (hi - lo);
  double fc = f(c), fd = f(d);
  for (int it = 0; it < 80 && hi - lo > 1e-12 * std::max(1.0, std::abs(rs[ib])); ++it) {
    if (fc > fd) {
      hi = d;
      d = c;
      fd = fc;
      c = hi - g * (hi - lo);
      fc = f(c);
    } else {
      lo = c;
      c = d;
      fc = fd;
      d = lo + g * (hi - lo);
      fd = f(d);
    }
  }
  // The ratio tends to 2 as |r| grows, and c_imp is itself a valid curvature.
  return std::min(std::max({2.0, best, fc, fd}), curvature_improved(s, y, b));
}

RVec curvature_weights(CurvatureKind kind, const CVec& s, const RVec& y, const RVec& b) {
  require_size(y.size(), s.size(), "curvature measurements");
  require_size(b.size(), s.size(), "curvature background");
  RVec w(s.size());
  for (Index i = 0; i < s.size(); ++i) {
    switch (kind) {
      case CurvatureKind::Max: w[i] = curvature_max(y[i], b[i]); break;
      case CurvatureKind::Improved: w[i] = curvature_improved(s[i], y[i], b[i]); break;
      case CurvatureKind::OptimalNumeric: w[i] = curvature_optimal_numeric(s[i], y[i], b[i]); break;
    }
  }
  return w;
}

// ---------------------------------------------------------------------------

double QuadraticModel::operator()(const CVec& x) const {
  const CVec d = x - center;
  return value + real_dot(d, grad) + 0.5 * real_dot(d, hessian.apply(d));
}

CVec QuadraticModel::gradient(const CVec& x) const {
  CVec g = grad + hessian.apply(x - center);
  restrict_gradient(g, field);
  return g;
}

MajorizerContext build_majorizer(const Objective& obj, const CVec& xk, CurvatureKind kind, Field field) {
  if (obj.noise() != NoiseModel::Poisson) {
    throw std::invalid_argument("the quadratic majorizer is defined for the Poisson cost");
  }
  const ForwardModel& model = obj.model();
  MajorizerContext ctx;
  ctx.anchor = xk;
  ctx.s = model.apply(xk);
  ctx.weights = curvature_weights(kind, ctx.s, obj.y(), model.background());
  ctx.quad.center = xk;
  ctx.quad.grad = obj.gradient_at(ctx.s, field);
  ctx.quad.value = obj.cost_at(ctx.s);
  ctx.quad.field = field;
  const ForwardModel* m = &model;
  const RVec w = ctx.weights;
  ctx.quad.hessian = PsdOperator{model.cols(), [m, w](const CVec& u) -> CVec {
                                   CVec v = m->apply_linear(u);
                                   v.array() *= w.array().cast<Complex>();
                                   return m->adjoint(v);
                                 }};
  if (is_real_field(field)) ctx.quad.hessian = real_part(std::move(ctx.quad.hessian));
  return ctx;
}

double majorizer_value(const MajorizerContext& ctx, const CVec& x) { return ctx.quad(x); }

// ---------------------------------------------------------------------------

HaarTransform::HaarTransform(Index n) : n_(n) {
  if (n < 1 || (n & (n - 1)) != 0) throw DimensionError("Haar transform length must be a power of two");
}

CVec HaarTransform::apply(const CVec& x) const {
  require_size(x.size(), n_, "Haar apply");
  CVec out = x;
  CVec tmp(n_);
  const double h = std::sqrt(0.5);
  for (Index m = n_; m > 1; m /= 2) {
    for (Index k = 0; k < m / 2; ++k) {
      tmp[k] = h * (out[2 * k] + out[2 * k + 1]);
      tmp[m / 2 + k] = h * (out[2 * k] - out[2 * k + 1]);
    }
    out.head(m) = tmp.head(m);
  }
  return out;
}

CVec HaarTransform::adjoint(const CVec& z) const {
  require_size(z.size(), n_, "Haar adjoint");
  CVec out = z;
  CVec tmp(n_);
  const double h = std::sqrt(0.5);
  for (Index m = 2; m <= n_; m *= 2) {
    for (Index k = 0; k < m / 2; ++k) {
      tmp[2 * k] = h * (out[k] + out[m / 2 + k]);
      tmp[2 * k + 1] = h * (out[k] - out[m / 2 + k]);
    }
    out.head(m) = tmp.head(m);
  }
  return out;
}

double ProxL1::cost(const CVec& x) const { return beta * transform->apply(x).cwiseAbs().sum(); }

CVec ProxL1::prox(const CVec& z, double tau) const {
  CVec c = transform->apply(z);
  for (Index k = 0; k < c.size(); ++k) c[k] = soft_threshold(c[k], tau * beta);
  return transform->adjoint(c);
}

// ---------------------------------------------------------------------------

InnerResult minimize_quadratic(const QuadraticModel& q, const InnerConfig& cfg) {
  InnerResult out;
  const Index n = q.hessian.dim;
  CVec rhs = -q.grad;
  restrict_gradient(rhs, q.field);
  CVec delta;
  if (n <= cfg.direct_threshold) {
    CMat h = densify(q.hessian);
    h = 0.5 * (h + h.adjoint());
    Eigen::LLT<CMat> llt(h);
    const RVec diag = llt.matrixLLT().diagonal().real();
    if (llt.info() != Eigen::Success || !(diag.minCoeff() > 1e-12 * std::max(1.0, diag.maxCoeff()))) {
      throw DegenerateError("majorizer Hessian A'WA is singular (rank-deficient model)");
    }
    delta = llt.solve(rhs);
    out.iterations = 1;
  } else {
    CgResult cg = cg_solve(q.hessian, rhs, cfg.cg_iters, cfg.cg_tol);
    delta = std::move(cg.x);
    out.converged = cg.converged;
    out.iterations = cg.iterations;
  }
  restrict_gradient(delta, q.field);
  out.x = q.center + delta;
  out.objective.push_back(q(out.x));
  return out;
}

InnerResult minimize_quadratic_l1(const QuadraticModel& q, const ProxL1& reg, const CVec& x0,
                                  const InnerConfig& cfg) {
  InnerResult out;
  auto objective = [&](const CVec& x) { return q(x) + reg.cost(x); };
  auto pg_step = [&](const CVec& from, double lip) {
    CVec z = from - q.gradient(from) / lip;
    CVec p = reg.prox(z, 1.0 / lip);
    restrict_gradient(p, q.field);
    return p;
  };

  double lip = cfg.lipschitz_safety * power_method(q.hessian, cfg.power_iters, 7, is_real_field(q.field)).value;
  if (!(lip > 0.0)) lip = 1.0;

  CVec x = x0;
  CVec z = x0;
  double t = 1.0;
  double fx = objective(x);
  out.converged = false;
  for (int it = 0; it < cfg.prox_iters; ++it) {
    CVec cand = pg_step(z, lip);
    double fc = objective(cand);
    if (fc > fx) {
      // Function-value restart: drop momentum and take a plain step from x,
      // growing the Lipschitz estimate until it decreases the objective.
      t = 1.0;
      z = x;
      cand = pg_step(x, lip);
      fc = objective(cand);
      for (int grow = 0; fc > fx && grow < 30; ++grow) {
        lip *= 2.0;
        cand = pg_step(x, lip);
        fc = objective(cand);
      }
      if (fc > fx) break;
    }
    const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    const CVec step = cand - x;
    z = cand + ((t - 1.0) / t_next) * step;
    x = std::move(cand);
    fx = fc;
    t = t_next;
    out.objective.push_back(fx);
    out.iterations = it + 1;
    if (step.norm() <= cfg.prox_tol * std::max(1.0, x.norm())) {
      out.converged = true;
      break;
    }
  }
  out.x = std::move(x);
  return out;
}

InnerResult minimize_quadratic_huber(const QuadraticModel& q, const HuberTV& reg, const CVec& x0,
                                     const InnerConfig& cfg) {
  InnerResult out;
  auto gradient = [&](const CVec& x) {
    CVec g = q.gradient(x);
    if (reg.beta != 0.0) {
      CVec gr = reg.gradient(x);
      restrict_gradient(gr, q.field);
      g += gr;
    }
    return g;
  };
  auto objective = [&](const CVec& x) { return q(x) + reg.cost(x); };

  CVec x = x0;
  CVec g = gradient(x);
  const double g0 = g.norm();
  CVec p = -g;
  out.converged = false;
  for (int it = 0; it < cfg.ncg_iters; ++it) {
    const double gn = g.norm();
    if (gn == 0.0 || gn <= cfg.ncg_tol * std::max(1.0, g0)) {
      out.converged = true;
      break;
    }
    const CVec hp = q.hessian.apply(p);
    double denom = real_dot(p, hp);
    if (reg.beta != 0.0) {
      const CVec tp = reg.diff.apply(p);
      denom += reg.beta * tp.cwiseAbs2().dot(reg.weights(x));
    }
    if (!(denom > 0.0)) break;
    const double gamma = -real_dot(g, p) / denom;
    x += gamma * p;
    const CVec g_new = gradient(x);
    const double pr = std::max(0.0, real_dot(g_new, g_new - g) / (gn * gn));
    p = -g_new + pr * p;
    if (real_dot(p, g_new) >= 0.0) p = -g_new;
    g = g_new;
    out.iterations = it + 1;
    out.objective.push_back(objective(x));
  }
  if (!out.converged && g.norm() <= cfg.ncg_tol * std::max(1.0, g0)) out.converged = true;
  out.x = std::move(x);
  return out;
}

InnerResult mm_update_unregularized(const MajorizerContext& ctx, const InnerConfig& cfg) {
  return minimize_quadratic(ctx.quad, cfg);
}

InnerResult mm_update_prox_l1(const MajorizerContext& ctx, const ProxL1& reg, const InnerConfig& cfg) {
  return minimize_quadratic_l1(ctx.quad, reg, ctx.anchor, cfg);
}

InnerResult mm_update_huber(const MajorizerContext& ctx, const HuberTV& reg, const InnerConfig& cfg) {
  return minimize_quadratic_huber(ctx.quad, reg, ctx.anchor, cfg);
}

// ---------------------------------------------------------------------------

RunState run_mm(const Problem& problem, const CVec& x0, const MmOptions& opts) {
  const Objective& obj = *problem.data;
  if (opts.n_outer < 0) throw std::invalid_argument("n_outer must be >= 0");
  RunState st;
  st.x = x0;
  require_size(st.x.size(), obj.cols(), "run_mm x0");
  project_to_field(st.x, problem.field);
  if (opts.n_outer == 0) return st;

  auto total_cost = [&](const CVec& x) {
    double c = obj.cost(x);
    if (opts.prox) {
      c += opts.prox->cost(x);
    } else if (problem.reg) {
      c += problem.reg->cost(x);
    }
    return c;
  };

  TraceRecorder rec(opts.trace);
  for (int k = 1; k <= opts.n_outer; ++k) {
    rec.start_update();
    double cost = 0.0;
    try {
      const MajorizerContext ctx = build_majorizer(obj, st.x, opts.curvature, problem.field);
      InnerResult inner;
      if (opts.prox) {
        inner = mm_update_prox_l1(ctx, *opts.prox, opts.inner);
      } else if (problem.reg) {
        inner = mm_update_huber(ctx, *problem.reg, opts.inner);
      } else {
        inner = mm_update_unregularized(ctx, opts.inner);
      }
      if (!inner.converged) ++st.inner_nonconverged;
      st.x = std::move(inner.x);
      project_to_field(st.x, problem.field);
      cost = total_cost(st.x);
    } catch (const std::exception& e) {
      rec.stop_update();
      st.trace.status = RunStatus::NumericalFailure;
      st.trace.message = "outer iteration " + std::to_string(k) + ": " + e.what();
      log::warn("run_mm stopped: " + st.trace.message);
      break;
    }
    rec.stop_update();
    rec.record(st.trace, k, st.x, cost);
  }
  return st;
}

}  // namespace ppr
