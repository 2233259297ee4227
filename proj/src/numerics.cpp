#include "ppr/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <numbers>

#include "ppr/forward_model.hpp"

namespace ppr {

PsdOperator real_part(PsdOperator op) {
  auto inner = std::move(op.apply);
  return {op.dim, [inner](const CVec& u) -> CVec { return inner(u).real().cast<Complex>(); }};
}

CMat densify(const PsdOperator& op) {
  CMat h(op.dim, op.dim);
  CVec e = CVec::Zero(op.dim);
  for (Index j = 0; j < op.dim; ++j) {
    e[j] = 1.0;
    h.col(j) = op.apply(e);
    e[j] = 0.0;
  }
  return h;
}

EigenPair power_method(const PsdOperator& op, int iters, std::uint64_t seed, bool real_start) {
  Rng rng(seed);
  CVec start(op.dim);
  for (Index i = 0; i < op.dim; ++i) {
    const double re = standard_normal(rng);
    const double im = real_start ? 0.0 : standard_normal(rng);
    start[i] = Complex(re, im);
  }
  return power_method(op, iters, std::move(start));
}

EigenPair power_method(const PsdOperator& op, int iters, CVec start) {
  require_size(start.size(), op.dim, "power_method start");
  EigenPair out;
  double n = start.norm();
  if (n == 0.0) throw DegenerateError("power_method: zero start vector");
  CVec v = start / n;
  out.value = real_dot(v, op.apply(v));
  for (int k = 0; k < iters; ++k) {
    CVec hv = op.apply(v);
    n = hv.norm();
    if (n == 0.0) break;  // v lies in the null space; keep it
    v = hv / n;
    out.value = real_dot(v, op.apply(v));
    out.rayleigh.push_back(out.value);
  }
  out.vector = std::move(v);
  return out;
}

CgResult cg_solve(const PsdOperator& op, const CVec& rhs, int max_iters, double tol, const CVec* x0) {
  require_size(rhs.size(), op.dim, "cg_solve rhs");
  CgResult out;
  out.x = x0 ? *x0 : CVec::Zero(op.dim);
  CVec r = x0 ? CVec(rhs - op.apply(out.x)) : rhs;
  const double target = tol * rhs.norm();
  CVec p = r;
  double rr = r.squaredNorm();
  out.residual_norm = std::sqrt(rr);
  out.residuals.push_back(out.residual_norm);
  if (out.residual_norm <= target) {
    out.converged = true;
    return out;
  }
  for (int k = 0; k < max_iters; ++k) {
    const CVec hp = op.apply(p);
    const double php = real_dot(p, hp);
    if (php <= 0.0) break;  // operator is singular along p
    const double step = rr / php;
    out.x += step * p;
    r -= step * hp;
    const double rr_new = r.squaredNorm();
    out.iterations = k + 1;
    out.residual_norm = std::sqrt(rr_new);
    out.residuals.push_back(out.residual_norm);
    if (out.residual_norm <= target) {
      out.converged = true;
      break;
    }
    p = r + (rr_new / rr) * p;
    rr = rr_new;
  }
  return out;
}

std::vector<double> quadratic_real_roots(double c2, double c1, double c0) {
  if (c2 == 0.0) {
    if (c1 == 0.0) {
      if (c0 == 0.0) throw DegenerateError("polynomial is identically zero");
      return {};
    }
    return {-c0 / c1};
  }
  const double disc = c1 * c1 - 4.0 * c2 * c0;
  if (disc < 0.0) return {};
  const double q = -0.5 * (c1 + std::copysign(std::sqrt(disc), c1));
  std::vector<double> roots;
  if (q == 0.0) {
    roots = {0.0, 0.0};  // c1 = c0 = 0
  } else {
    roots = {q / c2, c0 / q};
  }
  std::sort(roots.begin(), roots.end());
  return roots;
}

std::vector<double> cubic_real_roots(double c3, double c2, double c1, double c0) {
  if (c3 == 0.0) return quadratic_real_roots(c2, c1, c0);
  const double a = c2 / c3, b = c1 / c3, c = c0 / c3;
  const double shift = a / 3.0;
  const double p = b - a * a / 3.0;
  const double q = 2.0 * a * a * a / 27.0 - a * b / 3.0 + c;

  std::vector<double> roots;
  if (p == 0.0 && q == 0.0) {
    roots = {-shift, -shift, -shift};
  } else {
    const double disc = 0.25 * q * q + p * p * p / 27.0;
    if (disc > 0.0) {
      const double s = 0.5 * q + std::copysign(std::sqrt(disc), q);
      const double u = -std::cbrt(s);
      const double t = (u == 0.0) ? 0.0 : u - p / (3.0 * u);
      roots = {t - shift};
    } else {
      const double m = 2.0 * std::sqrt(-p / 3.0);
      const double arg = std::clamp(3.0 * q / (p * m), -1.0, 1.0);
      const double theta = std::acos(arg) / 3.0;
      for (int k = 0; k < 3; ++k) {
        roots.push_back(m * std::cos(theta - 2.0 * std::numbers::pi * k / 3.0) - shift);
      }
    }
  }
  // One Newton polish on the monic polynomial.
  for (double& x : roots) {
    const double f = ((x + a) * x + b) * x + c;
    const double df = (3.0 * x + 2.0 * a) * x + b;
    if (df != 0.0) {
      const double xn = x - f / df;
      const double fn = ((xn + a) * xn + b) * xn + c;
      if (std::isfinite(xn) && std::abs(fn) <= std::abs(f)) x = xn;
    }
  }
  std::sort(roots.begin(), roots.end());
  return roots;
}

Complex soft_threshold(Complex z, double tau) {
  const double a = std::abs(z);
  if (a <= tau) return Complex(0.0, 0.0);
  return z * ((a - tau) / a);
}

// ---------------------------------------------------------------------------
// LBFGS

namespace {

struct LinePoint {
  double step, f, d;
  CVec x, g;
};

// Strong Wolfe search along p (Nocedal & Wright, Alg. 3.5/3.6).
bool wolfe_search(const CostGradFn& fn, const CVec& x, double f0, double d0, const CVec& p,
                  double step0, const LbfgsOptions& o, LinePoint& out) {
  auto eval = [&](double s) {
    LinePoint lp;
    lp.step = s;
    lp.x = x + s * p;
    lp.g.resize(x.size());
    lp.f = fn(lp.x, lp.g);
    lp.d = real_dot(lp.g, p);
    return lp;
  };
  auto armijo = [&](const LinePoint& lp) { return lp.f <= f0 + o.wolfe_c1 * lp.step * d0; };
  auto curvature = [&](const LinePoint& lp) { return std::abs(lp.d) <= -o.wolfe_c2 * d0; };

  LinePoint best;
  best.f = std::numeric_limits<double>::infinity();
  auto keep_best = [&](const LinePoint& lp) {
    if (std::isfinite(lp.f) && armijo(lp) && lp.f < best.f) best = lp;
  };

  LinePoint lo{0.0, f0, d0, x, CVec()};
  int evals = 0;
  double s = step0;
  auto zoom = [&](LinePoint lo_, LinePoint hi_) -> bool {
    while (evals < o.max_line_search) {
      double s_new;
      // Cubic interpolation when both ends carry derivatives, safeguarded.
      const double d1 = lo_.d + hi_.d - 3.0 * (lo_.f - hi_.f) / (lo_.step - hi_.step);
      const double rad = d1 * d1 - lo_.d * hi_.d;
      const double lo_s = std::min(lo_.step, hi_.step), hi_s = std::max(lo_.step, hi_.step);
      if (rad >= 0.0 && std::isfinite(hi_.d)) {
        const double d2 = std::copysign(std::sqrt(rad), hi_.step - lo_.step);
        s_new = hi_.step - (hi_.step - lo_.step) * (hi_.d + d2 - d1) / (hi_.d - lo_.d + 2.0 * d2);
      } else {
        s_new = 0.5 * (lo_.step + hi_.step);
      }
      const double margin = 0.1 * (hi_s - lo_s);
      if (!std::isfinite(s_new) || s_new < lo_s + margin || s_new > hi_s - margin) {
        s_new = 0.5 * (lo_.step + hi_.step);
      }
      LinePoint cur = eval(s_new);
      ++evals;
      keep_best(cur);
      if (!std::isfinite(cur.f) || !armijo(cur) || cur.f >= lo_.f) {
        hi_ = cur;
      } else {
        if (curvature(cur)) {
          out = cur;
          return true;
        }
        if (cur.d * (hi_.step - lo_.step) >= 0.0) hi_ = lo_;
        lo_ = cur;
      }
      if (std::abs(hi_.step - lo_.step) < 1e-16 * std::max(1.0, lo_.step)) break;
    }
    return false;
  };

  LinePoint prev = lo;
  for (int i = 0; evals < o.max_line_search; ++i) {
    LinePoint cur = eval(s);
    ++evals;
    keep_best(cur);
    if (!std::isfinite(cur.f) || !armijo(cur) || (i > 0 && cur.f >= prev.f)) {
      if (zoom(prev, cur)) return true;
      break;
    }
    if (curvature(cur)) {
      out = cur;
      return true;
    }
    if (cur.d >= 0.0) {
      if (zoom(cur, prev)) return true;
      break;
    }
    prev = cur;
    s *= 2.0;
  }
  if (std::isfinite(best.f)) {
    out = best;
    return true;
  }
  return false;
}

}  // namespace

LbfgsResult lbfgs_minimize(const CostGradFn& fn, CVec x0, const LbfgsOptions& opts,
                           const std::function<void(int, const CVec&, double)>& on_iter) {
  LbfgsResult res;
  res.x = std::move(x0);
  CVec g(res.x.size());
  res.cost = fn(res.x, g);
  std::deque<std::pair<CVec, CVec>> pairs;  // (s, y)

  for (int k = 0; k < opts.max_iters; ++k) {
    const double gnorm = g.norm();
    if (gnorm == 0.0 || gnorm <= opts.grad_tol) {
      res.converged = true;
      break;
    }
    // Two-loop recursion.
    CVec q = g;
    std::vector<double> alphas(pairs.size());
    for (std::size_t j = pairs.size(); j-- > 0;) {
      const auto& [s, yv] = pairs[j];
      const double rho = 1.0 / real_dot(yv, s);
      alphas[j] = rho * real_dot(s, q);
      q -= alphas[j] * yv;
    }
    if (!pairs.empty()) {
      const auto& [s, yv] = pairs.back();
      q *= real_dot(s, yv) / yv.squaredNorm();
    }
    for (std::size_t j = 0; j < pairs.size(); ++j) {
      const auto& [s, yv] = pairs[j];
      const double rho = 1.0 / real_dot(yv, s);
      const double beta = rho * real_dot(yv, q);
      q += (alphas[j] - beta) * s;
    }
    CVec p = -q;
    double d0 = real_dot(g, p);
    if (!(d0 < 0.0)) {  // lost descent; fall back to steepest descent
      pairs.clear();
      p = -g;
      d0 = -gnorm * gnorm;
    }
    const double step0 = pairs.empty() ? std::min(1.0, 1.0 / gnorm) : 1.0;
    LinePoint lp;
    if (!wolfe_search(fn, res.x, res.cost, d0, p, step0, opts, lp)) {
      res.line_search_failed = true;
      break;
    }
    CVec s = lp.x - res.x;
    CVec yv = lp.g - g;
    const double sy = real_dot(s, yv);
    if (sy > 1e-12 * s.norm() * yv.norm()) {
      pairs.emplace_back(std::move(s), std::move(yv));
      if (static_cast<int>(pairs.size()) > opts.memory) pairs.pop_front();
    }
    res.x = std::move(lp.x);
    g = std::move(lp.g);
    res.cost = lp.f;
    res.iterations = k + 1;
    res.costs.push_back(res.cost);
    if (on_iter) on_iter(k + 1, res.x, res.cost);
  }
  return res;
}

CVec finite_diff_grad(const std::function<double(const CVec&)>& cost, const CVec& x, double eps,
                      bool complex_field) {
  CVec g = CVec::Zero(x.size());
  CVec xp = x;
  for (Index j = 0; j < x.size(); ++j) {
    const Complex orig = xp[j];
    xp[j] = orig + eps;
    const double fp = cost(xp);
    xp[j] = orig - eps;
    const double fm = cost(xp);
    double im = 0.0;
    if (complex_field) {
      xp[j] = orig + Complex(0.0, eps);
      const double gp = cost(xp);
      xp[j] = orig - Complex(0.0, eps);
      const double gm = cost(xp);
      im = (gp - gm) / (2.0 * eps);
    }
    xp[j] = orig;
    g[j] = Complex((fp - fm) / (2.0 * eps), im);
  }
  return g;
}

}  // namespace ppr
