#include "ppr/wf.hpp"

#include <cmath>
#include <limits>

#include "ppr/log.hpp"
#include "ppr/numerics.hpp"

namespace ppr {

std::string to_string(StepKind k) {
  switch (k) {
    case StepKind::FisherPoisson: return "fisher";
    case StepKind::FisherGaussian: return "fisher_gaussian";
    case StepKind::Backtracking: return "backtracking";
    case StepKind::ExactGaussianLineSearch: return "exact_gaussian";
  }
  return "fisher";
}

void StepRule::validate() const {
  const auto& b = backtracking;
  if (!(b.shrink > 0.0 && b.shrink < 1.0)) throw std::invalid_argument("backtracking shrink must be in (0,1)");
  if (!(b.sigma > 0.0 && b.sigma < 1.0)) throw std::invalid_argument("backtracking sigma must be in (0,1)");
  if (!(b.mu0 > 0.0)) throw std::invalid_argument("backtracking mu0 must be positive");
  if (b.max_trials < 1) throw std::invalid_argument("backtracking needs at least one trial");
}

double step_fisher_at(const Objective& obj, const CVec& v, const CVec& d, const CVec& grad) {
  const double gg = grad.squaredNorm();
  if (gg == 0.0) throw DegenerateError("Fisher step: zero gradient");
  const RVec w = obj.fisher_weights(v);
  const double denom = d.cwiseAbs2().dot(w);
  if (!(denom > 0.0)) throw DegenerateError("Fisher step: zero curvature (A x = 0 on the support of A grad)");
  return gg / denom;
}

double step_fisher(const Objective& obj, const CVec& x, const CVec& grad) {
  return step_fisher_at(obj, obj.model().apply(x), obj.model().apply_linear(grad), grad);
}

double step_fisher_reg(const Problem& problem, const CVec& x, const CVec& grad) {
  const Objective& obj = *problem.data;
  const CVec v = obj.model().apply(x);
  const CVec d = obj.model().apply_linear(grad);
  const double gg = grad.squaredNorm();
  if (gg == 0.0) throw DegenerateError("Fisher step: zero gradient");
  double denom = d.cwiseAbs2().dot(obj.fisher_weights(v));
  if (problem.reg) {
    const CVec tg = problem.reg->diff.apply(grad);
    denom += problem.reg->beta * tg.cwiseAbs2().dot(problem.reg->weights(x));
  }
  if (!(denom > 0.0)) throw DegenerateError("Fisher step: zero curvature");
  return gg / denom;
}

BacktrackingStep step_backtracking(const std::function<double(const CVec&)>& cost, const CVec& x,
                                   double cost_x, const CVec& grad, const BacktrackingParams& p,
                                   Field field) {
  const double gg = grad.squaredNorm();
  if (gg == 0.0) throw DegenerateError("backtracking: zero gradient");
  BacktrackingStep out;
  double mu = p.mu0;
  for (int j = 0; j < p.max_trials; ++j) {
    CVec trial = x - mu * grad;
    project_to_field(trial, field);
    double c = std::numeric_limits<double>::infinity();
    try {
      c = cost(trial);
    } catch (const DomainError&) {
      // outside the domain counts as a rejected trial
    }
    out.trials = j + 1;
    out.mu = mu;
    out.cost = c;
    if (c <= cost_x - p.sigma * mu * gg) return out;
    if (j + 1 < p.max_trials) mu *= p.shrink;
  }
  out.exhausted = true;
  return out;
}

double step_exact_gaussian(const GaussianObjective& obj, const CVec& x, const CVec& grad) {
  if (grad.squaredNorm() == 0.0) throw DegenerateError("exact Gaussian step: zero gradient");
  const CVec v = obj.model().apply(x);
  const CVec d = obj.model().apply_linear(grad);
  const RVec& y = obj.y();
  const RVec& b = obj.model().background();
  // |v - mu d|^2 - (y - b) = e + q mu + r mu^2
  double k[5] = {0, 0, 0, 0, 0};
  for (Index i = 0; i < v.size(); ++i) {
    const double e = std::norm(v[i]) - (y[i] - b[i]);
    const double q = -2.0 * (std::conj(v[i]) * d[i]).real();
    const double r = std::norm(d[i]);
    k[0] += e * e;
    k[1] += 2.0 * e * q;
    k[2] += q * q + 2.0 * e * r;
    k[3] += 2.0 * q * r;
    k[4] += r * r;
  }
  if (k[1] == 0.0 && k[2] == 0.0 && k[3] == 0.0 && k[4] == 0.0) {
    throw DegenerateError("exact Gaussian step: line restriction is constant");
  }
  auto line = [&](double mu) { return (((k[4] * mu + k[3]) * mu + k[2]) * mu + k[1]) * mu + k[0]; };
  std::vector<double> cand{0.0};
  for (double r : cubic_real_roots(4.0 * k[4], 3.0 * k[3], 2.0 * k[2], k[1])) {
    if (r > 0.0) cand.push_back(r);
  }
  std::sort(cand.begin(), cand.end());
  double best_mu = cand.front();
  double best = line(best_mu);
  for (double mu : cand) {
    const double val = line(mu);
    if (val < best - 1e-14 * std::abs(best)) {
      best = val;
      best_mu = mu;
    }
  }
  return best_mu;
}

std::vector<bool> truncation_mask(const Objective& obj, const CVec& x, double a_h) {
  const double xn = x.norm();
  if (xn == 0.0) throw DegenerateError("truncation criterion undefined at x = 0");
  const CVec v = obj.model().apply(x);
  const RVec mag2 = v.cwiseAbs2();
  const RVec resid = obj.y() - mag2;
  const double mean_abs = resid.cwiseAbs().sum() / static_cast<double>(resid.size());
  std::vector<bool> mask(static_cast<std::size_t>(v.size()));
  for (Index i = 0; i < v.size(); ++i) {
    bool keep;
    if (std::isinf(a_h)) {
      keep = true;
    } else {
      keep = std::abs(resid[i]) <= a_h * mean_abs * mag2[i] / xn;
    }
    mask[static_cast<std::size_t>(i)] = keep;
  }
  return mask;
}

CVec truncated_gradient(const Objective& obj, const CVec& v, const std::vector<bool>& mask, Field field) {
  CVec m = obj.marginal_gradients(v);
  for (Index i = 0; i < m.size(); ++i)
    if (!mask[static_cast<std::size_t>(i)]) m[i] = 0.0;
  CVec g = obj.model().adjoint(m);
  restrict_gradient(g, field);
  return g;
}

// ---------------------------------------------------------------------------

RunState run_wf(const Problem& problem, const CVec& x0, const WfOptions& opts) {
  opts.rule.validate();
  const Objective& obj = *problem.data;
  const ForwardModel& model = obj.model();
  const StepKind kind = opts.rule.kind;
  if (kind == StepKind::ExactGaussianLineSearch &&
      (obj.noise() != NoiseModel::Gaussian || problem.reg)) {
    throw std::invalid_argument("exact Gaussian line search needs an unregularized Gaussian objective");
  }
  if (kind == StepKind::FisherGaussian && obj.noise() != NoiseModel::Gaussian) {
    throw std::invalid_argument("Gaussian Fisher step needs a Gaussian objective");
  }
  if (opts.n_iters < 0) throw std::invalid_argument("n_iters must be >= 0");

  RunState st;
  st.x = x0;
  require_size(st.x.size(), model.cols(), "run_wf x0");
  project_to_field(st.x, problem.field);
  if (opts.n_iters == 0) return st;

  TraceRecorder rec(opts.trace);
  auto total_cost = [&](const CVec& v, const CVec& x) {
    double c = obj.cost_at(v);
    if (problem.reg) c += problem.reg->cost(x);
    return c;
  };
  auto cost_fn = [&](const CVec& x) { return problem.cost(x); };
  const bool fisher = kind == StepKind::FisherPoisson || kind == StepKind::FisherGaussian;
  constexpr int kRefresh = 50;  // recompute A x exactly this often

  CVec v = model.apply(st.x);
  double cost = total_cost(v, st.x);

  for (int k = 1; k <= opts.n_iters; ++k) {
    rec.start_update();
    try {
      CVec g;
      if (opts.truncation.enabled) {
        g = truncated_gradient(obj, v, truncation_mask(obj, st.x, opts.truncation.a_h), problem.field);
      } else {
        g = obj.gradient_at(v, problem.field);
      }
      if (problem.reg) {
        CVec gr = problem.reg->gradient(st.x);
        restrict_gradient(gr, problem.field);
        g += gr;
      }
      if (g.squaredNorm() == 0.0) {
        rec.stop_update();
        st.trace.message = "stationary point reached at iteration " + std::to_string(k);
        break;
      }

      double mu = 0.0;
      CVec x_new, v_new;
      double cost_new = 0.0;
      if (fisher) {
        const CVec d = model.apply_linear(g);
        if (problem.reg) {
          double denom = d.cwiseAbs2().dot(obj.fisher_weights(v));
          const CVec tg = problem.reg->diff.apply(g);
          denom += problem.reg->beta * tg.cwiseAbs2().dot(problem.reg->weights(st.x));
          if (!(denom > 0.0)) throw DegenerateError("Fisher step: zero curvature");
          mu = g.squaredNorm() / denom;
        } else {
          mu = step_fisher_at(obj, v, d, g);
        }
        auto advance = [&](double step) {
          x_new = st.x - step * g;
          project_to_field(x_new, problem.field);
          const bool clamped = problem.field == Field::RealNonnegative && x_new != CVec(st.x - step * g);
          if (clamped || k % kRefresh == 0) {
            v_new = model.apply(x_new);
          } else {
            v_new = v - step * d;
          }
          cost_new = total_cost(v_new, x_new);
        };
        advance(mu);
        if (!(cost_new - cost <= 10.0 * std::abs(cost))) {
          mu *= 0.5;
          ++st.safeguard_halvings;
          log::debug("WF Fisher step overshoot at iteration " + std::to_string(k) + ", halving");
          advance(mu);
        }
      } else if (kind == StepKind::Backtracking) {
        BacktrackingStep bs = step_backtracking(cost_fn, st.x, cost, g, opts.rule.backtracking, problem.field);
        if (bs.exhausted) {
          ++st.backtracking_exhausted;
          log::debug("backtracking exhausted at iteration " + std::to_string(k));
        }
        mu = bs.mu;
        x_new = st.x - mu * g;
        project_to_field(x_new, problem.field);
        v_new = model.apply(x_new);
        cost_new = total_cost(v_new, x_new);
      } else {
        mu = step_exact_gaussian(static_cast<const GaussianObjective&>(obj), st.x, g);
        x_new = st.x - mu * g;
        project_to_field(x_new, problem.field);
        v_new = model.apply(x_new);
        cost_new = total_cost(v_new, x_new);
      }
      if (!std::isfinite(cost_new)) throw DomainError("cost became non-finite");
      st.x = std::move(x_new);
      v = std::move(v_new);
      cost = cost_new;
      st.step_sizes.push_back(mu);
    } catch (const std::exception& e) {
      rec.stop_update();
      st.trace.status = RunStatus::StepFailure;
      st.trace.message = "iteration " + std::to_string(k) + ": " + e.what();
      log::warn("run_wf stopped: " + st.trace.message);
      break;
    }
    rec.stop_update();
    rec.record(st.trace, k, st.x, cost);
  }
  return st;
}

}  // namespace ppr
