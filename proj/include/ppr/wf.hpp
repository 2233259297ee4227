#pragma once

#include <functional>

#include "ppr/init_eval.hpp"
#include "ppr/objectives.hpp"

namespace ppr {

enum class StepKind { FisherPoisson, FisherGaussian, Backtracking, ExactGaussianLineSearch };
std::string to_string(StepKind k);

struct BacktrackingParams {
  double shrink = 0.5;   // tau
  double sigma = 0.01;   // sufficient-decrease constant
  double mu0 = 1.0;
  int max_trials = 30;
};

struct StepRule {
  StepKind kind = StepKind::FisherPoisson;
  BacktrackingParams backtracking;
  void validate() const;
};

struct TruncationRule {
  bool enabled = false;
  double a_h = 5.0;
};

/// ||g||^2 / (d' D1 d) with d = A g and D1 the objective's marginal Fisher
/// weights at v = A x. Throws DegenerateError for g = 0 or a zero denominator.
double step_fisher(const Objective& obj, const CVec& x, const CVec& grad);
double step_fisher_at(const Objective& obj, const CVec& v, const CVec& d, const CVec& grad);

/// Regularized Fisher step: ||g||^2 / (d' D1 d + beta (T g)' D2 (T g)).
double step_fisher_reg(const Problem& problem, const CVec& x, const CVec& grad);

struct BacktrackingStep {
  double mu = 0.0;
  double cost = 0.0;     // cost at the accepted point
  int trials = 0;
  bool exhausted = false;  // no trial met the Armijo condition
};

/// Largest mu0 tau^j with cost(x - mu g) <= cost(x) - sigma mu ||g||^2.
BacktrackingStep step_backtracking(const std::function<double(const CVec&)>& cost, const CVec& x,
                                   double cost_x, const CVec& grad, const BacktrackingParams& p,
                                   Field field = Field::Complex);

/// Global minimizer over mu >= 0 of the quartic mu -> g(x - mu grad).
double step_exact_gaussian(const GaussianObjective& obj, const CVec& x, const CVec& grad);

/// Measurements kept by the truncation criterion
///   |y_i - |a_i'x|^2| <= a_h (||y - |Ax|^2||_1 / M) |a_i'x|^2 / ||x||.
std::vector<bool> truncation_mask(const Objective& obj, const CVec& x, double a_h);

/// A' (mask .* marginal gradients), real part for real fields.
CVec truncated_gradient(const Objective& obj, const CVec& v, const std::vector<bool>& mask, Field field);

struct WfOptions {
  StepRule rule;
  TruncationRule truncation;
  int n_iters = 100;
  TraceOptions trace;
};

/// Wirtinger flow x_{k+1} = x_k - mu_k grad Psi(x_k).
RunState run_wf(const Problem& problem, const CVec& x0, const WfOptions& opts);

}  // namespace ppr
