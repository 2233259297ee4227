#include "ppr/init_eval.hpp"

#include <cmath>
#include <limits>

#include "ppr/log.hpp"
#include "ppr/numerics.hpp"

namespace ppr {

std::string to_string(RunStatus s) {
  switch (s) {
    case RunStatus::Completed: return "completed";
    case RunStatus::StepFailure: return "step_failure";
    case RunStatus::NumericalFailure: return "numerical_failure";
  }
  return "completed";
}

TraceRecord TraceRecorder::record(IterationTrace& trace, int k, const CVec& x, double cost) const {
  TraceRecord r;
  r.k = k;
  r.elapsed_seconds = elapsed_;
  r.cost = cost;
  if (opts_.x_true) {
    r.nrmse = nrmse(x, *opts_.x_true);
    r.psnr = psnr(x, *opts_.x_true, opts_.psnr_peak);
  } else {
    r.nrmse = r.psnr = std::numeric_limits<double>::quiet_NaN();
  }
  trace.records.push_back(r);
  return r;
}

SpectralInit spectral_init(const ForwardModel& model, const RVec& y, int iters, std::uint64_t seed,
                           Field field) {
  require_size(y.size(), model.rows(), "spectral_init measurements");
  SpectralInit out;
  const RVec weights = (y.array() / (y.array() + 1.0)).matrix();
  if (weights.isZero(0.0)) {
    log::warn("spectral_init: all measurements are zero; returning a random unit vector");
    Rng rng(seed);
    out.x.resize(model.cols());
    for (Index i = 0; i < out.x.size(); ++i) {
      out.x[i] = Complex(standard_normal(rng), is_real_field(field) ? 0.0 : standard_normal(rng));
    }
    out.x.normalize();
    out.degenerate = true;
    return out;
  }
  PsdOperator op{model.cols(), [&model, &weights](const CVec& u) -> CVec {
                   CVec v = model.apply_linear(u);
                   v.array() *= weights.array().cast<Complex>();
                   return model.adjoint(v);
                 }};
  if (is_real_field(field)) op = real_part(std::move(op));
  EigenPair ep = power_method(op, iters, seed, is_real_field(field));
  out.x = std::move(ep.vector);
  out.x.normalize();
  out.eigenvalue = ep.value;
  return out;
}

double scale_fit(const ForwardModel& model, const RVec& y, const CVec& x0) {
  require_size(y.size(), model.rows(), "scale_fit measurements");
  const RVec mag2 = model.apply_linear(x0).cwiseAbs2();
  const double denom = mag2.squaredNorm();  // ||A x0||_4^4
  if (denom == 0.0) throw DegenerateError("scale_fit: A x0 = 0");
  const double num = (y - model.background()).dot(mag2);
  if (num < 0.0) {
    log::warn("scale_fit: (y - b)'|A x0|^2 < 0, using scale 0");
    return 0.0;
  }
  return std::sqrt(num) / std::sqrt(denom);
}

CVec finalize_init(const CVec& x0, double alpha, Field field) {
  CVec x = alpha * x0;
  if (field == Field::RealNonnegative) {
    x = x.cwiseAbs().cast<Complex>();
  } else if (field == Field::Real) {
    x = x.real().cast<Complex>();
  }
  return x;
}

CVec phase_correct(const CVec& x_hat, const CVec& x_true) {
  require_size(x_hat.size(), x_true.size(), "phase_correct");
  const Complex ip = x_hat.dot(x_true);  // x_hat' x_true
  const double a = std::abs(ip);
  if (a == 0.0) return x_hat;
  return (ip / a) * x_hat;
}

double nrmse(const CVec& x_hat, const CVec& x_true) {
  const double ref = x_true.norm();
  if (ref == 0.0) throw DegenerateError("nrmse: reference signal is zero");
  return (phase_correct(x_hat, x_true) - x_true).norm() / ref;
}

double psnr(const CVec& x_hat, const CVec& x_true, std::optional<double> peak) {
  const double pk = peak ? *peak : x_true.cwiseAbs().maxCoeff();
  const double err = (phase_correct(x_hat, x_true) - x_true).squaredNorm();
  if (err == 0.0) return kPsnrCapDb;
  const double val = 10.0 * std::log10(pk * pk * static_cast<double>(x_true.size()) / err);
  return std::min(val, kPsnrCapDb);
}

}  // namespace ppr
