#pragma once

#include <chrono>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ppr/forward_model.hpp"

namespace ppr {

/// PSNR reported for an exact reconstruction.
inline constexpr double kPsnrCapDb = 300.0;

struct TraceRecord {
  int k = 0;
  double elapsed_seconds = 0.0;  // cumulative time spent in iterate updates
  double cost = 0.0;
  double nrmse = 0.0;
  double psnr = 0.0;
};

enum class RunStatus { Completed, StepFailure, NumericalFailure };
std::string to_string(RunStatus s);

struct IterationTrace {
  std::vector<TraceRecord> records;
  RunStatus status = RunStatus::Completed;
  std::string message;
};

/// Result of one solver run.
struct RunState {
  CVec x;
  IterationTrace trace;
  std::vector<double> step_sizes;
  int safeguard_halvings = 0;     // WF Fisher overshoot guard
  int backtracking_exhausted = 0;  // Armijo searches that ran out of trials
  int inner_nonconverged = 0;      // MM/ADMM inner solves that hit their cap
};

/// What a runner needs to fill the quality columns of a trace. Without a
/// reference signal nrmse/psnr are NaN.
struct TraceOptions {
  std::optional<CVec> x_true;
  std::optional<double> psnr_peak;  // default max |x_true|
};

/// Accumulates update wall time separately from metric evaluation.
class TraceRecorder {
 public:
  explicit TraceRecorder(const TraceOptions& opts) : opts_(opts) {}
  void start_update() { t0_ = std::chrono::steady_clock::now(); }
  void stop_update() {
    elapsed_ += std::chrono::duration<double>(std::chrono::steady_clock::now() - t0_).count();
  }
  TraceRecord record(IterationTrace& trace, int k, const CVec& x, double cost) const;

 private:
  const TraceOptions& opts_;
  std::chrono::steady_clock::time_point t0_{};
  double elapsed_ = 0.0;
};

struct SpectralInit {
  CVec x;               // unit norm
  double eigenvalue = 0.0;
  bool degenerate = false;  // y = 0: random unit vector returned
};

/// Leading eigenvector of A' diag{y / (y + 1)} A by power iteration. Real
/// fields iterate on the real part of the operator from a real start.
SpectralInit spectral_init(const ForwardModel& model, const RVec& y, int iters, std::uint64_t seed,
                           Field field);

/// sqrt((y - b)' |A x0|^2) / ||A x0||_4^2, clipped to 0 (with a warning)
/// when the inner product is negative. Uses the linear part of the model.
double scale_fit(const ForwardModel& model, const RVec& y, const CVec& x0);

/// |alpha x0| entrywise for nonnegative signals, alpha x0 otherwise.
CVec finalize_init(const CVec& x0, double alpha, Field field);

/// sign(<x_hat, x_true>) x_hat with sign(0) = 1.
CVec phase_correct(const CVec& x_hat, const CVec& x_true);

/// ||phase_correct(x_hat) - x|| / ||x||.
double nrmse(const CVec& x_hat, const CVec& x_true);
/// 10 log10(peak^2 N / ||phase_correct(x_hat) - x||^2), capped at kPsnrCapDb.
double psnr(const CVec& x_hat, const CVec& x_true, std::optional<double> peak = std::nullopt);

}  // namespace ppr
