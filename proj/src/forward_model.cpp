#include "ppr/forward_model.hpp"

#include <fftw3.h>

#include <cassert>
#include <cmath>
#include <mutex>
#include <numbers>

namespace ppr {

std::string to_string(ModelKind k) {
  switch (k) {
    case ModelKind::Dense: return "dense";
    case ModelKind::CanonicalDft: return "canonical_dft";
    case ModelKind::MaskedDft: return "masked_dft";
    case ModelKind::FileMatrix: return "file_matrix";
  }
  return "dense";
}

// ---------------------------------------------------------------------------
// FFTW plumbing. Plans are created once under a global lock (the planner is
// not reentrant) and executed through the new-array interface, which is.

namespace {
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

struct FftwBuffer {
  explicit FftwBuffer(std::size_t n)
      : size(n), data(static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * n))) {
    if (!data) throw std::bad_alloc();
  }
  ~FftwBuffer() { fftw_free(data); }
  FftwBuffer(const FftwBuffer&) = delete;
  FftwBuffer& operator=(const FftwBuffer&) = delete;

  Complex* ptr() { return reinterpret_cast<Complex*>(data); }
  std::size_t size;
  fftw_complex* data;
};
}  // namespace

/// Forward/backward unnormalized DFT plans of a fixed 1-D or 2-D shape.
class FftPlan {
 public:
  FftPlan(int n0, int n1) : n0_(n0), n1_(n1) {
    FftwBuffer in(total()), out(total());
    std::lock_guard<std::mutex> lock(planner_mutex());
    if (n1 == 0) {
      fwd_ = fftw_plan_dft_1d(n0, in.data, out.data, FFTW_FORWARD, FFTW_ESTIMATE);
      bwd_ = fftw_plan_dft_1d(n0, in.data, out.data, FFTW_BACKWARD, FFTW_ESTIMATE);
    } else {
      fwd_ = fftw_plan_dft_2d(n0, n1, in.data, out.data, FFTW_FORWARD, FFTW_ESTIMATE);
      bwd_ = fftw_plan_dft_2d(n0, n1, in.data, out.data, FFTW_BACKWARD, FFTW_ESTIMATE);
    }
    if (!fwd_ || !bwd_) throw std::runtime_error("FFTW planning failed");
  }
  ~FftPlan() {
    std::lock_guard<std::mutex> lock(planner_mutex());
    fftw_destroy_plan(fwd_);
    fftw_destroy_plan(bwd_);
  }
  FftPlan(const FftPlan&) = delete;
  FftPlan& operator=(const FftPlan&) = delete;

  std::size_t total() const {
    return static_cast<std::size_t>(n0_) * static_cast<std::size_t>(n1_ == 0 ? 1 : n1_);
  }

  /// In place on `data` (length total()).
  void execute(Complex* data, bool forward) const {
    FftwBuffer in(total()), out(total());
    std::copy(data, data + total(), in.ptr());
    fftw_execute_dft(forward ? fwd_ : bwd_, in.data, out.data);
    std::copy(out.ptr(), out.ptr() + total(), data);
  }

 private:
  int n0_, n1_;
  fftw_plan fwd_ = nullptr;
  fftw_plan bwd_ = nullptr;
};

// ---------------------------------------------------------------------------

DenseMap::DenseMap(CMat entries) : a_(std::move(entries)) {
  if (a_.rows() < 1 || a_.cols() < 1) throw DimensionError("dense model needs M, N >= 1");
  if (!a_.allFinite()) throw std::invalid_argument("dense model entries must be finite");
}

MaskedDftMap::MaskedDftMap(std::vector<RVec> masks) : masks_(std::move(masks)) {
  if (masks_.empty()) throw std::invalid_argument("masked DFT needs at least one mask");
  n_ = masks_.front().size();
  if (n_ < 1) throw DimensionError("masked DFT needs N >= 1");
  for (const auto& m : masks_) require_size(m.size(), n_, "mask");
  padded_ = 2 * n_ - 1;
  plan_ = std::make_shared<const FftPlan>(static_cast<int>(padded_), 0);
}

CVec MaskedDftMap::apply(const CVec& x) const {
  require_size(x.size(), n_, "masked DFT apply");
  CVec out(rows());
  CVec buf(padded_);
  for (std::size_t l = 0; l < masks_.size(); ++l) {
    buf.setZero();
    buf.head(n_) = x.cwiseProduct(masks_[l].cast<Complex>());
    plan_->execute(buf.data(), true);
    out.segment(static_cast<Index>(l) * padded_, padded_) = buf;
  }
  return out;
}

CVec MaskedDftMap::adjoint(const CVec& z) const {
  require_size(z.size(), rows(), "masked DFT adjoint");
  CVec out = CVec::Zero(n_);
  CVec buf(padded_);
  for (std::size_t l = 0; l < masks_.size(); ++l) {
    buf = z.segment(static_cast<Index>(l) * padded_, padded_);
    plan_->execute(buf.data(), false);
    out += buf.head(n_).cwiseProduct(masks_[l].cast<Complex>());
  }
  return out;
}

std::optional<RVec> MaskedDftMap::normal_diagonal() const {
  RVec d = RVec::Zero(n_);
  for (const auto& m : masks_) d += m.cwiseAbs2();
  return d * static_cast<double>(padded_);
}

CanonicalDftMap::CanonicalDftMap(CanonicalDftSpec spec) : spec_(std::move(spec)) {
  const auto& s = spec_;
  if (s.height < 1 || s.width < 1) throw DimensionError("canonical DFT image must be non-empty");
  if (s.reference.rows() != s.height) {
    throw DimensionError("canonical DFT reference height " + std::to_string(s.reference.rows()) +
                         " differs from image height " + std::to_string(s.height));
  }
  if ((s.reference.array() < 0.0).any()) {
    throw std::invalid_argument("canonical DFT reference must be nonnegative");
  }
  if (s.pad_width < 0) throw std::invalid_argument("canonical DFT pad width must be >= 0");
  const Index span = s.width + s.pad_width + s.reference.cols();
  if (s.fft_height < s.height || s.fft_width < span) {
    throw DimensionError("canonical DFT grid " + std::to_string(s.fft_height) + "x" +
                         std::to_string(s.fft_width) + " cannot hold the " +
                         std::to_string(s.height) + "x" + std::to_string(span) + " layout");
  }
  plan_ = std::make_shared<const FftPlan>(static_cast<int>(s.fft_height),
                                          static_cast<int>(s.fft_width));
}

CVec CanonicalDftMap::apply(const CVec& x) const {
  require_size(x.size(), cols(), "canonical DFT apply");
  const auto& s = spec_;
  CVec grid = CVec::Zero(rows());
  for (Index r = 0; r < s.height; ++r)
    for (Index c = 0; c < s.width; ++c) grid[r * s.fft_width + c] = x[r * s.width + c];
  plan_->execute(grid.data(), true);
  return grid;
}

CVec CanonicalDftMap::adjoint(const CVec& z) const {
  require_size(z.size(), rows(), "canonical DFT adjoint");
  const auto& s = spec_;
  CVec grid = z;
  plan_->execute(grid.data(), false);
  CVec x(cols());
  for (Index r = 0; r < s.height; ++r)
    for (Index c = 0; c < s.width; ++c) x[r * s.width + c] = grid[r * s.fft_width + c];
  return x;
}

std::optional<RVec> CanonicalDftMap::normal_diagonal() const {
  return RVec::Constant(cols(), static_cast<double>(rows()));
}

CVec CanonicalDftMap::reference_spectrum() const {
  const auto& s = spec_;
  CVec grid = CVec::Zero(rows());
  const Index c0 = s.width + s.pad_width;
  for (Index r = 0; r < s.height; ++r)
    for (Index c = 0; c < s.reference.cols(); ++c) grid[r * s.fft_width + c0 + c] = s.reference(r, c);
  plan_->execute(grid.data(), true);
  return grid;
}

// ---------------------------------------------------------------------------

ForwardModel::ForwardModel(ModelKind kind, std::shared_ptr<const LinearMap> map, RVec background,
                           CVec offset)
    : kind_(kind), map_(std::move(map)), background_(std::move(background)), offset_(std::move(offset)) {
  if (!map_) throw std::invalid_argument("forward model needs an operator");
  require_size(background_.size(), map_->rows(), "background");
  if (!background_.allFinite() || (background_.array() < 0.0).any()) {
    throw std::invalid_argument("background must be finite and nonnegative");
  }
  if (offset_.size() > 0) require_size(offset_.size(), map_->rows(), "offset");
}

void ForwardModel::set_scale(double c) {
  if (!(c >= 0.0) || !std::isfinite(c)) throw std::invalid_argument("scale must be finite and >= 0");
  scale_ = c;
}

CVec ForwardModel::offset() const {
  if (!has_offset()) return CVec::Zero(rows());
  return scale_ * offset_;
}

CVec ForwardModel::apply(const CVec& x) const {
  require_size(x.size(), cols(), "forward model apply");
  CVec v = map_->apply(x);
  if (has_offset()) v += offset_;
  return scale_ * v;
}

CVec ForwardModel::apply_linear(const CVec& x) const {
  require_size(x.size(), cols(), "forward model apply");
  return scale_ * map_->apply(x);
}

CVec ForwardModel::adjoint(const CVec& z) const {
  require_size(z.size(), rows(), "forward model adjoint");
  return scale_ * map_->adjoint(z);
}

std::optional<RVec> ForwardModel::normal_diagonal() const {
  auto d = map_->normal_diagonal();
  if (d) *d *= scale_ * scale_;
  return d;
}

// ---------------------------------------------------------------------------

ForwardModel make_dense_model(CMat a, RVec background, ModelKind kind) {
  auto map = std::make_shared<const DenseMap>(std::move(a));
  return ForwardModel(kind, map, std::move(background));
}

double standard_normal(Rng& rng) {
  // Box-Muller on 53-bit uniforms, one variate per call.
  double u1 = uniform01(rng);
  while (u1 <= 0.0) u1 = uniform01(rng);
  const double u2 = uniform01(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

ForwardModel make_gaussian_model(Index rows, Index cols, std::uint64_t seed, double background) {
  Rng rng(seed);
  CMat a(rows, cols);
  const double s = std::sqrt(0.5);
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j) {
      const double re = standard_normal(rng);
      const double im = standard_normal(rng);
      a(i, j) = Complex(s * re, s * im);
    }
  return make_dense_model(std::move(a), RVec::Constant(rows, background));
}

std::vector<RVec> make_masks(Index n, Index num_masks, std::uint64_t seed, MaskSampling sampling) {
  if (num_masks < 1) throw std::invalid_argument("need at least one mask");
  Rng rng(seed ^ 0x6d61736bULL);  // dedicated sub-seed
  std::vector<RVec> masks;
  masks.push_back(RVec::Ones(n));
  for (Index l = 1; l < num_masks; ++l) {
    RVec m = RVec::Zero(n);
    if (sampling == MaskSampling::Bernoulli) {
      for (Index i = 0; i < n; ++i) m[i] = uniform01(rng) < 0.5 ? 1.0 : 0.0;
    } else {
      std::vector<Index> idx(static_cast<std::size_t>(n));
      for (Index i = 0; i < n; ++i) idx[static_cast<std::size_t>(i)] = i;
      // Partial Fisher-Yates for exactly floor(n/2) ones.
      const Index k = n / 2;
      for (Index i = 0; i < k; ++i) {
        const auto j = i + static_cast<Index>(uniform01(rng) * static_cast<double>(n - i));
        std::swap(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(j)]);
        m[idx[static_cast<std::size_t>(i)]] = 1.0;
      }
    }
    masks.push_back(std::move(m));
  }
  return masks;
}

ForwardModel make_masked_dft_model(std::vector<RVec> masks, double background) {
  auto map = std::make_shared<const MaskedDftMap>(std::move(masks));
  const Index m = map->rows();
  return ForwardModel(ModelKind::MaskedDft, map, RVec::Constant(m, background));
}

ForwardModel make_canonical_dft_model(CanonicalDftSpec spec, double background) {
  auto map = std::make_shared<const CanonicalDftMap>(std::move(spec));
  const Index m = map->rows();
  return ForwardModel(ModelKind::CanonicalDft, map, RVec::Constant(m, background),
                      map->reference_spectrum());
}

RVec mean_intensity(const ForwardModel& model, const CVec& x) {
  return model.apply(x).cwiseAbs2() + model.background();
}

double calibrate_scale(ForwardModel& model, const CVec& x_true, double target_mean) {
  if (!(target_mean > 0.0)) throw std::invalid_argument("target mean count must be positive");
  require_size(x_true.size(), model.cols(), "calibrate_scale signal");
  CVec raw = model.map().apply(x_true);
  if (model.has_offset()) {
    model.set_scale(1.0);
    raw += model.offset();
  }
  const double mean_b = model.background().mean();
  const double mean_sig = raw.squaredNorm() / static_cast<double>(raw.size());
  const double excess = target_mean - mean_b;
  if (mean_sig == 0.0) {
    if (excess == 0.0) {
      model.set_scale(0.0);
      return 0.0;
    }
    throw DegenerateError("calibrate_scale: signal maps to zero, target mean " +
                          std::to_string(target_mean) + " unattainable with mean background " +
                          std::to_string(mean_b));
  }
  if (excess < 0.0) {
    throw DegenerateError("calibrate_scale: target mean " + std::to_string(target_mean) +
                          " is below the mean background " + std::to_string(mean_b));
  }
  const double c = std::sqrt(excess / mean_sig);
  model.set_scale(c);
  return c;
}

double sample_poisson(double mean, Rng& rng) {
  assert(mean >= 0.0);
  if (!(mean >= 0.0)) throw DomainError("Poisson mean must be nonnegative");
  if (mean == 0.0) return 0.0;
  if (mean < 10.0) {
    const double u = uniform01(rng);
    double p = std::exp(-mean);
    double cdf = p;
    double k = 0.0;
    while (u > cdf) {
      k += 1.0;
      p *= mean / k;
      cdf += p;
      if (p == 0.0 && cdf <= u) break;  // rounding tail
    }
    return k;
  }
  // Transformed rejection with squeeze (Hormann 1993).
  const double slam = std::sqrt(mean);
  const double loglam = std::log(mean);
  const double b = 0.931 + 2.53 * slam;
  const double a = -0.059 + 0.02483 * b;
  const double invalpha = 1.1239 + 1.1328 / (b - 3.4);
  const double vr = 0.9277 - 3.6224 / (b - 2.0);
  for (;;) {
    const double u = uniform01(rng) - 0.5;
    const double v = uniform01(rng);
    const double us = 0.5 - std::abs(u);
    const double k = std::floor((2.0 * a / us + b) * u + mean + 0.43);
    if (us >= 0.07 && v <= vr) return k;
    if (k < 0.0 || (us < 0.013 && v > us)) continue;
    if (std::log(v) + std::log(invalpha) - std::log(a / (us * us) + b) <=
        -mean + k * loglam - std::lgamma(k + 1.0)) {
      return k;
    }
  }
}

MeasurementSet simulate_poisson(const ForwardModel& model, const CVec& x_true, std::uint64_t seed) {
  const RVec mean = mean_intensity(model, x_true);
  if (!mean.allFinite()) throw DomainError("simulate_poisson: non-finite mean intensity");
  Rng rng(seed);
  MeasurementSet out;
  out.seed = seed;
  out.y.resize(mean.size());
  for (Index i = 0; i < mean.size(); ++i) out.y[i] = sample_poisson(mean[i], rng);
  out.mean_count = out.y.mean();
  return out;
}

CMat densify(const ForwardModel& model) {
  CMat a(model.rows(), model.cols());
  CVec e = CVec::Zero(model.cols());
  for (Index j = 0; j < model.cols(); ++j) {
    e[j] = 1.0;
    a.col(j) = model.apply_linear(e);
    e[j] = 0.0;
  }
  return a;
}

}  // namespace ppr
