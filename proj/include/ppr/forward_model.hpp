#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <random>
#include <vector>

#include "ppr/types.hpp"

namespace ppr {

enum class ModelKind { Dense, CanonicalDft, MaskedDft, FileMatrix };

std::string to_string(ModelKind k);

/// Matrix-free linear operator A : C^N -> C^M.
class LinearMap {
 public:
  virtual ~LinearMap() = default;
  virtual Index rows() const = 0;
  virtual Index cols() const = 0;
  virtual CVec apply(const CVec& x) const = 0;
  virtual CVec adjoint(const CVec& z) const = 0;
  /// Diagonal of A'A when A'A is diagonal (DFT-based maps), else empty.
  virtual std::optional<RVec> normal_diagonal() const { return std::nullopt; }
};

class DenseMap final : public LinearMap {
 public:
  explicit DenseMap(CMat entries);
  Index rows() const override { return a_.rows(); }
  Index cols() const override { return a_.cols(); }
  CVec apply(const CVec& x) const override { return a_ * x; }
  CVec adjoint(const CVec& z) const override { return a_.adjoint() * z; }
  const CMat& matrix() const { return a_; }

 private:
  CMat a_;
};

class FftPlan;

/// Stack of L masked, zero-padded length-(2N-1) DFTs of a length-N signal.
class MaskedDftMap final : public LinearMap {
 public:
  explicit MaskedDftMap(std::vector<RVec> masks);
  Index rows() const override { return static_cast<Index>(masks_.size()) * padded_; }
  Index cols() const override { return n_; }
  CVec apply(const CVec& x) const override;
  CVec adjoint(const CVec& z) const override;
  std::optional<RVec> normal_diagonal() const override;

  Index padded_length() const { return padded_; }
  const std::vector<RVec>& masks() const { return masks_; }

 private:
  Index n_;
  Index padded_;
  std::vector<RVec> masks_;
  std::shared_ptr<const FftPlan> plan_;
};

/// Layout of the holographic canonical-DFT model: the 2-D DFT of the image
/// row [x, 0, R] embedded in an fft_height x fft_width grid.
struct CanonicalDftSpec {
  Index height = 0;
  Index width = 0;
  RMat reference;          // height x reference width, nonnegative
  Index pad_width = 0;     // zero block between x and the reference
  Index fft_height = 0;
  Index fft_width = 0;
};

/// Linear part of the canonical-DFT model, x -> F[x, 0, 0]. The reference
/// contribution F[0, 0, R] is a known offset held by ForwardModel.
class CanonicalDftMap final : public LinearMap {
 public:
  explicit CanonicalDftMap(CanonicalDftSpec spec);
  Index rows() const override { return spec_.fft_height * spec_.fft_width; }
  Index cols() const override { return spec_.height * spec_.width; }
  CVec apply(const CVec& x) const override;
  CVec adjoint(const CVec& z) const override;
  std::optional<RVec> normal_diagonal() const override;

  /// F[0, 0, R], flattened row-major.
  CVec reference_spectrum() const;
  const CanonicalDftSpec& spec() const { return spec_; }

 private:
  CanonicalDftSpec spec_;
  std::shared_ptr<const FftPlan> plan_;
};

/// A scaled forward model: mean intensities are |c (A x + r)|^2 + b, where r is
/// a known complex offset (zero except for the canonical-DFT reference).
/// Immutable apart from the scale, which calibrate_scale sets once.
class ForwardModel {
 public:
  ForwardModel(ModelKind kind, std::shared_ptr<const LinearMap> map, RVec background,
               CVec offset = CVec());

  ModelKind kind() const { return kind_; }
  Index rows() const { return map_->rows(); }
  Index cols() const { return map_->cols(); }
  double scale() const { return scale_; }
  void set_scale(double c);
  const RVec& background() const { return background_; }
  bool has_offset() const { return offset_.size() > 0; }
  /// Scaled offset c r (zeros when absent).
  CVec offset() const;

  /// c (A x + r).
  CVec apply(const CVec& x) const;
  /// c A x.
  CVec apply_linear(const CVec& x) const;
  /// c A' z.
  CVec adjoint(const CVec& z) const;
  /// Diagonal of c^2 A'A when A'A is diagonal.
  std::optional<RVec> normal_diagonal() const;

  const LinearMap& map() const { return *map_; }

 private:
  ModelKind kind_;
  std::shared_ptr<const LinearMap> map_;
  RVec background_;
  CVec offset_;
  double scale_ = 1.0;
};

/// Poisson counts with the seed that generated them.
struct MeasurementSet {
  RVec y;  // nonnegative integers stored as doubles
  std::uint64_t seed = 0;
  double mean_count = 0.0;
};

enum class MaskSampling { Bernoulli, ExactHalf };

// Model factories.
ForwardModel make_dense_model(CMat a, RVec background, ModelKind kind = ModelKind::Dense);
/// i.i.d. circular complex Gaussian entries with unit variance.
ForwardModel make_gaussian_model(Index rows, Index cols, std::uint64_t seed, double background);
/// First mask all ones, the rest sampled at rate 0.5.
std::vector<RVec> make_masks(Index n, Index num_masks, std::uint64_t seed, MaskSampling sampling);
ForwardModel make_masked_dft_model(std::vector<RVec> masks, double background);
ForwardModel make_canonical_dft_model(CanonicalDftSpec spec, double background);

/// |apply(x)|^2 + b.
RVec mean_intensity(const ForwardModel& model, const CVec& x);

/// Sets and returns c with mean_i(|c (A x + r)_i|^2 + b_i) = target_mean.
double calibrate_scale(ForwardModel& model, const CVec& x_true, double target_mean);

/// 64-bit generator used for every stochastic step in the library.
using Rng = std::mt19937_64;

/// Uniform double in [0, 1) from the top 53 bits.
inline double uniform01(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }
double standard_normal(Rng& rng);

/// Poisson variate: inversion below mean 10, PTRS transformed rejection above.
double sample_poisson(double mean, Rng& rng);

MeasurementSet simulate_poisson(const ForwardModel& model, const CVec& x_true, std::uint64_t seed);

/// Explicit M x N matrix of the linear part, one column per basis vector.
CMat densify(const ForwardModel& model);

}  // namespace ppr
