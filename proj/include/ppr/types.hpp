#pragma once

#include <complex>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>

#include <Eigen/Core>

namespace ppr {

using Index = Eigen::Index;
using Complex = std::complex<double>;
using CVec = Eigen::VectorXcd;
using RVec = Eigen::VectorXd;
using CMat = Eigen::MatrixXcd;
using RMat = Eigen::MatrixXd;

/// Field the unknown signal lives in.
enum class Field { Real, Complex, RealNonnegative };

std::string to_string(Field f);
Field field_from_string(const std::string& s);

/// Operand sizes disagree.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Scalar kernel evaluated outside its domain (e.g. log of zero with y > 0).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// The iterate or the problem data make a step or solve ill-defined.
class DegenerateError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The unknown signal x, tagged with its field and optional image shape.
struct SignalVector {
  CVec values;
  Field field = Field::Complex;
  std::optional<std::pair<Index, Index>> dims;  // (height, width)

  Index size() const { return values.size(); }
  /// True when the entries satisfy the field constraint exactly.
  bool conforms() const;
};

/// Map x onto the field: drop imaginary parts for real fields, clamp negatives
/// for the nonnegative field.
void project_to_field(CVec& x, Field field);

/// Gradients for real fields keep only the real part.
void restrict_gradient(CVec& g, Field field);

inline bool is_real_field(Field f) { return f != Field::Complex; }

/// Real inner product Re<a, b> on C^N viewed as R^{2N}.
inline double real_dot(const CVec& a, const CVec& b) { return a.dot(b).real(); }

inline void require_size(Index got, Index want, const char* what) {
  if (got != want) {
    throw DimensionError(std::string(what) + ": expected length " + std::to_string(want) +
                         ", got " + std::to_string(got));
  }
}

}  // namespace ppr
