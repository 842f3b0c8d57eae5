#ifndef FDHOM_TYPES_HPP
#define FDHOM_TYPES_HPP

#include <Eigen/Dense>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace fdhom {

/// Largest spatial / target dimension carried by the fixed-capacity Eigen types.
inline constexpr int kMaxDim = 3;

/// Point of R^n, jump amplitude in R^m, or unit normal in S^{n-1}.
using Vector = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, kMaxDim, 1>;
using Point = Vector;

/// m x n gradient matrix, or an n x n frame. Heap-free up to kMaxDim.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, kMaxDim, kMaxDim>;

/// One byte per cell; nonzero means "in the mask".
using CellMask = std::vector<std::uint8_t>;

inline Vector make_vector(std::initializer_list<double> values) {
  Vector v(static_cast<Eigen::Index>(values.size()));
  Eigen::Index i = 0;
  for (double value : values) v(i++) = value;
  return v;
}

inline Matrix scalar_matrix(double value) {
  Matrix m(1, 1);
  m(0, 0) = value;
  return m;
}

inline Vector scalar_vector(double value) {
  Vector v(1);
  v(0) = value;
  return v;
}

// Errors. Every failure mode surfaces as one of these.

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Integrand produced a non-finite or negative value.
class EvaluationError : public Error {
 public:
  using Error::Error;
};

class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// Domain side not commensurate with the lattice spacing, or too few cells.
class DiscretizationError : public Error {
 public:
  using Error::Error;
};

/// Datum range does not fit into the quantization span.
class QuantizationError : public Error {
 public:
  using Error::Error;
};

class NonConvergenceError : public Error {
 public:
  NonConvergenceError(const std::string& what, double spread) : Error(what), spread_(spread) {}
  double spread() const { return spread_; }

 private:
  double spread_;
};

/// Brute-force instance too large; carries the enumeration count it would need.
class OracleLimitError : public Error {
 public:
  OracleLimitError(const std::string& what, double count) : Error(what), count_(count) {}
  double count() const { return count_; }

 private:
  double count_;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace fdhom

#endif  // FDHOM_TYPES_HPP
