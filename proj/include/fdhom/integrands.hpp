#ifndef FDHOM_INTEGRANDS_HPP
#define FDHOM_INTEGRANDS_HPP

#include "fdhom/types.hpp"

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace fdhom {

/// Nondecreasing modulus on [0, inf) given by nodes; linear in between,
/// constant past the last node.
class MonotoneTable {
 public:
  MonotoneTable();  // identically zero
  MonotoneTable(std::vector<double> nodes, std::vector<double> values);

  /// s -> min(slope * s, cap)
  static MonotoneTable capped_linear(double slope, double cap);

  double operator()(double s) const;

  const std::vector<double>& nodes() const { return nodes_; }
  const std::vector<double>& values() const { return values_; }

 private:
  std::vector<double> nodes_;
  std::vector<double> values_;
};

/// Growth / continuity constants shared by a volume-surface pair.
struct IntegrandConstants {
  double c1 = 0.0;
  double c2 = 1.0;
  double c3 = 1.0;
  double c4 = 0.0;
  double c5 = 0.0;
  double alpha = 0.5;
  MonotoneTable sigma1;
  MonotoneTable sigma2;

  /// Throws PreconditionError unless 0 < c2 <= c3, alpha in (0,1), c's >= 0.
  void validate() const;
};

struct VolumeFlags {
  bool one_homogeneous = false;
  bool x_independent = false;
};

/// Volume energy density f(x, xi), xi an m x n matrix. Immutable and cheap to copy;
/// evaluation is reentrant.
class VolumeIntegrand {
 public:
  using Function = std::function<double(const Point&, const Matrix&)>;

  VolumeIntegrand(Function fn, IntegrandConstants constants, int m, int n, VolumeFlags flags = {},
                  std::string name = "volume");

  /// Throws EvaluationError on non-finite or negative values.
  double operator()(const Point& x, const Matrix& xi) const;

  const IntegrandConstants& constants() const { return constants_; }
  int m() const { return m_; }
  int n() const { return n_; }
  const VolumeFlags& flags() const { return flags_; }
  const std::string& name() const { return name_; }

  /// Spread of f(t xi)/t over the last schedule entries, when produced by recession().
  std::optional<double> convergence_spread() const { return spread_; }
  VolumeIntegrand with_spread(double spread) const;
  VolumeIntegrand with_constants(IntegrandConstants constants) const;

 private:
  std::shared_ptr<const Function> fn_;
  IntegrandConstants constants_;
  int m_;
  int n_;
  VolumeFlags flags_;
  std::string name_;
  std::optional<double> spread_;
};

/// Surface energy density g(x, zeta, nu).
class SurfaceIntegrand {
 public:
  using Function = std::function<double(const Point&, const Vector&, const Vector&)>;

  SurfaceIntegrand(Function fn, IntegrandConstants constants, int m, int n, bool one_homogeneous = false,
                   std::string name = "surface");

  double operator()(const Point& x, const Vector& zeta, const Vector& nu) const;

  const IntegrandConstants& constants() const { return constants_; }
  int m() const { return m_; }
  int n() const { return n_; }
  bool one_homogeneous() const { return one_homogeneous_; }
  const std::string& name() const { return name_; }

  std::optional<double> convergence_spread() const { return spread_; }
  SurfaceIntegrand with_spread(double spread) const;
  SurfaceIntegrand with_constants(IntegrandConstants constants) const;

 private:
  std::shared_ptr<const Function> fn_;
  IntegrandConstants constants_;
  int m_;
  int n_;
  bool one_homogeneous_;
  std::string name_;
  std::optional<double> spread_;
};

/// Where and how hard an admissibility check probes an integrand.
struct SampleSpec {
  std::vector<Point> points;         ///< x samples
  std::vector<double> magnitudes;    ///< |xi| or |zeta| samples
  std::vector<double> scales;        ///< s, t values for the Cauchy forms; small values for (g5)
  std::vector<Vector> normals;       ///< nu samples (surface only; default: +-e_n)
  int directions = 4;                ///< extra pseudo-random unit directions beyond the axes
  double tolerance = 1e-10;          ///< relative slack before a violation counts
  double uniformity_tolerance = 1e-2;///< bound on lambda at the smallest scale for (g5)

  /// 1D default: x in {0, 0.3, 1.7}, magnitudes {0.5, 1, 2, 4}.
  static SampleSpec default_for(int m, int n);
};

struct PropertyVerdict {
  std::string property;
  bool pass = true;
  double worst_violation = 0.0;  ///< largest (lhs - rhs) seen; <= 0 on a clean pass
  std::string witness;           ///< sample realising worst_violation
  double witness_magnitude = 0.0;
};

struct AdmissibilityReport {
  std::string subject;
  std::vector<PropertyVerdict> verdicts;
  std::vector<std::string> notes;

  bool all_pass() const;
  const PropertyVerdict& verdict(const std::string& property) const;
  std::string to_string() const;
};

AdmissibilityReport check_volume_admissibility(const VolumeIntegrand& f, const SampleSpec& sample);
AdmissibilityReport check_surface_admissibility(const SurfaceIntegrand& g, const SampleSpec& sample);

/// Geometric schedules used to materialise f-infinity and g_0.
std::vector<double> default_recession_schedule();   // 1e1 ... 1e4
std::vector<double> default_derivative_schedule();  // 1e-2 ... 1e-8

/// f_inf(x, xi) := f(x, t_max xi) / t_max. Throws NonConvergenceError when the spread over the
/// last three schedule entries exceeds `tolerance`.
VolumeIntegrand recession(const VolumeIntegrand& f, const std::vector<double>& t_schedule,
                          std::optional<double> tolerance = std::nullopt,
                          const std::vector<Point>& sample_points = {});

/// g_0(x, zeta, nu) := |zeta| g(x, t_min zeta/|zeta|, nu) / t_min.
SurfaceIntegrand derivative_at_zero(const SurfaceIntegrand& g, const std::vector<double>& t_schedule,
                                    std::optional<double> tolerance = std::nullopt,
                                    const std::vector<Point>& sample_points = {});

/// Sampled sup of |g_0 - g(tau zeta)/tau| over unit zeta and tau <= t on a fixed dyadic grid,
/// hence nondecreasing in t.
double modulus_lambda(const SurfaceIntegrand& g, const SurfaceIntegrand& g0, double t, const SampleSpec& sample);

/// Unit directions in R^{rows x cols} used by every sampled check: the coordinate axes,
/// their negatives, and `extra` seeded pseudo-random ones.
std::vector<Matrix> unit_directions(int rows, int cols, int extra);

}  // namespace fdhom

#endif  // FDHOM_INTEGRANDS_HPP
