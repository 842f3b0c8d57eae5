#ifndef FDHOM_STOCHASTIC_HPP
#define FDHOM_STOCHASTIC_HPP

#include "fdhom/homogenize.hpp"

#include <array>
#include <cstdint>
#include <utility>
#include <vector>

namespace fdhom {

enum class EnsembleKind { checkerboard, iid_cell, poisson_inclusion };

std::string to_string(EnsembleKind kind);
EnsembleKind ensemble_kind_from(const std::string& name);

/// f_omega(x, xi) = a_omega(x) |xi|, g(x, zeta, nu) = surface_scale |zeta|.
struct EnsembleSpec {
  EnsembleKind kind = EnsembleKind::iid_cell;
  /// (value, probability). checkerboard: the two atoms; iid_cell: the law of a on each unit cell.
  std::vector<std::pair<double, double>> law{{1.0, 1.0}};
  double surface_scale = 1.0;
  int n = 1;
  // poisson_inclusion: a = inclusion_value within `radius` of a Poisson point, matrix_value elsewhere
  double matrix_value = 1.0;
  double inclusion_value = 3.0;
  double intensity = 1.0;
  double radius = 0.25;
};

/// A realization: the ensemble seed and an integer translation. Shifts act on the offset only.
struct Omega {
  std::uint64_t seed = 0;
  std::array<std::int64_t, kMaxDim> offset{0, 0, 0};

  friend bool operator==(const Omega&, const Omega&) = default;
};

/// tau_z omega
Omega shift(const Omega& omega, const std::array<std::int64_t, kMaxDim>& z);

class StationaryEnsemble {
 public:
  StationaryEnsemble(EnsembleSpec spec, std::uint64_t seed);

  const EnsembleSpec& spec() const { return spec_; }
  std::uint64_t seed() const { return seed_; }
  int dim() const { return spec_.n; }

  /// i-th independent realization (sub-seeded from the ensemble seed).
  Omega omega(std::uint64_t index) const;

  /// a_omega(x) = a_{tau_z omega}(x - z) for lattice z, bit for bit.
  double coefficient(const Omega& omega, const Point& x) const;
  /// coefficient of the unit cell with integer index `cell` (offset already applied)
  double cell_coefficient(std::uint64_t seed, const std::array<std::int64_t, kMaxDim>& cell) const;

  VolumeIntegrand volume(const Omega& omega) const;
  SurfaceIntegrand surface() const;
  /// f, g with f_inf = f and g_0 = g (both are positively 1-homogeneous)
  DerivedPair pair(const Omega& omega) const;
  IntegrandConstants constants() const;

 private:
  EnsembleSpec spec_;
  std::uint64_t seed_;
  double a_min_ = 0.0;
  double a_max_ = 0.0;
};

/// Validates the law (nonempty, positive values, probabilities summing to 1); ConfigError otherwise.
StationaryEnsemble make_ensemble(const EnsembleSpec& spec, std::uint64_t seed);

struct ProcessOptions {
  /// lattice step in units of the integer box, so the physical spacing is h_box * M_nu
  double h_box = 0.25;
  int bc_cells = 2;
  int refinement = 1;
  SolverChoice solver = SolverChoice::automatic;
  HeuristicSchedule heuristic;
};

/// Half-open box [lo, hi) with integer corners.
struct IntegerBox {
  std::vector<std::int64_t> lo;
  std::vector<std::int64_t> hi;

  int dim() const { return static_cast<int>(lo.size()); }
  double volume() const;
  IntegerBox translated(const std::vector<std::int64_t>& z) const;
};

IntegerBox cube(int dim, std::int64_t r);

/// mu_{xi,nu}(omega, A) = m^{f,g_0}_omega(l_xi, M R A) / M^n
class VolumeProcess {
 public:
  VolumeProcess(const StationaryEnsemble& ensemble, Matrix xi, Vector nu, ProcessOptions options);

  int scale() const { return M_; }
  const Matrix& rotation() const { return R_; }
  GridDomain domain(const IntegerBox& A) const;
  double evaluate(const Omega& omega, const IntegerBox& A) const;
  /// (c3 |xi| + c4) L^n(A)
  double bound(const IntegerBox& A) const;
  /// lattice vector M R z by which omega moves when A moves by z
  std::array<std::int64_t, kMaxDim> carried_shift(const std::vector<std::int64_t>& z) const;

 private:
  const StationaryEnsemble* ensemble_;
  Matrix xi_;
  Vector nu_;
  Matrix R_;
  int M_ = 1;
  ProcessOptions options_;
};

/// mu_{zeta,nu}(omega, A') = m^{f_inf,g}_omega(u_{0,zeta,nu}, T(A')) / M^{n-1},
/// T(A') = M R (A' x [-c, c)), c = half the largest side of A'. Needs n >= 2.
class SurfaceProcess {
 public:
  SurfaceProcess(const StationaryEnsemble& ensemble, Vector zeta, Vector nu, ProcessOptions options);

  int scale() const { return M_; }
  GridDomain domain(const IntegerBox& A) const;
  double evaluate(const Omega& omega, const IntegerBox& A) const;
  /// c3 |zeta| L^{n-1}(A')
  double bound(const IntegerBox& A) const;
  std::array<std::int64_t, kMaxDim> carried_shift(const std::vector<std::int64_t>& z) const;

 private:
  const StationaryEnsemble* ensemble_;
  Vector zeta_;
  Vector nu_;
  Matrix R_;
  int M_ = 1;
  ProcessOptions options_;
};

VolumeProcess process_volume(const StationaryEnsemble& ensemble, const Matrix& xi, const Vector& nu,
                             const ProcessOptions& options = {});
SurfaceProcess process_surface(const StationaryEnsemble& ensemble, const Vector& zeta, const Vector& nu,
                               const ProcessOptions& options = {});

struct ErgodicRow {
  double r = 0.0;
  std::vector<double> values;      // mu(omega_i, Q_r)
  std::vector<double> normalized;  // mu / r^d
  double mean = 0.0;
  double stddev = 0.0;
};

struct ErgodicEstimate {
  std::vector<ErgodicRow> rows;
  double limit = 0.0;  // mean of the per-r means over the tail window
  int tail_window = 0;
};

/// Monte-Carlo over omega_0 .. omega_{n_omega-1} on the cubes [0, r)^d.
ErgodicEstimate ergodic_estimate(const VolumeProcess& process, const StationaryEnsemble& ensemble,
                                 const std::vector<double>& r_schedule, int n_omega, int tail_window = 2,
                                 int workers = 1);
ErgodicEstimate ergodic_estimate(const SurfaceProcess& process, const StationaryEnsemble& ensemble,
                                 const std::vector<double>& r_schedule, int n_omega, int tail_window = 2,
                                 int workers = 1);

/// splitmix64 finaliser
std::uint64_t mix64(std::uint64_t x);

}  // namespace fdhom

#endif  // FDHOM_STOCHASTIC_HPP
